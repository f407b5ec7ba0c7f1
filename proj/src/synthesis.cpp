#include "ctsense/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "ctsense/constants.hpp"

namespace ctsense {

namespace {

// Keeps tone + default noise inside [-1, 1] without clipping the waveform.
constexpr double kToneHeadroom = 0.9;

double uniform_unit(std::mt19937_64& rng) {
  // 53-bit mantissa draw; avoids implementation-defined distributions.
  return (rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double FlowSweep::speed_at(double t) const {
  if (samples.empty()) throw std::logic_error("empty flow sweep");
  if (t <= samples.front().first) return samples.front().second;
  if (t >= samples.back().first) return samples.back().second;
  auto it = std::upper_bound(
      samples.begin(), samples.end(), t,
      [](double value, const auto& s) { return value < s.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (t - lo.first) / (hi.first - lo.first);
  return lo.second + w * (hi.second - lo.second);
}

FlowSweep linear_sweep(double duration_s, double u_max_mps, double interval_s) {
  if (duration_s <= 0.0 || u_max_mps <= 0.0)
    throw std::domain_error("sweep duration and peak speed must be positive");
  if (interval_s <= 0.0 || interval_s >= duration_s)
    throw std::domain_error("sample interval must lie in (0, duration)");

  FlowSweep sweep;
  sweep.duration_s = duration_s;
  sweep.sample_interval_s = interval_s;
  const int count = 1 + static_cast<int>(std::floor(duration_s / interval_s));
  sweep.samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double t = i * interval_s;
    sweep.samples.emplace_back(t, u_max_mps * t / duration_s);
  }
  return sweep;
}

AudioSignal synthesize(const StretchedGeometry& geom, const FlowSweep& sweep,
                       const VortexModel& vm, const NoiseModel& noise,
                       const AcousticConfig& cfg, double sample_rate_hz) {
  if (noise.noise_floor < 0.0)
    throw std::domain_error("noise floor must be >= 0");

  // Tone response at every flow-meter sample.
  std::vector<ResponseSample> response;
  response.reserve(sweep.samples.size());
  for (const auto& [t, u] : sweep.samples)
    response.push_back(response_at(geom, vm, u, cfg));

  AudioSignal out;
  out.sample_rate_hz = sample_rate_hz;
  const std::size_t n_samples =
      static_cast<std::size_t>(std::llround(sweep.duration_s * sample_rate_hz));
  out.samples.resize(n_samples, 0.0);

  const double dt = 1.0 / sample_rate_hz;
  const std::size_t last_interval = sweep.samples.size() - 2;
  double phase = 0.0;
  for (std::size_t n = 0; n < n_samples; ++n) {
    const double t = n * dt;
    std::size_t i = std::min(
        static_cast<std::size_t>(t / sweep.sample_interval_s), last_interval);
    const ResponseSample& cur = response[i];
    const ResponseSample& next = response[i + 1];
    const double frac = (t - sweep.samples[i].first) / sweep.sample_interval_s;
    const double amp = cur.amplitude + frac * (next.amplitude - cur.amplitude);
    const double freq = cur.frequency_hz.value_or(0.0);
    phase += 2.0 * kPi * freq * dt;
    if (amp > 0.0) out.samples[n] = kToneHeadroom * amp * std::sin(phase);
  }

  if (noise.noise_floor > 0.0) {
    std::mt19937_64 rng(noise.seed);
    // Uniform noise in [-a, a] has RMS a / sqrt(3).
    const double a = noise.noise_floor * std::sqrt(3.0);
    for (auto& s : out.samples) {
      s += a * (2.0 * uniform_unit(rng) - 1.0);
      s = std::clamp(s, -1.0, 1.0);
    }
  }
  return out;
}

void JointConfig::validate() const {
  if (proximal_angle_rad < 0.0 || proximal_angle_rad > kPi / 2.0 ||
      distal_angle_rad < 0.0 || distal_angle_rad > kPi / 2.0)
    throw std::out_of_range("joint angles must lie in [0, pi/2]");
  if (joint_radius_mm <= 0.0)
    throw std::domain_error("joint radius must be positive");
}

JointStretch joint_config_to_stretch(const JointConfig& cfg) {
  cfg.validate();
  JointStretch out;
  const double inlet = cfg.joint_radius_mm * cfg.proximal_angle_rad;
  const double outlet = cfg.joint_radius_mm * cfg.distal_angle_rad;
  out.clamped = inlet > kMaxStretchMm || outlet > kMaxStretchMm;
  out.stretch.inlet_mm = std::min(inlet, kMaxStretchMm);
  out.stretch.outlet_mm = std::min(outlet, kMaxStretchMm);
  return out;
}

void write_wav(const std::string& path, const AudioSignal& signal) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);

  const std::uint32_t sample_rate =
      static_cast<std::uint32_t>(std::llround(signal.sample_rate_hz));
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(signal.samples.size() * 2);
  const std::uint32_t byte_rate = sample_rate * 2;

  auto put16 = [&](std::uint16_t v) { std::fwrite(&v, 2, 1, f); };
  auto put32 = [&](std::uint32_t v) { std::fwrite(&v, 4, 1, f); };

  std::fwrite("RIFF", 1, 4, f);
  put32(36 + data_bytes);
  std::fwrite("WAVE", 1, 4, f);
  std::fwrite("fmt ", 1, 4, f);
  put32(16);
  put16(1);  // PCM
  put16(1);  // mono
  put32(sample_rate);
  put32(byte_rate);
  put16(2);   // block align
  put16(16);  // bits per sample
  std::fwrite("data", 1, 4, f);
  put32(data_bytes);
  for (double s : signal.samples) {
    const double clamped = std::clamp(s, -1.0, 1.0);
    put16(static_cast<std::uint16_t>(
        static_cast<std::int16_t>(std::lrint(clamped * 32767.0))));
  }
  std::fclose(f);
}

}  // namespace ctsense
