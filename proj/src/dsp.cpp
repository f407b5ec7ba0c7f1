#include "ctsense/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>

#include "ctsense/constants.hpp"
#include "ctsense/kernels.hpp"

namespace ctsense {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT.
void fft(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / static_cast<double>(n)));
  return w;
}

}  // namespace

Spectrogram stft(const AudioSignal& signal, std::size_t window,
                 std::size_t hop) {
  if (!is_pow2(window))
    throw std::invalid_argument("STFT window must be a power of two");
  if (hop == 0 || hop > window)
    throw std::invalid_argument("STFT hop must lie in (0, window]");
  if (signal.samples.size() < window)
    throw std::invalid_argument("signal shorter than one STFT window");

  const std::size_t n_frames = (signal.samples.size() - window) / hop + 1;
  const std::size_t n_bins = window / 2 + 1;
  const std::vector<double> win = hann_window(window);

  Spectrogram spec;
  spec.frame_times_s.resize(n_frames);
  spec.freq_bins_hz.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k)
    spec.freq_bins_hz[k] =
        static_cast<double>(k) * signal.sample_rate_hz / window;
  spec.magnitudes.resize(n_frames * n_bins);

  const auto& ops = kern::active_ops();
  std::vector<double> frame(window);
  std::vector<double> re(n_bins), im(n_bins);
  std::vector<std::complex<double>> buf(window);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * hop;
    spec.frame_times_s[f] =
        (start + window / 2.0) / signal.sample_rate_hz;
    ops.mul(signal.samples.data() + start, win.data(), frame.data(), window);
    for (std::size_t i = 0; i < window; ++i) buf[i] = frame[i];
    fft(buf);
    for (std::size_t k = 0; k < n_bins; ++k) {
      re[k] = buf[k].real();
      im[k] = buf[k].imag();
    }
    ops.complex_mag(re.data(), im.data(),
                    spec.magnitudes.data() + f * n_bins, n_bins);
  }
  return spec;
}

PeakTrack peak_track(const Spectrogram& spec, std::pair<double, double> band_hz,
                     std::optional<double> min_magnitude) {
  if (band_hz.first >= band_hz.second)
    throw std::invalid_argument("band must satisfy low < high");
  if (band_hz.first < spec.freq_bins_hz.front() ||
      band_hz.second > spec.freq_bins_hz.back())
    throw std::invalid_argument("band outside the spectrogram bin range");

  const std::size_t n_bins = spec.num_bins();
  std::size_t lo = 0;
  while (lo < n_bins && spec.freq_bins_hz[lo] < band_hz.first) ++lo;
  std::size_t hi = n_bins;
  while (hi > lo && spec.freq_bins_hz[hi - 1] > band_hz.second) --hi;

  PeakTrack track;
  std::vector<double> scratch;
  for (std::size_t f = 0; f < spec.num_frames(); ++f) {
    const double* row = spec.frame(f);
    PeakSample s;
    s.time_s = spec.frame_times_s[f];

    std::size_t best = lo;
    for (std::size_t k = lo; k < hi; ++k)
      if (row[k] > row[best]) best = k;  // strict: ties keep the lower bin

    double gate;
    if (min_magnitude) {
      gate = *min_magnitude;
    } else {
      scratch.assign(row, row + n_bins);
      auto mid = scratch.begin() + scratch.size() / 2;
      std::nth_element(scratch.begin(), mid, scratch.end());
      gate = 4.0 * *mid;
    }

    if (lo < hi && row[best] > 0.0 && row[best] >= gate) {
      s.frequency_hz = spec.freq_bins_hz[best];
      s.magnitude = row[best];
    }
    track.samples.push_back(s);
  }
  return track;
}

double spectral_entropy(const Spectrogram& spec) {
  const auto& ops = kern::active_ops();
  const double total = ops.sum(spec.magnitudes.data(), spec.magnitudes.size());
  if (!(total > 0.0))
    throw std::domain_error("entropy undefined for an all-zero spectrogram");
  double h = 0.0;
  for (double m : spec.magnitudes) {
    if (m <= 0.0) continue;
    const double p = m / total;
    h -= p * std::log2(p);
  }
  return h;
}

double correlation(const Spectrogram& a, const Spectrogram& b) {
  if (a.num_frames() != b.num_frames() || a.num_bins() != b.num_bins())
    throw std::invalid_argument("spectrogram shapes differ");
  const std::size_t n = a.magnitudes.size();
  const auto& ops = kern::active_ops();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double mean_a = ops.sum(a.magnitudes.data(), n) * inv_n;
  const double mean_b = ops.sum(b.magnitudes.data(), n) * inv_n;
  const double dot = ops.dot(a.magnitudes.data(), b.magnitudes.data(), n);
  const double sq_a = ops.sumsq(a.magnitudes.data(), n);
  const double sq_b = ops.sumsq(b.magnitudes.data(), n);
  const double var_a = sq_a - n * mean_a * mean_a;
  const double var_b = sq_b - n * mean_b * mean_b;
  if (!(var_a > 0.0) || !(var_b > 0.0))
    throw std::domain_error("correlation undefined for zero-variance input");
  return (dot - n * mean_a * mean_b) / std::sqrt(var_a * var_b);
}

void write_csv(const std::string& path, const Spectrogram& spec) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fprintf(f, "time_s");
  for (double b : spec.freq_bins_hz) std::fprintf(f, ",%.10g", b);
  std::fprintf(f, "\n");
  for (std::size_t fr = 0; fr < spec.num_frames(); ++fr) {
    std::fprintf(f, "%.10g", spec.frame_times_s[fr]);
    const double* row = spec.frame(fr);
    for (std::size_t k = 0; k < spec.num_bins(); ++k)
      std::fprintf(f, ",%.10g", row[k]);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace ctsense
