#include "ctsense/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "ctsense/dsp.hpp"

namespace ctsense {

namespace {

constexpr std::uint64_t kRandomStretchStream = 0x72616e646f6d5f73ULL;

double uniform_unit(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Index-parallel for loop with a deterministic result layout.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const int n = std::min<std::size_t>(workers, count);
  std::atomic<std::size_t> next{0};
  for (int w = 0; w < n; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
        fn(i);
    });
  for (auto& t : pool) t.join();
}

Spectrogram record_spectrogram(SensorPreset preset, const StretchState& stretch,
                               std::uint64_t noise_seed,
                               const ProtocolSpec& spec) {
  const TubeGeometry tube = build_sensor(preset);
  const StretchedGeometry geom = apply_stretch(tube, stretch);
  const VortexModel vm = preset_vortex_model(preset, geom);
  const FlowSweep sweep = linear_sweep(spec.sweep_duration_s, spec.u_max_mps,
                                       spec.sweep_interval_s);
  const AudioSignal audio =
      synthesize(geom, sweep, vm, {spec.noise_floor, noise_seed},
                 spec.acoustics);
  return stft(audio, spec.stft_window, spec.stft_hop);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

nlohmann::json ProtocolSpec::to_json() const {
  return {{"preset", to_string(preset)},
          {"grid_step_mm", grid_step_mm},
          {"grid_max_mm", grid_max_mm},
          {"grid_repeats", grid_repeats},
          {"random_count", random_count},
          {"random_repeats", random_repeats},
          {"master_seed", master_seed},
          {"noise_floor", noise_floor},
          {"sweep_duration_s", sweep_duration_s},
          {"u_max_mps", u_max_mps},
          {"sweep_interval_s", sweep_interval_s},
          {"stft_window", stft_window},
          {"stft_hop", stft_hop},
          {"feature_bins", feature_bins},
          {"workers", workers},
          {"band_low_hz", acoustics.band_low_hz},
          {"band_high_hz", acoustics.band_high_hz}};
}

ProtocolSpec ProtocolSpec::from_json(const nlohmann::json& j) {
  ProtocolSpec s;
  if (j.contains("preset")) s.preset = preset_from_string(j.at("preset"));
  s.grid_step_mm = j.value("grid_step_mm", s.grid_step_mm);
  s.grid_max_mm = j.value("grid_max_mm", s.grid_max_mm);
  s.grid_repeats = j.value("grid_repeats", s.grid_repeats);
  s.random_count = j.value("random_count", s.random_count);
  s.random_repeats = j.value("random_repeats", s.random_repeats);
  s.master_seed = j.value("master_seed", s.master_seed);
  s.noise_floor = j.value("noise_floor", s.noise_floor);
  s.sweep_duration_s = j.value("sweep_duration_s", s.sweep_duration_s);
  s.u_max_mps = j.value("u_max_mps", s.u_max_mps);
  s.sweep_interval_s = j.value("sweep_interval_s", s.sweep_interval_s);
  s.stft_window = j.value("stft_window", s.stft_window);
  s.stft_hop = j.value("stft_hop", s.stft_hop);
  s.feature_bins = j.value("feature_bins", s.feature_bins);
  s.workers = j.value("workers", s.workers);
  s.acoustics.band_low_hz = j.value("band_low_hz", s.acoustics.band_low_hz);
  s.acoustics.band_high_hz = j.value("band_high_hz", s.acoustics.band_high_hz);
  return s;
}

VortexModel preset_vortex_model(SensorPreset preset,
                                const StretchedGeometry& geom) {
  const StretchedGeometry neutral = apply_stretch(build_sensor(preset), {});
  const VortexModel calibrated =
      calibrate_strouhal(default_slope_hz_per_mps(preset), neutral);
  return vortex_model(geom, calibrated.strouhal);
}

FeatureVector record_features(SensorPreset preset, const StretchState& stretch,
                              std::uint64_t noise_seed,
                              const ProtocolSpec& spec) {
  const Spectrogram sg = record_spectrogram(preset, stretch, noise_seed, spec);
  const PeakTrack track = peak_track(
      sg, {spec.acoustics.band_low_hz, spec.acoustics.band_high_hz});
  const bool any_peak =
      std::any_of(track.samples.begin(), track.samples.end(),
                  [](const PeakSample& s) { return s.frequency_hz.has_value(); });
  // A recording that never locks onto a tone (fully widened inlet cavity)
  // is a valid observation: it maps to an all-zero feature vector.
  if (!any_peak) return FeatureVector(spec.feature_bins, 0.0);
  const FlowSweep sweep = linear_sweep(spec.sweep_duration_s, spec.u_max_mps,
                                       spec.sweep_interval_s);
  return extract_features(track, sweep, spec.feature_bins);
}

Dataset generate_dataset(const ProtocolSpec& spec) {
  // Build the stretch schedule first so row -> (stretch, seed) is a pure
  // function of the spec.
  struct Planned {
    StretchState stretch;
    int repetition;
    std::uint64_t seed;
  };
  std::vector<Planned> plan;

  const int grid_n =
      static_cast<int>(std::llround(spec.grid_max_mm / spec.grid_step_mm)) + 1;
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j)
      for (int r = 0; r < spec.grid_repeats; ++r)
        plan.push_back({{i * spec.grid_step_mm, j * spec.grid_step_mm}, r, 0});

  std::mt19937_64 rng(splitmix64(spec.master_seed ^ kRandomStretchStream));
  for (int k = 0; k < spec.random_count; ++k) {
    StretchState s{uniform_unit(rng) * spec.grid_max_mm,
                   uniform_unit(rng) * spec.grid_max_mm};
    for (int r = 0; r < spec.random_repeats; ++r) plan.push_back({s, r, 0});
  }
  for (std::size_t i = 0; i < plan.size(); ++i)
    plan[i].seed = splitmix64(spec.master_seed + i + 1);

  Dataset d;
  d.rows.resize(plan.size());
  std::vector<std::string> errors(plan.size());
  parallel_for(plan.size(), worker_count(spec.workers), [&](std::size_t i) {
    const Planned& p = plan[i];
    DataRow& row = d.rows[i];
    try {
      row.features = record_features(spec.preset, p.stretch, p.seed, spec);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      return;
    }
    row.inlet_mm = p.stretch.inlet_mm;
    row.outlet_mm = p.stretch.outlet_mm;
    row.total_mm = p.stretch.inlet_mm + p.stretch.outlet_mm;
    row.sensor = to_string(spec.preset);
    row.repetition = p.repetition;
    row.seed = p.seed;
  });
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      throw std::runtime_error("row " + std::to_string(i) + " (dL_I=" +
                               std::to_string(plan[i].stretch.inlet_mm) +
                               ", dL_O=" +
                               std::to_string(plan[i].stretch.outlet_mm) +
                               "): " + errors[i]);
  d.validate();
  return d;
}

double EvalReport::mae(Target t) const {
  for (const auto& r : targets)
    if (r.target == t) return r.mae_mm;
  throw std::logic_error("target missing from report");
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json jt = nlohmann::json::array();
  for (const auto& r : targets) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [pred, actual] : r.predicted_actual)
      pairs.push_back({pred, actual});
    jt.push_back({{"target", to_string(r.target)},
                  {"mae_mm", r.mae_mm},
                  {"predicted_actual", pairs}});
  }
  // Segment-vs-total MAE comparison is diagnostic only.
  return {{"format_version", 1},
          {"train_rows", train_rows},
          {"test_rows", test_rows},
          {"split_seed", split_seed},
          {"n_estimators", params.n_estimators},
          {"learning_rate", params.learning_rate},
          {"max_depth", params.max_depth},
          {"segment_mae_sum_mm", mae(Target::Inlet) + mae(Target::Outlet)},
          {"targets", jt}};
}

namespace {

TargetResult score(const Dataset& test, const GradientBoostingModel& model,
                   Target target) {
  TargetResult res;
  res.target = target;
  std::vector<double> pred, truth;
  for (const auto& row : test.rows) {
    pred.push_back(model.predict(row.features));
    truth.push_back(target_value(row, target));
    res.predicted_actual.emplace_back(pred.back(), truth.back());
  }
  res.mae_mm = mae(pred, truth);
  return res;
}

}  // namespace

EvalReport run_evaluation(const Dataset& d, std::uint64_t seed,
                          const GbrParams& params) {
  if (d.rows.size() < 20)
    throw std::runtime_error("evaluation needs at least 20 rows");
  auto [train, test] = train_test_split(d, 0.8, seed);

  EvalReport report;
  report.train_rows = train.rows.size();
  report.test_rows = test.rows.size();
  report.split_seed = seed;
  report.params = params;
  for (Target t : {Target::Inlet, Target::Outlet, Target::Total})
    report.targets.push_back(score(test, fit_gbr(train, t, params), t));
  return report;
}

EvalReport evaluate_models(const Dataset& d,
                           const GradientBoostingModel& inlet,
                           const GradientBoostingModel& outlet,
                           const GradientBoostingModel& total) {
  if (d.rows.empty()) throw std::runtime_error("empty dataset");
  EvalReport report;
  report.train_rows = 0;
  report.test_rows = d.rows.size();
  report.targets.push_back(score(d, inlet, Target::Inlet));
  report.targets.push_back(score(d, outlet, Target::Outlet));
  report.targets.push_back(score(d, total, Target::Total));
  return report;
}

nlohmann::json SimilarityReport::to_json() const {
  return {{"format_version", 1},
          {"stretch_points_mm", stretch_points_mm},
          {"matrix", matrix},
          {"mean_correlation", mean_correlation},
          {"mean_entropy_bits", mean_entropy_bits}};
}

SimilarityReport mutual_similarity(SensorPreset preset,
                                   const ProtocolSpec& spec) {
  SimilarityReport rep;
  for (double p = 0.0; p <= spec.grid_max_mm + 1e-9; p += spec.grid_step_mm)
    rep.stretch_points_mm.push_back(p);
  const std::size_t n = rep.stretch_points_mm.size();

  // One spectrogram per (inlet, outlet) grid cell, each with its own seed.
  std::vector<Spectrogram> specs(n * n);
  parallel_for(n * n, worker_count(spec.workers), [&](std::size_t idx) {
    const std::size_t i = idx / n, j = idx % n;
    const StretchState s{rep.stretch_points_mm[i], rep.stretch_points_mm[j]};
    specs[idx] = record_spectrogram(preset, s,
                                    splitmix64(spec.master_seed ^ (idx + 1)),
                                    spec);
  });

  rep.matrix.resize(n * n);
  double corr_sum = 0.0, entropy_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double c = correlation(specs[i * n + j], specs[j * n + i]);
      rep.matrix[i * n + j] = c;
      corr_sum += c;
      entropy_sum += spectral_entropy(specs[i * n + j]);
    }
  rep.mean_correlation = corr_sum / static_cast<double>(n * n);
  rep.mean_entropy_bits = entropy_sum / static_cast<double>(n * n);
  return rep;
}

std::vector<SlopeRow> slope_table(SensorPreset preset,
                                  const std::vector<StretchState>& conditions,
                                  const ProtocolSpec& spec) {
  constexpr double kRefHz = 5500.0;
  const FlowSweep sweep = linear_sweep(spec.sweep_duration_s, spec.u_max_mps,
                                       spec.sweep_interval_s);
  std::vector<SlopeRow> rows;
  for (const auto& cond : conditions) {
    ProtocolSpec clean = spec;
    clean.noise_floor = 0.0;  // slopes are fitted on the noiseless response
    const Spectrogram sg = record_spectrogram(preset, cond, 0, clean);
    const PeakTrack track = peak_track(
        sg, {spec.acoustics.band_low_hz, spec.acoustics.band_high_hz});
    SlopeRow row;
    row.stretch = cond;
    row.slope_hz_per_mps = fit_fu_slope(track, sweep).slope_hz_per_mps;
    double sum = 0.0;
    int count = 0;
    for (const auto& s : track.samples)
      if (s.frequency_hz && std::abs(*s.frequency_hz - kRefHz) <= 500.0) {
        sum += *s.frequency_hz;
        ++count;
      }
    row.mean_freq_near_ref_hz = count > 0 ? sum / count : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::vector<FingerRow> finger_scenario(
    const std::vector<JointConfig>& poses, const ProtocolSpec& spec,
    const GradientBoostingModel& inlet, const GradientBoostingModel& outlet,
    const GradientBoostingModel& total) {
  std::vector<FingerRow> rows;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const JointStretch js = joint_config_to_stretch(poses[i]);
    FingerRow row;
    row.pose = poses[i];
    row.stretch = js.stretch;
    row.clamped = js.clamped;

    const auto slopes = slope_table(spec.preset, {js.stretch}, spec);
    row.slope_hz_per_mps = slopes.front().slope_hz_per_mps;

    const FeatureVector features = record_features(
        spec.preset, js.stretch, splitmix64(spec.master_seed ^ (i + 1)), spec);
    row.predicted_inlet_mm = inlet.predict(features);
    row.predicted_outlet_mm = outlet.predict(features);
    row.predicted_total_mm = total.predict(features);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ctsense
