#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctsense/features.hpp"
#include "ctsense/gbr.hpp"
#include "ctsense/synthesis.hpp"

namespace ctsense {

/// Data-collection protocol: an 11x11 1 mm stretch grid recorded twice plus
/// 100 random stretch points recorded twice, 442 recordings per sensor.
struct ProtocolSpec {
  SensorPreset preset = SensorPreset::Pdual;
  double grid_step_mm = 1.0;
  double grid_max_mm = 10.0;
  int grid_repeats = 2;
  int random_count = 100;
  int random_repeats = 2;
  std::uint64_t master_seed = 0;

  double noise_floor = 0.05;
  double sweep_duration_s = 0.8;
  double u_max_mps = 12.0;
  double sweep_interval_s = 0.010;
  std::size_t stft_window = 1024;
  std::size_t stft_hop = 256;
  int feature_bins = kFeatureBins;
  int workers = 0;  // 0 = hardware concurrency

  AcousticConfig acoustics;

  nlohmann::json to_json() const;
  static ProtocolSpec from_json(const nlohmann::json& j);
};

std::uint64_t splitmix64(std::uint64_t x);

/// Vortex model for a stretched tube, with the Strouhal number calibrated
/// once against the preset's neutral F-U slope.
VortexModel preset_vortex_model(SensorPreset preset,
                                const StretchedGeometry& geom);

/// One full synthetic recording: synthesize -> stft -> peak track -> features.
FeatureVector record_features(SensorPreset preset, const StretchState& stretch,
                              std::uint64_t noise_seed,
                              const ProtocolSpec& spec);

/// Runs the whole protocol. Repetitions share the stretch state and differ
/// only in noise seed; rows carry targets and recording metadata.
Dataset generate_dataset(const ProtocolSpec& spec);

struct TargetResult {
  Target target = Target::Inlet;
  double mae_mm = 0.0;
  std::vector<std::pair<double, double>> predicted_actual;  // test rows
};

struct EvalReport {
  std::vector<TargetResult> targets;  // inlet, outlet, total
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::uint64_t split_seed = 0;
  GbrParams params;

  double mae(Target t) const;
  nlohmann::json to_json() const;
};

/// 80/20 split, one model per target, test MAE per target. The report also
/// carries predicted-vs-actual pairs for plotting.
EvalReport run_evaluation(const Dataset& d, std::uint64_t seed,
                          const GbrParams& params = {});

/// Same evaluation against already-trained models (no split: the whole
/// dataset is scored).
EvalReport evaluate_models(const Dataset& d,
                           const GradientBoostingModel& inlet,
                           const GradientBoostingModel& outlet,
                           const GradientBoostingModel& total);

struct SimilarityReport {
  std::vector<double> stretch_points_mm;   // grid axis
  std::vector<double> matrix;              // corr((a,b) vs (b,a)), row-major
  double mean_correlation = 0.0;
  double mean_entropy_bits = 0.0;

  double at(std::size_t i, std::size_t j) const {
    return matrix[i * stretch_points_mm.size() + j];
  }
  nlohmann::json to_json() const;
};

/// Correlation between spectrograms of mutual stretch pairs over the grid.
SimilarityReport mutual_similarity(SensorPreset preset,
                                   const ProtocolSpec& spec);

struct SlopeRow {
  StretchState stretch;
  double slope_hz_per_mps = 0.0;
  double mean_freq_near_ref_hz = 0.0;  // mean track frequency near 5.5 kHz
};

/// Noiseless F-U slope fit per stretch condition, plus the mean in-band
/// resonance frequency near the 5.5 kHz reference.
std::vector<SlopeRow> slope_table(SensorPreset preset,
                                  const std::vector<StretchState>& conditions,
                                  const ProtocolSpec& spec);

struct FingerRow {
  JointConfig pose;
  StretchState stretch;
  bool clamped = false;
  double slope_hz_per_mps = 0.0;
  double predicted_inlet_mm = 0.0;
  double predicted_outlet_mm = 0.0;
  double predicted_total_mm = 0.0;
};

/// Maps each pose to a stretch state, synthesizes the recording, and reports
/// the fitted slope next to the model's stretch estimates.
std::vector<FingerRow> finger_scenario(
    const std::vector<JointConfig>& poses, const ProtocolSpec& spec,
    const GradientBoostingModel& inlet, const GradientBoostingModel& outlet,
    const GradientBoostingModel& total);

}  // namespace ctsense
