#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctsense/acoustics.hpp"
#include "ctsense/geometry.hpp"

namespace ctsense {

/// Flow ramp sampled like the physical flow meter: (t, U) pairs every 10 ms.
struct FlowSweep {
  double duration_s = 0.8;
  double sample_interval_s = 0.010;
  std::vector<std::pair<double, double>> samples;  // (t, U), U non-decreasing

  double max_speed() const { return samples.back().second; }
  /// Piecewise-linear flow speed at time t, clamped to the sweep range.
  double speed_at(double t) const;
};

/// U(t) = u_max * t / duration, starting from standstill.
FlowSweep linear_sweep(double duration_s = 0.8, double u_max_mps = 12.0,
                       double interval_s = 0.010);

struct AudioSignal {
  double sample_rate_hz = 44100.0;
  std::vector<double> samples;  // in [-1, 1]
  std::optional<double> sync_marker_time_s;

  double duration_s() const { return samples.size() / sample_rate_hz; }
};

struct NoiseModel {
  double noise_floor = 0.05;  // RMS relative to a unit tone
  std::uint64_t seed = 0;
};

/// Renders the lock-in response of a flow sweep as audio: one phase-continuous
/// sinusoid whose frequency steps with the locked mode, amplitude ramped
/// between sweep samples, plus seeded uniform white noise. Deterministic for a
/// fixed seed.
AudioSignal synthesize(const StretchedGeometry& geom, const FlowSweep& sweep,
                       const VortexModel& vm, const NoiseModel& noise,
                       const AcousticConfig& cfg = {},
                       double sample_rate_hz = 44100.0);

/// Finger pose driving the sensor through two joints.
struct JointConfig {
  double proximal_angle_rad = 0.0;  // inlet-side joint, [0, pi/2]
  double distal_angle_rad = 0.0;    // outlet-side joint, [0, pi/2]
  double joint_radius_mm = 6.0;

  void validate() const;
};

struct JointStretch {
  StretchState stretch;
  bool clamped = false;  // true when an arc length exceeded the sensing range
};

/// Arc-length map: dL = joint_radius * angle per joint, clamped to [0, 10] mm.
JointStretch joint_config_to_stretch(const JointConfig& cfg);

/// 16-bit mono PCM RIFF file.
void write_wav(const std::string& path, const AudioSignal& signal);

}  // namespace ctsense
