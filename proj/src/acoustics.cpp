#include "ctsense/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctsense {

FlowState FlowState::from_speed(double speed_mps, double speed_of_sound) {
  if (speed_mps < 0.0) throw std::domain_error("flow speed must be >= 0");
  FlowState f;
  f.speed_mps = speed_mps;
  f.mach = speed_mps / speed_of_sound;
  if (f.mach >= 1.0) throw std::domain_error("flow must be subsonic");
  return f;
}

double open_pipe_mode(int mode, double length_mm, double speed_of_sound) {
  if (mode < 1) throw std::domain_error("mode number must be >= 1");
  if (length_mm <= 0.0) throw std::domain_error("tube length must be positive");
  return mode * speed_of_sound * 1000.0 / (2.0 * length_mm);
}

double corrugation_correction(const StretchedGeometry& geom) {
  const double radius = geom.base.inner_radius_mm;
  double weighted = 0.0;
  double length = 0.0;
  for (const auto& seg : geom.segments) {
    const auto& p = seg.profile;
    const double depth_ratio = p.cavity_depth_mm / radius;
    const double term = depth_ratio * (p.cavity_width_mm / p.pitch_mm) *
                        (1.0 + 0.5 * depth_ratio);
    weighted += term * seg.length_mm;
    length += seg.length_mm;
  }
  return weighted / length;
}

double cummings_mode(int mode, const StretchedGeometry& geom,
                     const FlowState& flow, double speed_of_sound) {
  if (flow.mach >= 1.0) throw std::domain_error("flow must be subsonic");
  const double base =
      open_pipe_mode(mode, total_length(geom), speed_of_sound);
  const double mach2 = flow.mach * flow.mach;
  return base * (1.0 - mach2) / (1.0 + corrugation_correction(geom));
}

double mode_spacing(const StretchedGeometry& geom, double speed_of_sound) {
  return cummings_mode(1, geom, FlowState{}, speed_of_sound);
}

double vortex_frequency(const FlowState& flow, const VortexModel& vm) {
  return vm.strouhal * flow.speed_mps / (vm.char_length_mm * 1e-3);
}

VortexModel vortex_model(const StretchedGeometry& geom, double strouhal) {
  const auto& inlet = geom.inlet().profile;
  VortexModel vm;
  vm.strouhal = strouhal;
  vm.char_length_mm = inlet.cavity_width_mm + inlet.edge_radius_mm;
  return vm;
}

VortexModel calibrate_strouhal(double target_slope,
                               const StretchedGeometry& geom) {
  if (target_slope <= 0.0)
    throw std::domain_error("target slope must be positive");
  const auto& inlet = geom.inlet().profile;
  VortexModel vm;
  vm.char_length_mm = inlet.cavity_width_mm + inlet.edge_radius_mm;
  vm.strouhal = target_slope * vm.char_length_mm * 1e-3;
  return vm;
}

double default_slope_hz_per_mps(SensorPreset preset) {
  switch (preset) {
    case SensorPreset::P31: return 660.0;
    case SensorPreset::P41: return 570.0;
    case SensorPreset::Pdual: return 670.0;
  }
  throw std::logic_error("unreachable");
}

std::vector<std::pair<int, double>> modes_in_band(const StretchedGeometry& geom,
                                                  const AcousticConfig& cfg) {
  const double spacing = mode_spacing(geom, cfg.speed_of_sound);
  std::vector<std::pair<int, double>> modes;
  const int first = std::max(1, static_cast<int>(std::ceil(
                                    cfg.band_low_hz / spacing - 1e-9)));
  for (int n = first;; ++n) {
    const double f = n * spacing;
    if (f > cfg.band_high_hz + 1e-9) break;
    if (f >= cfg.band_low_hz - 1e-9) modes.emplace_back(n, f);
  }
  return modes;
}

LockInResult lock_in(double vortex_hz, const StretchedGeometry& geom,
                     const AcousticConfig& cfg) {
  if (!(cfg.band_low_hz < cfg.band_high_hz))
    throw std::invalid_argument("emission band must satisfy low < high");
  const auto modes = modes_in_band(geom, cfg);
  if (modes.empty()) return {};

  const std::pair<int, double>* best = nullptr;
  double best_dist = 0.0;
  for (const auto& m : modes) {
    const double dist = std::abs(vortex_hz - m.second);
    if (!best || dist < best_dist) {  // ties keep the lower mode
      best = &m;
      best_dist = dist;
    }
  }
  const double spacing = mode_spacing(geom, cfg.speed_of_sound);
  if (best_dist > 0.5 * spacing * cfg.lockin_factor) return {};
  return {best->first, best->second};
}

namespace {

// Vortex formation collapses quickly once the inlet cavity is wider than the
// critical width: full strength up to the critical width, then a linear fade
// to zero at the cutoff.
double inlet_width_decay(double width_mm, const AcousticConfig& cfg) {
  if (width_mm <= cfg.width_crit_mm) return 1.0;
  const double cutoff = cfg.width_crit_mm * cfg.width_cutoff_scale;
  if (width_mm >= cutoff) return 0.0;
  return (cutoff - width_mm) / (cutoff - cfg.width_crit_mm);
}

// Vortices already shed at the inlet survive a widened outlet much better:
// the decay is gentler and bottoms out at a residual floor instead of zero.
double outlet_width_decay(double width_mm, const AcousticConfig& cfg) {
  if (width_mm <= cfg.width_crit_mm) return 1.0;
  const double cutoff = cfg.width_crit_mm * cfg.outlet_cutoff_scale;
  if (width_mm >= cutoff) return cfg.outlet_floor;
  const double t = (cutoff - width_mm) / (cutoff - cfg.width_crit_mm);
  return cfg.outlet_floor + (1.0 - cfg.outlet_floor) * t;
}

// A tube whose inlet corrugation is designed wider than its outlet kills the
// tone: the large inlet vortices do not fit the narrower downstream cavities.
bool reversed_flow_silent(const StretchedGeometry& geom,
                          const AcousticConfig& cfg) {
  const double inlet_rest = geom.base.segments.front().profile.cavity_width_mm;
  const double outlet_rest = geom.base.segments.back().profile.cavity_width_mm;
  return inlet_rest > cfg.reverse_ratio * outlet_rest;
}

}  // namespace

double resonance_strength(double vortex_hz, double locked_mode_hz,
                          const StretchedGeometry& geom,
                          const AcousticConfig& cfg) {
  if (locked_mode_hz <= 0.0)
    throw std::domain_error("locked mode frequency must be positive");
  if (reversed_flow_silent(geom, cfg)) return 0.0;

  const double sigma = cfg.sigma_factor * mode_spacing(geom, cfg.speed_of_sound);
  const double detune = vortex_hz - locked_mode_hz;
  const double gauss = std::exp(-detune * detune / (2.0 * sigma * sigma));

  return gauss *
         inlet_width_decay(geom.inlet().profile.cavity_width_mm, cfg) *
         outlet_width_decay(geom.outlet().profile.cavity_width_mm, cfg);
}

ResponseSample response_at(const StretchedGeometry& geom, const VortexModel& vm,
                           double speed_mps, const AcousticConfig& cfg) {
  ResponseSample out;
  out.speed_mps = speed_mps;
  const FlowState flow = FlowState::from_speed(speed_mps, cfg.speed_of_sound);
  const double f_v = vortex_frequency(flow, vm);
  const LockInResult lock = lock_in(f_v, geom, cfg);
  if (!lock.mode) return out;
  const double amp = resonance_strength(f_v, *lock.frequency_hz, geom, cfg);
  if (amp <= 0.0) return out;
  out.frequency_hz = lock.frequency_hz;
  out.mode = lock.mode;
  out.amplitude = amp;
  return out;
}

}  // namespace ctsense
