#pragma once

#include <optional>
#include <vector>

#include "ctsense/constants.hpp"
#include "ctsense/geometry.hpp"

namespace ctsense {

struct FlowState {
  double speed_mps = 0.0;  // U
  double mach = 0.0;       // M = U / c

  static FlowState from_speed(double speed_mps,
                              double speed_of_sound = kSpeedOfSound);
};

/// Vortex-shedding model: f_v = St * U / L_char.
struct VortexModel {
  double strouhal = 0.0;
  double char_length_mm = 0.0;  // inlet w_c + r_up
};

/// Tunable constants of the tone model. Defaults reproduce the calibrated
/// sensor behavior; every knob is exposed through the CLI config.
struct AcousticConfig {
  double speed_of_sound = kSpeedOfSound;
  double band_low_hz = 3000.0;   // tones below this are not excited
  double band_high_hz = 8000.0;
  double lockin_factor = 1.0;    // capture window, fraction of half spacing
  double sigma_factor = 0.25;    // Gaussian strength width / mode spacing
  double width_crit_mm = 4.2;    // cavity width where shedding starts to fail
  double width_cutoff_scale = 1.15;   // inlet decay hits zero at crit * scale
  double outlet_cutoff_scale = 1.2;   // outlet decay reaches its floor here
  double outlet_floor = 0.04;    // residual strength past a wide outlet
  double reverse_ratio = 1.15;   // inlet/outlet rest-width ratio that silences
};

/// Open-ended standing wave: f_n = n c / 2L.
double open_pipe_mode(int mode, double length_mm,
                      double speed_of_sound = kSpeedOfSound);

/// Length-weighted average of the corrugation correction term
/// (d_c/R)(w_c/p_c)(1 + d_c/2R); the resonance denominator is 1 + this.
double corrugation_correction(const StretchedGeometry& geom);

/// Corrugation-corrected resonance of the stretched tube.
double cummings_mode(int mode, const StretchedGeometry& geom,
                     const FlowState& flow,
                     double speed_of_sound = kSpeedOfSound);

/// Spacing between adjacent quiescent (M = 0) modes; equals the fundamental.
double mode_spacing(const StretchedGeometry& geom,
                    double speed_of_sound = kSpeedOfSound);

double vortex_frequency(const FlowState& flow, const VortexModel& vm);

/// Vortex model of a (possibly stretched) tube for a given Strouhal number.
/// The characteristic length tracks the stretched inlet cavity width.
VortexModel vortex_model(const StretchedGeometry& geom, double strouhal);

/// Picks the Strouhal number so the frequency/flow-speed slope of the given
/// geometry equals target_slope (Hz per m/s).
VortexModel calibrate_strouhal(double target_slope, const StretchedGeometry& geom);

/// Measured F-U slope of each fabricated design at rest, Hz per (m/s).
double default_slope_hz_per_mps(SensorPreset preset);

struct LockInResult {
  std::optional<int> mode;           // locked mode number, none when silent
  std::optional<double> frequency_hz;
};

/// Quiescent modes inside the emission band, ordered by mode number.
std::vector<std::pair<int, double>> modes_in_band(const StretchedGeometry& geom,
                                                  const AcousticConfig& cfg);

/// Selects the in-band mode nearest the shedding frequency, or silence when
/// none is within the capture window. Ties break toward the lower mode.
LockInResult lock_in(double vortex_hz, const StretchedGeometry& geom,
                     const AcousticConfig& cfg);

/// Tone amplitude in [0, 1]: Gaussian in the shedding/mode detuning, scaled
/// by cavity-width decays, and zero for a reversed-flow tube. Vortex
/// formation fails sharply once the stretched inlet cavity passes the
/// critical width; downstream survival falls off gently (to a floor) as the
/// outlet cavity widens.
double resonance_strength(double vortex_hz, double locked_mode_hz,
                          const StretchedGeometry& geom,
                          const AcousticConfig& cfg);

struct ResponseSample {
  double speed_mps = 0.0;
  std::optional<double> frequency_hz;  // none when silent
  double amplitude = 0.0;              // 0 when silent
  std::optional<int> mode;
};

/// Full tone response at one flow speed.
ResponseSample response_at(const StretchedGeometry& geom, const VortexModel& vm,
                           double speed_mps, const AcousticConfig& cfg);

}  // namespace ctsense
