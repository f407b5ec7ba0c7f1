#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace ctsense {

/// Cosine-wall corrugation parameters. Lengths in mm.
struct CorrugationProfile {
  double pitch_mm = 0.0;         // p_c, one corrugation period
  double cavity_width_mm = 0.0;  // w_c, effective cavity opening
  double cavity_depth_mm = 0.0;  // d_c, radial depth of the cavity
  double edge_radius_mm = 0.0;   // r_up, rim roundness

  double wavenumber() const;  // k = 2*pi / p_c, 1/mm

  /// Profile for a wall y = cos(k x): the effective cavity width equals the
  /// period, so w_c / p_c == 1.
  static CorrugationProfile cosine(double wavenumber_per_mm, double depth_mm,
                                   double edge_radius_mm = 0.0);

  void validate() const;
};

struct Segment {
  double rest_length_mm = 0.0;
  CorrugationProfile profile;
};

/// A corrugated tube, segments ordered inlet -> outlet.
struct TubeGeometry {
  double inner_radius_mm = 0.0;   // R
  double outer_radius_mm = 0.0;   // R_out
  std::vector<Segment> segments;

  double rest_length_mm() const;
  void validate() const;
};

enum class SensorPreset { P31, P41, Pdual };

SensorPreset preset_from_string(const std::string& name);
std::string to_string(SensorPreset preset);

/// The three fabricated designs: R = 1.9 mm, R_out = 3.9 mm, two half
/// segments whose rest length anchors the neutral fundamental at 722 Hz.
TubeGeometry build_sensor(SensorPreset preset);

/// Rest length of one half segment, mm.
double neutral_half_length_mm();

/// Same tube with the flow direction flipped (segment order reversed).
TubeGeometry reversed(TubeGeometry geom);

/// Elongation applied to each half segment, mm. Sensing range is [0, 10].
struct StretchState {
  double inlet_mm = 0.0;   // dL_I
  double outlet_mm = 0.0;  // dL_O

  void validate() const;
};

inline constexpr double kMaxStretchMm = 10.0;

struct EffectiveSegment {
  double length_mm = 0.0;
  CorrugationProfile profile;
};

/// Tube after elongation. Cavity width and pitch scale with the segment
/// strain; depth is held constant.
struct StretchedGeometry {
  TubeGeometry base;
  StretchState stretch;
  std::vector<EffectiveSegment> segments;

  const EffectiveSegment& inlet() const { return segments.front(); }
  const EffectiveSegment& outlet() const { return segments.back(); }
};

/// Requires a two-half-segment tube; dL_I stretches the first, dL_O the
/// second. Throws std::out_of_range for stretch outside the sensing range.
StretchedGeometry apply_stretch(const TubeGeometry& geom,
                                const StretchState& stretch);

double total_length(const StretchedGeometry& geom);

void to_json(nlohmann::json& j, const CorrugationProfile& p);
void from_json(const nlohmann::json& j, CorrugationProfile& p);
void to_json(nlohmann::json& j, const TubeGeometry& g);
void from_json(const nlohmann::json& j, TubeGeometry& g);
void to_json(nlohmann::json& j, const StretchState& s);
void from_json(const nlohmann::json& j, StretchState& s);

}  // namespace ctsense
