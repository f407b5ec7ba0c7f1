#include "ctsense/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ctsense/constants.hpp"

namespace ctsense {

namespace {

constexpr double kInnerRadiusMm = 1.9;
constexpr double kOuterRadiusMm = 3.9;
constexpr double kCavityDepthMm = kOuterRadiusMm - kInnerRadiusMm;

// Denominator of the corrugation-corrected resonance at w_c / p_c == 1:
// 1 + (d_c/R) * (1 + d_c/2R).
double neutral_correction() {
  const double depth_ratio = kCavityDepthMm / kInnerRadiusMm;
  return 1.0 + depth_ratio * (1.0 + 0.5 * depth_ratio);
}

Segment half_segment(double wavenumber) {
  return Segment{neutral_half_length_mm(),
                 CorrugationProfile::cosine(wavenumber, kCavityDepthMm)};
}

}  // namespace

double CorrugationProfile::wavenumber() const { return 2.0 * kPi / pitch_mm; }

CorrugationProfile CorrugationProfile::cosine(double wavenumber_per_mm,
                                              double depth_mm,
                                              double edge_radius_mm) {
  if (wavenumber_per_mm <= 0.0)
    throw std::invalid_argument("corrugation wavenumber must be positive");
  CorrugationProfile p;
  p.pitch_mm = 2.0 * kPi / wavenumber_per_mm;
  p.cavity_width_mm = p.pitch_mm;
  p.cavity_depth_mm = depth_mm;
  p.edge_radius_mm = edge_radius_mm;
  p.validate();
  return p;
}

void CorrugationProfile::validate() const {
  if (pitch_mm <= 0.0) throw std::invalid_argument("pitch must be positive");
  if (cavity_width_mm <= 0.0)
    throw std::invalid_argument("cavity width must be positive");
  if (cavity_depth_mm < 0.0)
    throw std::invalid_argument("cavity depth must be non-negative");
  if (edge_radius_mm < 0.0)
    throw std::invalid_argument("edge radius must be non-negative");
  if (cavity_width_mm > pitch_mm + 1e-12)
    throw std::invalid_argument("cavity width cannot exceed pitch");
}

double TubeGeometry::rest_length_mm() const {
  double sum = 0.0;
  for (const auto& s : segments) sum += s.rest_length_mm;
  return sum;
}

void TubeGeometry::validate() const {
  if (inner_radius_mm <= 0.0 || outer_radius_mm <= inner_radius_mm)
    throw std::invalid_argument("require R_out > R > 0");
  if (segments.empty())
    throw std::invalid_argument("geometry needs at least one segment");
  const double wall = outer_radius_mm - inner_radius_mm;
  for (const auto& s : segments) {
    if (s.rest_length_mm <= 0.0)
      throw std::invalid_argument("segment rest length must be positive");
    s.profile.validate();
    if (std::abs(s.profile.cavity_depth_mm - wall) > 1e-9)
      throw std::invalid_argument(
          "cavity depth must span the wall annulus (R_out - R)");
  }
}

double neutral_half_length_mm() {
  // Invert the corrected standing-wave fundamental for half the tube:
  // f1 = c / (2 L_total * D)  with  L_total = 2 * L_half.
  const double c_mm = kSpeedOfSound * 1000.0;
  return c_mm / (4.0 * kNeutralFundamentalHz * neutral_correction());
}

SensorPreset preset_from_string(const std::string& name) {
  if (name == "p31" || name == "P31") return SensorPreset::P31;
  if (name == "p41" || name == "P41") return SensorPreset::P41;
  if (name == "pdual" || name == "Pdual") return SensorPreset::Pdual;
  throw std::invalid_argument("unknown sensor preset: " + name);
}

std::string to_string(SensorPreset preset) {
  switch (preset) {
    case SensorPreset::P31: return "p31";
    case SensorPreset::P41: return "p41";
    case SensorPreset::Pdual: return "pdual";
  }
  throw std::logic_error("unreachable");
}

TubeGeometry build_sensor(SensorPreset preset) {
  // Wavenumbers of the cosine wall: k = 2 gives a 3.14 mm period,
  // k = 1.5 gives 4.18 mm.
  constexpr double kShort = 2.0;
  constexpr double kLong = 1.5;

  TubeGeometry g;
  g.inner_radius_mm = kInnerRadiusMm;
  g.outer_radius_mm = kOuterRadiusMm;
  switch (preset) {
    case SensorPreset::P31:
      g.segments = {half_segment(kShort), half_segment(kShort)};
      break;
    case SensorPreset::P41:
      g.segments = {half_segment(kLong), half_segment(kLong)};
      break;
    case SensorPreset::Pdual:
      g.segments = {half_segment(kShort), half_segment(kLong)};
      break;
  }
  g.validate();
  return g;
}

TubeGeometry reversed(TubeGeometry geom) {
  std::reverse(geom.segments.begin(), geom.segments.end());
  return geom;
}

void StretchState::validate() const {
  if (!(inlet_mm >= 0.0 && inlet_mm <= kMaxStretchMm))
    throw std::out_of_range("delta_L_inlet outside [0, 10] mm");
  if (!(outlet_mm >= 0.0 && outlet_mm <= kMaxStretchMm))
    throw std::out_of_range("delta_L_outlet outside [0, 10] mm");
}

StretchedGeometry apply_stretch(const TubeGeometry& geom,
                                const StretchState& stretch) {
  geom.validate();
  stretch.validate();
  if (geom.segments.size() != 2)
    throw std::invalid_argument(
        "segmented stretch requires a two-half-segment tube");

  StretchedGeometry out;
  out.base = geom;
  out.stretch = stretch;
  const double deltas[2] = {stretch.inlet_mm, stretch.outlet_mm};
  for (int i = 0; i < 2; ++i) {
    const Segment& seg = geom.segments[i];
    const double strain = deltas[i] / seg.rest_length_mm;
    EffectiveSegment eff;
    eff.length_mm = seg.rest_length_mm + deltas[i];
    eff.profile = seg.profile;
    eff.profile.cavity_width_mm = seg.profile.cavity_width_mm * (1.0 + strain);
    eff.profile.pitch_mm = seg.profile.pitch_mm * (1.0 + strain);
    out.segments.push_back(eff);
  }
  return out;
}

double total_length(const StretchedGeometry& geom) {
  double sum = 0.0;
  for (const auto& s : geom.segments) sum += s.length_mm;
  return sum;
}

void to_json(nlohmann::json& j, const CorrugationProfile& p) {
  j = {{"pitch_mm", p.pitch_mm},
       {"cavity_width_mm", p.cavity_width_mm},
       {"cavity_depth_mm", p.cavity_depth_mm},
       {"edge_radius_mm", p.edge_radius_mm}};
}

void from_json(const nlohmann::json& j, CorrugationProfile& p) {
  j.at("pitch_mm").get_to(p.pitch_mm);
  j.at("cavity_width_mm").get_to(p.cavity_width_mm);
  j.at("cavity_depth_mm").get_to(p.cavity_depth_mm);
  p.edge_radius_mm = j.value("edge_radius_mm", 0.0);
  p.validate();
}

void to_json(nlohmann::json& j, const TubeGeometry& g) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : g.segments)
    segs.push_back({{"rest_length_mm", s.rest_length_mm},
                    {"profile", s.profile}});
  j = {{"inner_radius_mm", g.inner_radius_mm},
       {"outer_radius_mm", g.outer_radius_mm},
       {"segments", segs}};
}

void from_json(const nlohmann::json& j, TubeGeometry& g) {
  j.at("inner_radius_mm").get_to(g.inner_radius_mm);
  j.at("outer_radius_mm").get_to(g.outer_radius_mm);
  g.segments.clear();
  for (const auto& js : j.at("segments")) {
    Segment s;
    js.at("rest_length_mm").get_to(s.rest_length_mm);
    js.at("profile").get_to(s.profile);
    g.segments.push_back(s);
  }
  g.validate();
}

void to_json(nlohmann::json& j, const StretchState& s) {
  j = {{"inlet_mm", s.inlet_mm}, {"outlet_mm", s.outlet_mm}};
}

void from_json(const nlohmann::json& j, StretchState& s) {
  j.at("inlet_mm").get_to(s.inlet_mm);
  j.at("outlet_mm").get_to(s.outlet_mm);
  s.validate();
}

}  // namespace ctsense
