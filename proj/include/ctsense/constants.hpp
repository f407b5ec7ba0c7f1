#pragma once

namespace ctsense {

// Speed of sound in air at 20 C, m/s.
inline constexpr double kSpeedOfSound = 343.0;

// Fundamental resonance of every preset at rest, Hz. The half-segment rest
// length is chosen so the corrugation-corrected fundamental lands here.
inline constexpr double kNeutralFundamentalHz = 722.0;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace ctsense
