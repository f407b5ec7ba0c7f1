#pragma once

#include <vector>

#include "ctsense/dsp.hpp"

namespace ctsense {

/// One peak frequency per uniform flow-speed bin over [0, U_max].
using FeatureVector = std::vector<double>;

inline constexpr int kFeatureBins = 32;

/// Buckets each frame's peak by the flow speed at the frame time and averages
/// per bin. Empty interior bins are linearly interpolated from their
/// neighbors; empty edge bins take the nearest filled value. Throws when no
/// bin has data.
FeatureVector extract_features(const PeakTrack& track, const FlowSweep& sweep,
                               int bins = kFeatureBins);

struct SlopeFit {
  double slope_hz_per_mps = 0.0;  // zero-intercept least squares
  double residual_rms_hz = 0.0;
};

/// Least-squares line through the origin over the non-silent track points:
/// slope = sum(U f) / sum(U^2). Needs at least two points.
SlopeFit fit_fu_slope(const PeakTrack& track, const FlowSweep& sweep);

}  // namespace ctsense
