#include "ctsense/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctsense {

FeatureVector extract_features(const PeakTrack& track, const FlowSweep& sweep,
                               int bins) {
  if (bins < 1) throw std::invalid_argument("need at least one feature bin");
  const double u_max = sweep.max_speed();

  std::vector<double> sums(bins, 0.0);
  std::vector<int> counts(bins, 0);
  for (const auto& s : track.samples) {
    if (!s.frequency_hz) continue;
    const double u = sweep.speed_at(s.time_s);
    int bin = static_cast<int>(u / u_max * bins);
    bin = std::clamp(bin, 0, bins - 1);
    sums[bin] += *s.frequency_hz;
    counts[bin] += 1;
  }

  if (std::all_of(counts.begin(), counts.end(), [](int c) { return c == 0; }))
    throw std::runtime_error("no peaks in any flow-speed bin");

  FeatureVector out(bins, 0.0);
  for (int i = 0; i < bins; ++i)
    if (counts[i] > 0) out[i] = sums[i] / counts[i];

  // Fill gaps: interior bins interpolate between the bracketing filled bins,
  // edge bins copy the nearest filled value.
  int prev = -1;
  for (int i = 0; i < bins; ++i) {
    if (counts[i] > 0) {
      if (prev < 0) {
        for (int j = 0; j < i; ++j) out[j] = out[i];
      } else if (prev < i - 1) {
        const double step = (out[i] - out[prev]) / (i - prev);
        for (int j = prev + 1; j < i; ++j) out[j] = out[prev] + step * (j - prev);
      }
      prev = i;
    }
  }
  for (int j = prev + 1; j < bins; ++j) out[j] = out[prev];
  return out;
}

SlopeFit fit_fu_slope(const PeakTrack& track, const FlowSweep& sweep) {
  double uf = 0.0, uu = 0.0;
  std::vector<std::pair<double, double>> points;  // (U, f)
  for (const auto& s : track.samples) {
    if (!s.frequency_hz) continue;
    const double u = sweep.speed_at(s.time_s);
    points.emplace_back(u, *s.frequency_hz);
    uf += u * *s.frequency_hz;
    uu += u * u;
  }
  if (points.size() < 2)
    throw std::runtime_error("slope fit needs at least two non-silent points");

  SlopeFit fit;
  fit.slope_hz_per_mps = uf / uu;
  double sq = 0.0;
  for (const auto& [u, f] : points) {
    const double r = f - fit.slope_hz_per_mps * u;
    sq += r * r;
  }
  fit.residual_rms_hz = std::sqrt(sq / points.size());
  return fit;
}

}  // namespace ctsense
