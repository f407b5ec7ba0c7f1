#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctsense/synthesis.hpp"

namespace ctsense {

/// Magnitude STFT, frames x bins, row-major.
struct Spectrogram {
  std::vector<double> frame_times_s;
  std::vector<double> freq_bins_hz;
  std::vector<double> magnitudes;  // size = frames * bins

  std::size_t num_frames() const { return frame_times_s.size(); }
  std::size_t num_bins() const { return freq_bins_hz.size(); }
  double at(std::size_t frame, std::size_t bin) const {
    return magnitudes[frame * num_bins() + bin];
  }
  const double* frame(std::size_t f) const {
    return magnitudes.data() + f * num_bins();
  }
};

/// Hann-windowed magnitude STFT. Window must be a power of two and the signal
/// at least one window long. Parseval-consistent: for each frame,
/// sum(w^2 x^2) == (|X_0|^2 + 2 sum |X_k|^2 + |X_{N/2}|^2) / N.
Spectrogram stft(const AudioSignal& signal, std::size_t window = 1024,
                 std::size_t hop = 256);

struct PeakSample {
  double time_s = 0.0;
  std::optional<double> frequency_hz;  // none below the magnitude gate
  double magnitude = 0.0;
};

struct PeakTrack {
  std::vector<PeakSample> samples;
};

/// In-band argmax per frame. A frame reports a peak only when the argmax
/// magnitude is positive and at or above the gate; by default the gate is
/// 4x the frame's median magnitude. Equal maxima report the lower frequency.
PeakTrack peak_track(const Spectrogram& spec,
                     std::pair<double, double> band_hz,
                     std::optional<double> min_magnitude = std::nullopt);

/// Shannon entropy (bits) of the sum-normalized magnitude distribution over
/// the whole spectrogram. Throws on an all-zero input.
double spectral_entropy(const Spectrogram& spec);

/// Pearson correlation of the flattened magnitudes. Requires matching shapes
/// and nonzero variance on both sides.
double correlation(const Spectrogram& a, const Spectrogram& b);

/// CSV: header "time_s" + bin frequencies, then one row per frame.
void write_csv(const std::string& path, const Spectrogram& spec);

}  // namespace ctsense
