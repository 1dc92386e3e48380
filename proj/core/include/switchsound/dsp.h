// switchsound/dsp.h

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SWITCHSOUND_DSP_H_
#define SWITCHSOUND_DSP_H_

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace switchsound {

// One recorded switching event. Samples are dimensionless amplitudes,
// nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  double sample_rate = 0.0;  // Hz
  std::string event_id;
  std::optional<std::string> captured_at;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Magnitude time-frequency matrix; the substrate every other module works on.
// All entries are >= 0 and n_bins == window_len / 2 + 1.
struct Spectrogram {
  Eigen::MatrixXd magnitudes;  // n_bins x n_frames
  double bin_hz = 0.0;         // Hz per bin
  double hop_s = 0.0;          // seconds per frame hop
  int window_len = 0;          // analysis window, samples

  int n_bins() const { return static_cast<int>(magnitudes.rows()); }
  int n_frames() const { return static_cast<int>(magnitudes.cols()); }
};

// Frequency intervals to keep; everything else is zeroed by apply_band_mask.
// Intervals must be sorted, non-overlapping and within [0, Nyquist].
struct BandMask {
  std::vector<std::pair<double, double>> keep;  // (low_hz, high_hz), closed

  bool contains(double hz) const {
    for (const auto& [lo, hi] : keep) {
      if (hz >= lo && hz <= hi) return true;
    }
    return false;
  }
};

// Magnitude STFT with a periodic Hann window. Frame t covers samples
// [t*hop, t*hop + window_len); the trailing partial frames are zero-padded so
// content near the clip end stays observable. window_len must be a power of
// two and 0 < hop <= window_len.
//
// Throws "clip too short" when the clip holds less than one window and
// "invalid signal" on non-finite samples.
Spectrogram stft(const Waveform& w, int window_len, int hop);

// Zeroes every bin whose center frequency lies outside all keep intervals.
// Kept bins are copied verbatim; the shape is preserved. Idempotent.
Spectrogram apply_band_mask(const Spectrogram& s, const BandMask& m);

// power[t] = sum_f magnitudes(f, t)^2.
Eigen::VectorXd frame_power(const Spectrogram& s);

// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

}  // namespace switchsound

#endif  // SWITCHSOUND_DSP_H_
