// core/src/dsp.cc

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

#include "switchsound/dsp.h"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace switchsound {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 FFT, in place. Window lengths are constrained to powers
// of two, so this covers every case the pipeline produces; the test suite
// cross-checks it against a brute-force DFT.
void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] =
        0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n)));
  }
  return w;
}

Spectrogram stft(const Waveform& w, int window_len, int hop) {
  if (!is_power_of_two(window_len)) {
    throw std::runtime_error("stft: window length must be a power of two");
  }
  if (hop <= 0 || hop > window_len) {
    throw std::runtime_error("stft: hop must satisfy 0 < hop <= window length");
  }
  if (w.sample_rate <= 0.0) throw std::runtime_error("stft: sample rate must be positive");
  const std::size_t n = w.samples.size();
  if (n < static_cast<std::size_t>(window_len)) throw std::runtime_error("clip too short");
  for (double s : w.samples) {
    if (!std::isfinite(s)) throw std::runtime_error("invalid signal");
  }

  const std::vector<double> window = hann_window(window_len);
  const int n_bins = window_len / 2 + 1;
  // One frame per hop start inside the clip; trailing frames zero-padded.
  const int n_frames = static_cast<int>((n + static_cast<std::size_t>(hop) - 1) /
                                        static_cast<std::size_t>(hop));

  Spectrogram out;
  out.magnitudes.resize(n_bins, n_frames);
  out.bin_hz = w.sample_rate / static_cast<double>(window_len);
  out.hop_s = static_cast<double>(hop) / w.sample_rate;
  out.window_len = window_len;

  std::vector<std::complex<double>> buf(static_cast<std::size_t>(window_len));
  for (int t = 0; t < n_frames; ++t) {
    const std::size_t offset = static_cast<std::size_t>(t) * static_cast<std::size_t>(hop);
    for (int i = 0; i < window_len; ++i) {
      const std::size_t idx = offset + static_cast<std::size_t>(i);
      const double x = idx < n ? w.samples[idx] : 0.0;
      buf[static_cast<std::size_t>(i)] = {x * window[static_cast<std::size_t>(i)], 0.0};
    }
    fft_radix2(buf);
    for (int k = 0; k < n_bins; ++k) {
      out.magnitudes(k, t) = std::abs(buf[static_cast<std::size_t>(k)]);
    }
  }
  return out;
}

Spectrogram apply_band_mask(const Spectrogram& s, const BandMask& m) {
  if (m.keep.empty()) throw std::runtime_error("mask removes entire spectrum");
  const double nyquist = s.bin_hz * static_cast<double>(s.n_bins() - 1);
  double prev_hi = -1.0;
  for (const auto& [lo, hi] : m.keep) {
    if (lo > hi || lo < 0.0) throw std::runtime_error("band mask: malformed interval");
    if (lo <= prev_hi) throw std::runtime_error("band mask: intervals must be sorted and disjoint");
    if (hi > nyquist + 0.5 * s.bin_hz) {
      throw std::runtime_error("band mask: interval exceeds spectrogram range");
    }
    prev_hi = hi;
  }

  Spectrogram out = s;
  for (int k = 0; k < s.n_bins(); ++k) {
    const double hz = static_cast<double>(k) * s.bin_hz;
    if (!m.contains(hz)) out.magnitudes.row(k).setZero();
  }
  return out;
}

Eigen::VectorXd frame_power(const Spectrogram& s) {
  return s.magnitudes.colwise().squaredNorm().transpose();
}

}  // namespace switchsound
