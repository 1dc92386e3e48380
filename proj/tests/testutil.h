// tests/testutil.h

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

// Independent oracles for the test suites. These deliberately avoid the
// library's own FFT, divergence and statistics code paths.

#ifndef SWITCHSOUND_TESTS_TESTUTIL_H_
#define SWITCHSOUND_TESTS_TESTUTIL_H_

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace testutil {

// Brute-force DFT magnitudes of one frame (O(n^2) reference).
inline std::vector<double> naive_dft_magnitudes(const std::vector<double>& frame) {
  const std::size_t n = frame.size();
  std::vector<double> mags(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double ang = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(i) /
                         static_cast<double>(n);
      acc += frame[i] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    mags[k] = std::abs(acc);
  }
  return mags;
}

// Reference periodic Hann, written independently of the library.
inline std::vector<double> reference_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::sin(M_PI * static_cast<double>(i) / static_cast<double>(n));
    w[i] = w[i] * w[i];
  }
  return w;
}

// Generalized KL divergence recomputed with a plain double loop.
inline double reference_kl(const Eigen::MatrixXd& v, const Eigen::MatrixXd& wh) {
  double d = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double x = v(i, j), y = wh(i, j);
      d += y - x;
      if (x > 0.0) d += x * std::log(x / std::max(y, 1e-12));
    }
  }
  return d;
}

// Summation oracle: total energy of bins whose center frequency falls in
// [lo_hz, hi_hz], over all frames.
inline double band_energy(const Eigen::MatrixXd& mags, double bin_hz, double lo_hz,
                          double hi_hz) {
  double e = 0.0;
  for (Eigen::Index k = 0; k < mags.rows(); ++k) {
    const double hz = static_cast<double>(k) * bin_hz;
    if (hz < lo_hz || hz > hi_hz) continue;
    e += mags.row(k).array().square().sum();
  }
  return e;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  if (da <= 0.0 || db <= 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

// Spearman rank correlation with average ranks for ties.
inline std::vector<double> ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(ranks(a), ranks(b));
}

// Unique scratch directory under the system temp dir, cleaned by the caller.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("switchsound_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil

#endif  // SWITCHSOUND_TESTS_TESTUTIL_H_
