// core/src/denoise.cc

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

#include "switchsound/denoise.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "switchsound/textio.h"
#include "switchsound/version.h"

namespace switchsound {

namespace {

std::vector<double> band_edges(const FeatureConfig& cfg) {
  std::vector<double> edges(static_cast<std::size_t>(cfg.n_bands) + 1);
  const double ratio = cfg.band_high_hz / cfg.band_low_hz;
  for (int i = 0; i <= cfg.n_bands; ++i) {
    edges[static_cast<std::size_t>(i)] =
        cfg.band_low_hz * std::pow(ratio, static_cast<double>(i) / cfg.n_bands);
  }
  return edges;
}

}  // namespace

ClipFeatures extract_clip_features(const Spectrogram& s, const FeatureConfig& cfg) {
  if (s.n_bins() == 0 || s.n_frames() == 0) throw std::runtime_error("silent clip");
  const Eigen::MatrixXd& m = s.magnitudes;
  if (!m.allFinite()) throw std::runtime_error("invalid spectrogram");
  if ((m.array() > 0.0).count() == 0) throw std::runtime_error("silent clip");

  const std::vector<double> edges = band_edges(cfg);
  Eigen::VectorXd band_energy = Eigen::VectorXd::Zero(cfg.n_bands);
  for (int k = 0; k < s.n_bins(); ++k) {
    const double hz = static_cast<double>(k) * s.bin_hz;
    int band = -1;
    for (int b = 0; b < cfg.n_bands; ++b) {
      if (hz >= edges[static_cast<std::size_t>(b)] && hz < edges[static_cast<std::size_t>(b) + 1]) {
        band = b;
        break;
      }
    }
    if (band < 0) continue;
    band_energy(band) += m.row(k).array().square().sum();
  }
  const double total = band_energy.sum();
  if (total <= 0.0) throw std::runtime_error("silent clip");

  // Power-spectrum centroid statistics over frames with nonzero energy,
  // weighted by frame energy so near-empty (zero-padded) tail frames cannot
  // dominate the variance.
  double c_sum = 0.0, c_sq_sum = 0.0, w_sum = 0.0;
  Eigen::VectorXd freqs(s.n_bins());
  for (int k = 0; k < s.n_bins(); ++k) freqs(k) = static_cast<double>(k) * s.bin_hz;
  for (int t = 0; t < s.n_frames(); ++t) {
    const Eigen::ArrayXd power = m.col(t).array().square();
    const double energy = power.sum();
    if (energy <= 0.0) continue;
    const double c = (power * freqs.array()).sum() / energy;
    c_sum += energy * c;
    c_sq_sum += energy * c * c;
    w_sum += energy;
  }
  const double c_mean = c_sum / w_sum;
  const double c_var = std::max(0.0, c_sq_sum / w_sum - c_mean * c_mean);

  ClipFeatures f;
  f.values.resize(ClipFeatures::kDim);
  for (int b = 0; b < cfg.n_bands; ++b) f.values(b) = band_energy(b) / total;
  f.values(8) = c_mean;
  f.values(9) = c_var;
  f.values(10) = static_cast<double>(s.n_frames()) * s.hop_s;
  return f;
}

CleanlinessModel fit_cleanliness(const std::vector<ClipFeatures>& clean, double quantile) {
  const int n = static_cast<int>(clean.size());
  if (n < 10) throw std::runtime_error("insufficient training data");
  if (quantile <= 0.0 || quantile >= 1.0) {
    throw std::runtime_error("fit_cleanliness: quantile must be in (0, 1)");
  }
  const int dim = ClipFeatures::kDim;

  CleanlinessModel model;
  model.quantile = quantile;
  model.mean = Eigen::VectorXd::Zero(dim);
  for (const ClipFeatures& f : clean) model.mean += f.values;
  model.mean /= n;

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const ClipFeatures& f : clean) {
    const Eigen::VectorXd d = f.values - model.mean;
    cov += d * d.transpose();
  }
  cov /= n;
  // Band ratios sum to one, so the raw covariance is rank deficient; the
  // ridge keeps it invertible. A stronger ridge compensates when there are
  // fewer clips than dimensions.
  const double ridge = n < dim ? 1e-3 : 1e-6;
  cov += ridge * Eigen::MatrixXd::Identity(dim, dim);
  model.covariance = cov;

  std::vector<double> dists;
  dists.reserve(clean.size());
  for (const ClipFeatures& f : clean) dists.push_back(mahalanobis_distance(model, f));
  std::sort(dists.begin(), dists.end());
  const int idx = static_cast<int>(std::ceil(quantile * n)) - 1;
  model.threshold = dists[static_cast<std::size_t>(std::clamp(idx, 0, n - 1))];
  return model;
}

double mahalanobis_distance(const CleanlinessModel& m, const ClipFeatures& f) {
  const Eigen::VectorXd d = f.values - m.mean;
  const Eigen::VectorXd sol = m.covariance.ldlt().solve(d);
  return std::sqrt(std::max(0.0, d.dot(sol)));
}

std::string_view screening_verdict_name(ScreeningVerdict v) {
  return v == ScreeningVerdict::kClean ? "Clean" : "Contaminated";
}

ScreeningResult screen_event(const Spectrogram& s, const CleanlinessModel& m) {
  const ClipFeatures f = extract_clip_features(s, m.feature_config);
  ScreeningResult r;
  r.distance = mahalanobis_distance(m, f);
  r.verdict = r.distance > m.threshold ? ScreeningVerdict::kContaminated : ScreeningVerdict::kClean;
  return r;
}

std::string_view persistence_verdict_name(PersistenceVerdict v) {
  switch (v) {
    case PersistenceVerdict::kNormal: return "Normal";
    case PersistenceVerdict::kTransientDisturbance: return "TransientDisturbance";
    case PersistenceVerdict::kPersistentAnomaly: return "PersistentAnomaly";
  }
  return "?";
}

std::map<SwitchingPhase, PersistenceVerdict> persistence_check(
    const std::vector<ScoredEvent>& events, const std::map<SwitchingPhase, double>& thresholds,
    int k) {
  if (k < 2) throw std::runtime_error("persistence_check: k must be >= 2");
  if (static_cast<int>(events.size()) < k) {
    throw std::runtime_error("persistence_check: need at least k scored events");
  }
  for (const ScoredEvent& e : events) {
    if (e.phase_scores.size() != events.front().phase_scores.size()) {
      throw std::runtime_error("persistence_check: events with mismatched phase counts");
    }
  }

  std::map<SwitchingPhase, PersistenceVerdict> out;
  for (const auto& [phase, threshold] : thresholds) {
    int run = 0, best_run = 0, exceed_count = 0;
    for (const ScoredEvent& e : events) {
      auto it = e.phase_scores.find(phase);
      if (it == e.phase_scores.end()) {
        throw std::runtime_error("persistence_check: event " + e.event_id +
                                 " missing score for phase " + std::string(phase_name(phase)));
      }
      if (it->second > threshold) {
        ++exceed_count;
        ++run;
        best_run = std::max(best_run, run);
      } else {
        run = 0;
      }
    }
    PersistenceVerdict v = PersistenceVerdict::kNormal;
    if (best_run >= k) {
      v = PersistenceVerdict::kPersistentAnomaly;
    } else if (exceed_count > 0) {
      v = PersistenceVerdict::kTransientDisturbance;
    }
    out[phase] = v;
  }
  return out;
}

void save_cleanliness(const std::filesystem::path& path, const CleanlinessModel& m) {
  std::ostringstream out;
  const int dim = static_cast<int>(m.mean.size());
  out << kCleanlinessMagic << "\n";
  out << "dim " << dim << "\n";
  out << "quantile " << format_double(m.quantile) << "\n";
  out << "threshold " << format_double(m.threshold) << "\n";
  out << "n_bands " << m.feature_config.n_bands << "\n";
  out << "band_low_hz " << format_double(m.feature_config.band_low_hz) << "\n";
  out << "band_high_hz " << format_double(m.feature_config.band_high_hz) << "\n";
  out << "mean";
  for (int i = 0; i < dim; ++i) out << " " << format_double(m.mean(i));
  out << "\n";
  for (int i = 0; i < dim; ++i) {
    out << "cov";
    for (int j = 0; j < dim; ++j) out << " " << format_double(m.covariance(i, j));
    out << "\n";
  }
  write_text_file(path, out.str());
}

CleanlinessModel load_cleanliness(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCleanlinessMagic) {
    throw std::runtime_error("not a cleanliness file (or unsupported version): " + path.string());
  }
  auto read_kv = [&](const std::string& key) {
    if (!std::getline(in, line)) throw std::runtime_error("cleanliness file truncated");
    const auto parts = split(trim(line), ' ');
    if (parts.size() != 2 || parts[0] != key) {
      throw std::runtime_error("cleanliness file: expected '" + key + "'");
    }
    return parts[1];
  };

  CleanlinessModel m;
  const int dim = std::stoi(read_kv("dim"));
  m.quantile = parse_double(read_kv("quantile"));
  m.threshold = parse_double(read_kv("threshold"));
  m.feature_config.n_bands = std::stoi(read_kv("n_bands"));
  m.feature_config.band_low_hz = parse_double(read_kv("band_low_hz"));
  m.feature_config.band_high_hz = parse_double(read_kv("band_high_hz"));

  if (!std::getline(in, line)) throw std::runtime_error("cleanliness file truncated");
  auto mean_parts = split(trim(line), ' ');
  if (mean_parts.size() != static_cast<std::size_t>(dim) + 1 || mean_parts[0] != "mean") {
    throw std::runtime_error("cleanliness file: malformed mean");
  }
  m.mean.resize(dim);
  for (int i = 0; i < dim; ++i) m.mean(i) = parse_double(mean_parts[static_cast<std::size_t>(i) + 1]);

  m.covariance.resize(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("cleanliness file truncated");
    auto row = split(trim(line), ' ');
    if (row.size() != static_cast<std::size_t>(dim) + 1 || row[0] != "cov") {
      throw std::runtime_error("cleanliness file: malformed covariance row");
    }
    for (int j = 0; j < dim; ++j) {
      m.covariance(i, j) = parse_double(row[static_cast<std::size_t>(j) + 1]);
    }
  }
  return m;
}

}  // namespace switchsound
