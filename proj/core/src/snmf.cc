// core/src/snmf.cc

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

#include "switchsound/snmf.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "switchsound/rng.h"
#include "switchsound/textio.h"
#include "switchsound/version.h"

namespace switchsound {

namespace {

constexpr double kEps = 1e-12;

Eigen::MatrixXd ratio_v_wh(const Eigen::MatrixXd& v, const Eigen::MatrixXd& w,
                           const Eigen::MatrixXd& h) {
  Eigen::MatrixXd wh = w * h;
  return v.array() / (wh.array() + kEps);
}

// One multiplicative KL update of H given fixed W.
void update_h(const Eigen::MatrixXd& v, const Eigen::MatrixXd& w, Eigen::MatrixXd& h) {
  const Eigen::MatrixXd r = ratio_v_wh(v, w, h);
  const Eigen::VectorXd col_sums = w.colwise().sum();
  h = (h.array() * (w.transpose() * r).array()).matrix();
  h.array().colwise() /= (col_sums.array() + kEps);
}

// One multiplicative KL update of the free column block of W.
void update_w_block(const Eigen::MatrixXd& v, Eigen::MatrixXd& w, const Eigen::MatrixXd& h,
                    int first_free_col) {
  const Eigen::MatrixXd r = ratio_v_wh(v, w, h);
  const int k = static_cast<int>(w.cols()) - first_free_col;
  const auto h_free = h.bottomRows(k);
  const Eigen::VectorXd row_sums = h_free.rowwise().sum();
  Eigen::MatrixXd numer = r * h_free.transpose();
  auto w_free = w.rightCols(k);
  w_free = (w_free.array() * numer.array()).matrix();
  w_free.array().rowwise() /= (row_sums.transpose().array() + kEps);
}

Eigen::MatrixXd random_positive(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = 0.1 + rng.uniform();
  }
  return m;
}

}  // namespace

std::string_view source_name(SourceName s) {
  switch (s) {
    case SourceName::kRelay: return "Relay";
    case SourceName::kMotor: return "Motor";
    case SourceName::kLockPiece: return "LockPiece";
    case SourceName::kRod: return "Rod";
    case SourceName::kBackground: return "Background";
  }
  return "?";
}

std::optional<SourceName> parse_source(std::string_view name) {
  for (SourceName s : kAllSources) {
    if (source_name(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<SourceName> BasisDictionary::sources() const {
  std::vector<SourceName> out;
  for (SourceName s : kAllSources) {
    if (has_source(s)) out.push_back(s);
  }
  return out;
}

bool BasisDictionary::has_source(SourceName s) const {
  return std::find(component_owner.begin(), component_owner.end(), s) != component_owner.end();
}

double kl_divergence(const Eigen::MatrixXd& v, const Eigen::MatrixXd& wh) {
  double d = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double x = v(i, j);
      const double y = wh(i, j);
      d += y - x;
      if (x > 0.0) d += x * std::log(x / std::max(y, kEps));
    }
  }
  return d;
}

BasisDictionary fit_bases(const std::map<std::string, Spectrogram>& spectrograms,
                          const std::vector<SourceLabel>& labels, const FitOptions& opts,
                          NmfTrace* trace) {
  if (labels.empty()) throw std::runtime_error("unlabeled source");
  if (opts.iters < 1) throw std::runtime_error("fit_bases: iters must be >= 1");
  if (opts.n_per_source < 1) throw std::runtime_error("fit_bases: n_per_source must be >= 1");

  int n_bins = -1;
  double bin_hz = 0.0;
  for (const auto& [id, spec] : spectrograms) {
    if (n_bins < 0) {
      n_bins = spec.n_bins();
      bin_hz = spec.bin_hz;
    } else if (spec.n_bins() != n_bins) {
      throw std::runtime_error("fit_bases: spectrograms disagree on bin count");
    }
  }
  if (n_bins <= 0) throw std::runtime_error("fit_bases: no spectrograms given");

  // Gather each source's labeled frames, in enum order.
  std::vector<std::pair<SourceName, Eigen::MatrixXd>> per_source;
  for (SourceName s : kAllSources) {
    const SourceLabel* label = nullptr;
    for (const SourceLabel& l : labels) {
      if (l.name != s) continue;
      if (label != nullptr) {
        throw std::runtime_error("fit_bases: duplicate label for source " +
                                 std::string(source_name(s)));
      }
      label = &l;
    }
    if (label == nullptr) continue;

    std::vector<std::pair<const Spectrogram*, std::pair<int, int>>> ranges;
    long total = 0;
    for (const LabelSegment& seg : label->segments) {
      auto it = spectrograms.find(seg.event_id);
      if (it == spectrograms.end()) {
        throw std::runtime_error("fit_bases: unknown event id in labels: " + seg.event_id);
      }
      const int lo = std::max(0, seg.start_frame);
      const int hi = std::min(it->second.n_frames(), seg.end_frame);
      if (hi > lo) {
        ranges.push_back({&it->second, {lo, hi}});
        total += hi - lo;
      }
    }
    if (total == 0) throw std::runtime_error("unlabeled source");
    if (total < opts.n_per_source) {
      throw std::runtime_error("fit_bases: insufficient labeled frames for source " +
                               std::string(source_name(s)));
    }

    const long stride = std::max<long>(1, (total + opts.max_frames_per_source - 1) /
                                              opts.max_frames_per_source);
    Eigen::MatrixXd frames(n_bins, (total + stride - 1) / stride);
    long seen = 0;
    int col = 0;
    for (const auto& [spec, range] : ranges) {
      for (int t = range.first; t < range.second; ++t, ++seen) {
        if (seen % stride != 0) continue;
        frames.col(col++) = spec->magnitudes.col(t);
      }
    }
    frames.conservativeResize(n_bins, col);
    if (!frames.allFinite()) throw std::runtime_error("invalid spectrogram");
    per_source.push_back({s, std::move(frames)});
  }

  // Sequential semi-supervised fitting: already-learned blocks stay fixed and
  // absorb what they explain, new columns model the residual content.
  Eigen::MatrixXd learned(n_bins, 0);
  std::vector<SourceName> owners;
  int source_idx = 0;
  for (auto& [s, v] : per_source) {
    const int k = opts.n_per_source;
    const int n_fixed = static_cast<int>(learned.cols());
    Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(source_idx)));

    Eigen::MatrixXd w(n_bins, n_fixed + k);
    if (n_fixed > 0) w.leftCols(n_fixed) = learned;
    w.rightCols(k) = random_positive(rng, n_bins, k);
    Eigen::MatrixXd h = random_positive(rng, n_fixed + k, static_cast<int>(v.cols()));

    std::vector<double> objectives;
    objectives.reserve(static_cast<std::size_t>(opts.iters));
    for (int it = 0; it < opts.iters; ++it) {
      update_h(v, w, h);
      update_w_block(v, w, h, n_fixed);
      objectives.push_back(kl_divergence(v, w * h));
    }
    if (trace != nullptr) trace->fit_objectives.push_back({s, objectives});

    Eigen::MatrixXd block = w.rightCols(k);
    for (int j = 0; j < k; ++j) {
      const double norm = block.col(j).norm();
      if (norm > kEps) {
        block.col(j) /= norm;
      } else {
        block.col(j).setConstant(1.0 / std::sqrt(static_cast<double>(n_bins)));
      }
    }
    learned.conservativeResize(n_bins, n_fixed + k);
    learned.rightCols(k) = block;
    for (int j = 0; j < k; ++j) owners.push_back(s);
    ++source_idx;
  }

  BasisDictionary d;
  d.bases = std::move(learned);
  d.component_owner = std::move(owners);
  d.n_per_source = opts.n_per_source;
  d.bin_hz = bin_hz;
  return d;
}

ActivationMatrix estimate_activations(const Spectrogram& s, const BasisDictionary& d, int iters,
                                      NmfTrace* trace) {
  if (s.n_bins() != d.n_bins()) throw std::runtime_error("dictionary/spectrogram mismatch");
  if (iters < 1) throw std::runtime_error("estimate_activations: iters must be >= 1");
  if (!s.magnitudes.allFinite()) throw std::runtime_error("invalid spectrogram");

  const Eigen::MatrixXd& v = s.magnitudes;
  Eigen::MatrixXd h = Eigen::MatrixXd::Ones(d.n_components(), s.n_frames());
  for (int it = 0; it < iters; ++it) {
    update_h(v, d.bases, h);
    if (trace != nullptr) trace->objectives.push_back(kl_divergence(v, d.bases * h));
  }

  ActivationMatrix a;
  a.activations = std::move(h);
  a.hop_s = s.hop_s;
  return a;
}

Eigen::VectorXd source_activation(const ActivationMatrix& a, const BasisDictionary& d,
                                  SourceName source) {
  if (static_cast<int>(d.component_owner.size()) != a.n_components()) {
    throw std::runtime_error("source_activation: dictionary/activation shape mismatch");
  }
  if (!d.has_source(source)) {
    throw std::runtime_error("unknown source: " + std::string(source_name(source)));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.n_frames());
  for (int c = 0; c < a.n_components(); ++c) {
    if (d.component_owner[static_cast<std::size_t>(c)] == source) {
      out += a.activations.row(c).transpose();
    }
  }
  return out;
}

void save_dictionary(const std::filesystem::path& path, const BasisDictionary& d) {
  std::ostringstream out;
  out << kDictionaryMagic << "\n";
  out << "n_bins " << d.n_bins() << "\n";
  out << "bin_hz " << format_double(d.bin_hz) << "\n";
  out << "n_per_source " << d.n_per_source << "\n";
  out << "n_components " << d.n_components() << "\n";
  for (int c = 0; c < d.n_components(); ++c) {
    out << "component " << c << " " << source_name(d.component_owner[static_cast<std::size_t>(c)])
        << "\n";
    for (int i = 0; i < d.n_bins(); ++i) {
      if (i > 0) out << " ";
      out << format_double(d.bases(i, c));
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

BasisDictionary load_dictionary(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != kDictionaryMagic) {
    throw std::runtime_error("not a dictionary file (or unsupported version): " + path.string());
  }
  auto read_kv = [&](const std::string& key) {
    if (!std::getline(in, line)) throw std::runtime_error("dictionary file truncated");
    const auto parts = split(trim(line), ' ');
    if (parts.size() != 2 || parts[0] != key) {
      throw std::runtime_error("dictionary file: expected '" + key + "'");
    }
    return parts[1];
  };

  BasisDictionary d;
  const int n_bins = std::stoi(read_kv("n_bins"));
  d.bin_hz = parse_double(read_kv("bin_hz"));
  d.n_per_source = std::stoi(read_kv("n_per_source"));
  const int n_components = std::stoi(read_kv("n_components"));
  d.bases.resize(n_bins, n_components);
  d.component_owner.resize(static_cast<std::size_t>(n_components));

  for (int c = 0; c < n_components; ++c) {
    if (!std::getline(in, line)) throw std::runtime_error("dictionary file truncated");
    const auto head = split(trim(line), ' ');
    if (head.size() != 3 || head[0] != "component" || std::stoi(head[1]) != c) {
      throw std::runtime_error("dictionary file: malformed component header");
    }
    const auto src = parse_source(head[2]);
    if (!src) throw std::runtime_error("dictionary file: unknown source " + head[2]);
    d.component_owner[static_cast<std::size_t>(c)] = *src;
    if (!std::getline(in, line)) throw std::runtime_error("dictionary file truncated");
    const auto values = split(trim(line), ' ');
    if (static_cast<int>(values.size()) != n_bins) {
      throw std::runtime_error("dictionary file: wrong number of basis values");
    }
    for (int i = 0; i < n_bins; ++i) d.bases(i, c) = parse_double(values[static_cast<std::size_t>(i)]);
  }
  return d;
}

}  // namespace switchsound
