// core/src/anomaly.cc

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

#include "switchsound/anomaly.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "switchsound/rng.h"
#include "switchsound/textio.h"
#include "switchsound/version.h"

namespace switchsound {

namespace {

constexpr double kStdFloor = 1e-4;

Eigen::MatrixXd he_uniform(Rng& rng, int rows, int cols) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.uniform(-limit, limit);
  }
  return m;
}

// Column-stacks the 2*context frames around center t of z into dst column c.
void fill_input_column(const Eigen::MatrixXd& z, int t, int context, Eigen::MatrixXd& dst,
                       int c) {
  const int bins = static_cast<int>(z.rows());
  int row = 0;
  for (int off = -context; off <= context; ++off) {
    if (off == 0) continue;
    dst.block(row, c, bins, 1) = z.col(t + off);
    row += bins;
  }
}

struct ForwardCache {
  Eigen::MatrixXd z1, a1, z2, a2, y;
};

void forward(const NormalModel& m, const Eigen::MatrixXd& x, ForwardCache& f) {
  f.z1 = (m.w1 * x).colwise() + m.b1;
  f.a1 = f.z1.cwiseMax(0.0);
  f.z2 = (m.w2 * f.a1).colwise() + m.b2;
  f.a2 = f.z2.cwiseMax(0.0);
  f.y = (m.w3 * f.a2).colwise() + m.b3;
}

}  // namespace

Eigen::MatrixXd log_standardize(const NormalModel& m, const Eigen::MatrixXd& magnitudes) {
  if (magnitudes.rows() != m.norm_mean.size()) {
    throw std::runtime_error("log_standardize: bin count mismatch");
  }
  Eigen::MatrixXd z = (magnitudes.array() + 1.0).log();
  z.colwise() -= m.norm_mean;
  z.array().colwise() /= m.norm_std.array();
  return z;
}

Eigen::MatrixXd model_predict(const NormalModel& m, const Eigen::MatrixXd& inputs) {
  ForwardCache f;
  forward(m, inputs, f);
  return f.y;
}

double model_loss(const NormalModel& m, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets) {
  ForwardCache f;
  forward(m, inputs, f);
  const double n = static_cast<double>(targets.cols());
  return (f.y - targets).squaredNorm() / n;
}

double model_loss_and_gradients(const NormalModel& m, const Eigen::MatrixXd& inputs,
                                const Eigen::MatrixXd& targets, ModelGradients* grads) {
  // Loss is the squared reconstruction error of the center frame, averaged
  // over the batch only; the per-frame error keeps its physical scale.
  ForwardCache f;
  forward(m, inputs, f);
  const double n = static_cast<double>(targets.cols());
  const Eigen::MatrixXd diff = f.y - targets;
  const double loss = diff.squaredNorm() / n;
  if (grads == nullptr) return loss;

  const Eigen::MatrixXd dy = (2.0 / n) * diff;
  grads->w3 = dy * f.a2.transpose();
  grads->b3 = dy.rowwise().sum();
  Eigen::MatrixXd dz2 = (m.w3.transpose() * dy).array() * (f.z2.array() > 0.0).cast<double>();
  grads->w2 = dz2 * f.a1.transpose();
  grads->b2 = dz2.rowwise().sum();
  Eigen::MatrixXd dz1 = (m.w2.transpose() * dz2).array() * (f.z1.array() > 0.0).cast<double>();
  grads->w1 = dz1 * inputs.transpose();
  grads->b1 = dz1.rowwise().sum();
  return loss;
}

NormalModel train_normal_model(const std::vector<SegmentedClip>& clips, SwitchingPhase phase,
                               const NormalModelConfig& cfg, std::uint64_t seed) {
  if (static_cast<int>(clips.size()) < 20) {
    throw std::runtime_error("train_normal_model: insufficient training events (need >= 20)");
  }
  const int context = cfg.context;
  int n_bins = -1;
  for (const SegmentedClip& c : clips) {
    if (c.spec == nullptr || c.seg == nullptr) {
      throw std::runtime_error("train_normal_model: null clip");
    }
    if (n_bins < 0) n_bins = c.spec->n_bins();
    if (c.spec->n_bins() != n_bins) {
      throw std::runtime_error("train_normal_model: clips disagree on bin count");
    }
    if (c.seg->length(phase) < 2 * context + 1) {
      throw std::runtime_error("train_normal_model: phase too short in event");
    }
  }

  // Per-bin normalization statistics over all phase frames.
  NormalModel m;
  m.phase = phase;
  m.context = context;
  {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_bins);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(n_bins);
    long count = 0;
    for (const SegmentedClip& c : clips) {
      const int lo = c.seg->start_frame(phase);
      const int hi = c.seg->end_frame(phase);
      for (int t = lo; t < hi; ++t) {
        const Eigen::VectorXd v = (c.spec->magnitudes.col(t).array() + 1.0).log();
        sum += v;
        sq += v.cwiseProduct(v);
        ++count;
      }
    }
    m.norm_mean = sum / static_cast<double>(count);
    Eigen::VectorXd var =
        (sq / static_cast<double>(count) - m.norm_mean.cwiseProduct(m.norm_mean)).cwiseMax(0.0);
    m.norm_std = var.cwiseSqrt().cwiseMax(kStdFloor);
  }

  // Standardized per-clip frames plus the (clip, center) sample index.
  std::vector<Eigen::MatrixXd> z_clips;
  z_clips.reserve(clips.size());
  std::vector<std::pair<int, int>> samples;
  for (std::size_t ci = 0; ci < clips.size(); ++ci) {
    const SegmentedClip& c = clips[ci];
    const int lo = c.seg->start_frame(phase);
    const int hi = c.seg->end_frame(phase);
    Eigen::MatrixXd z = log_standardize(m, c.spec->magnitudes.middleCols(lo, hi - lo));
    z_clips.push_back(std::move(z));
    for (int t = context; t < hi - lo - context; ++t) {
      samples.push_back({static_cast<int>(ci), t});
    }
  }
  if (samples.empty()) throw std::runtime_error("train_normal_model: no training samples");

  Rng rng(mix_seed(seed, 0x7261696eULL));
  m.w1 = he_uniform(rng, cfg.hidden1, 2 * context * n_bins);
  m.b1 = Eigen::VectorXd::Zero(cfg.hidden1);
  m.w2 = he_uniform(rng, cfg.hidden2, cfg.hidden1);
  m.b2 = Eigen::VectorXd::Zero(cfg.hidden2);
  m.w3 = he_uniform(rng, n_bins, cfg.hidden2);
  m.b3 = Eigen::VectorXd::Zero(n_bins);

  // Seeded split into train and held-out samples.
  rng.shuffle(samples);
  const int n_val = std::max(1, static_cast<int>(std::lround(cfg.val_fraction *
                                                             static_cast<double>(samples.size()))));
  std::vector<std::pair<int, int>> val(samples.end() - n_val, samples.end());
  std::vector<std::pair<int, int>> train(samples.begin(), samples.end() - n_val);
  if (train.empty()) throw std::runtime_error("train_normal_model: no training samples after split");

  const int in_dim = 2 * context * n_bins;
  auto build_batch = [&](const std::vector<std::pair<int, int>>& idx, std::size_t lo,
                         std::size_t hi, Eigen::MatrixXd& x, Eigen::MatrixXd& y) {
    const int bsz = static_cast<int>(hi - lo);
    x.resize(in_dim, bsz);
    y.resize(n_bins, bsz);
    for (int c = 0; c < bsz; ++c) {
      const auto& [ci, t] = idx[lo + static_cast<std::size_t>(c)];
      fill_input_column(z_clips[static_cast<std::size_t>(ci)], t, context, x, c);
      y.col(c) = z_clips[static_cast<std::size_t>(ci)].col(t);
    }
  };

  Eigen::MatrixXd val_x, val_y;
  build_batch(val, 0, val.size(), val_x, val_y);

  NormalModel best = m;
  double best_val = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd x, y;
  ModelGradients g;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(train);
    for (std::size_t lo = 0; lo < train.size(); lo += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t hi = std::min(train.size(), lo + static_cast<std::size_t>(cfg.batch));
      build_batch(train, lo, hi, x, y);
      model_loss_and_gradients(m, x, y, &g);
      m.w1 -= cfg.learning_rate * g.w1;
      m.b1 -= cfg.learning_rate * g.b1;
      m.w2 -= cfg.learning_rate * g.w2;
      m.b2 -= cfg.learning_rate * g.b2;
      m.w3 -= cfg.learning_rate * g.w3;
      m.b3 -= cfg.learning_rate * g.b3;
    }
    const double vloss = model_loss(m, val_x, val_y);
    m.val_loss_history.push_back(vloss);
    if (vloss < best_val) {
      best_val = vloss;
      best = m;
      best.best_epoch = epoch;
    }
  }
  best.val_loss_history = m.val_loss_history;
  return best;
}

double phase_score(const NormalModel& m, const Spectrogram& spec, const PhaseSegmentation& seg) {
  if (spec.n_bins() != m.n_bins()) throw std::runtime_error("phase_score: bin count mismatch");
  const int lo = seg.start_frame(m.phase);
  const int hi = seg.end_frame(m.phase);
  const int context = m.context;
  if (hi - lo < 2 * context + 1) throw std::runtime_error("phase too short for scoring");

  const Eigen::MatrixXd z = log_standardize(m, spec.magnitudes.middleCols(lo, hi - lo));
  const int n_centers = hi - lo - 2 * context;
  Eigen::MatrixXd x(m.input_dim(), n_centers);
  Eigen::MatrixXd y(m.n_bins(), n_centers);
  for (int c = 0; c < n_centers; ++c) {
    fill_input_column(z, c + context, context, x, c);
    y.col(c) = z.col(c + context);
  }
  return model_loss(m, x, y);
}

AnomalyReport score_event(const Spectrogram& spec, const PhaseSegmentation& seg,
                          const std::map<SwitchingPhase, NormalModel>& models,
                          const PhaseMalfunctionMatrix& matrix,
                          const std::vector<MalfunctionKind>& targets,
                          const std::map<MalfunctionKind, double>& target_thresholds,
                          const std::map<SwitchingPhase, double>& phase_thresholds,
                          const std::string& event_id) {
  AnomalyReport report;
  report.event_id = event_id;
  report.phase_thresholds = phase_thresholds;
  report.switching_time_s = seg.duration_s(SwitchingPhase::kMovingRail);

  for (const auto& [phase, model] : models) {
    report.phase_scores[phase] = phase_score(model, spec, seg);
  }

  for (MalfunctionKind target : targets) {
    const std::vector<SwitchingPhase> phases = phases_for_malfunction(target, matrix);
    if (phases.empty()) {
      throw std::runtime_error("score_event: no detecting phases for target " +
                               std::string(malfunction_name(target)));
    }
    double sum = 0.0;
    for (SwitchingPhase p : phases) {
      auto it = report.phase_scores.find(p);
      if (it == report.phase_scores.end()) {
        throw std::runtime_error("missing phase models: " + std::string(phase_name(p)));
      }
      sum += it->second;
    }
    TargetRow row;
    row.target = target;
    row.score = sum / static_cast<double>(phases.size());
    auto thr = target_thresholds.find(target);
    if (thr == target_thresholds.end()) {
      throw std::runtime_error("score_event: no threshold for target " +
                               std::string(malfunction_name(target)));
    }
    row.threshold = thr->second;
    row.anomalous = row.score > row.threshold;
    report.targets.push_back(row);
  }
  return report;
}

double calibrate_threshold(const std::vector<double>& clean_scores, double sigma_mult) {
  const int n = static_cast<int>(clean_scores.size());
  if (n < 10) throw std::runtime_error("insufficient validation scores");
  const double mean =
      std::accumulate(clean_scores.begin(), clean_scores.end(), 0.0) / static_cast<double>(n);
  double sq = 0.0;
  for (double s : clean_scores) sq += (s - mean) * (s - mean);
  const double std_dev = std::sqrt(sq / static_cast<double>(n - 1));
  return mean + sigma_mult * std_dev;
}

namespace {

void write_matrix(std::ostringstream& out, const char* name, const Eigen::MatrixXd& m) {
  out << name << " " << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << " ";
      out << format_double(m(i, j));
    }
    out << "\n";
  }
}

Eigen::MatrixXd read_matrix(std::istringstream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("model file truncated");
  const auto head = split(trim(line), ' ');
  if (head.size() != 3 || head[0] != name) {
    throw std::runtime_error("model file: expected matrix " + name);
  }
  const int rows = std::stoi(head[1]);
  const int cols = std::stoi(head[2]);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("model file truncated");
    const auto values = split(trim(line), ' ');
    if (static_cast<int>(values.size()) != cols) {
      throw std::runtime_error("model file: wrong row length in " + name);
    }
    for (int j = 0; j < cols; ++j) m(i, j) = parse_double(values[static_cast<std::size_t>(j)]);
  }
  return m;
}

}  // namespace

void save_normal_model(const std::filesystem::path& path, const NormalModel& m) {
  std::ostringstream out;
  out << kNormalModelMagic << "\n";
  out << "phase " << phase_name(m.phase) << "\n";
  out << "context " << m.context << "\n";
  out << "n_bins " << m.n_bins() << "\n";
  out << "hidden " << m.w1.rows() << " " << m.w2.rows() << "\n";
  out << "best_epoch " << m.best_epoch << "\n";
  write_matrix(out, "norm_mean", m.norm_mean);
  write_matrix(out, "norm_std", m.norm_std);
  write_matrix(out, "w1", m.w1);
  write_matrix(out, "b1", m.b1);
  write_matrix(out, "w2", m.w2);
  write_matrix(out, "b2", m.b2);
  write_matrix(out, "w3", m.w3);
  write_matrix(out, "b3", m.b3);
  write_text_file(path, out.str());
}

NormalModel load_normal_model(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != kNormalModelMagic) {
    throw std::runtime_error("not a normal-model file (or unsupported version): " + path.string());
  }
  NormalModel m;
  auto read_kv = [&](const std::string& key) {
    if (!std::getline(in, line)) throw std::runtime_error("model file truncated");
    const auto parts = split(trim(line), ' ');
    if (parts.size() < 2 || parts[0] != key) {
      throw std::runtime_error("model file: expected '" + key + "'");
    }
    return std::vector<std::string>(parts.begin() + 1, parts.end());
  };
  const auto phase = parse_phase(read_kv("phase")[0]);
  if (!phase) throw std::runtime_error("model file: unknown phase");
  m.phase = *phase;
  m.context = std::stoi(read_kv("context")[0]);
  (void)read_kv("n_bins");
  (void)read_kv("hidden");
  m.best_epoch = std::stoi(read_kv("best_epoch")[0]);
  m.norm_mean = read_matrix(in, "norm_mean");
  m.norm_std = read_matrix(in, "norm_std");
  m.w1 = read_matrix(in, "w1");
  m.b1 = read_matrix(in, "b1");
  m.w2 = read_matrix(in, "w2");
  m.b2 = read_matrix(in, "b2");
  m.w3 = read_matrix(in, "w3");
  m.b3 = read_matrix(in, "b3");
  return m;
}

}  // namespace switchsound
