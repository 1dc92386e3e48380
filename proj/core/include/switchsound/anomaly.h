// switchsound/anomaly.h

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

#ifndef SWITCHSOUND_ANOMALY_H_
#define SWITCHSOUND_ANOMALY_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "switchsound/dsp.h"
#include "switchsound/phase.h"

namespace switchsound {

struct NormalModelConfig {
  int context = 2;          // frames on each side of the masked center
  int hidden1 = 64;
  int hidden2 = 64;
  int epochs = 30;
  double learning_rate = 1e-3;
  int batch = 32;
  double val_fraction = 0.2;  // held-out sample fraction for epoch tracking
};

// Per-phase normal model: a feed-forward interpolation network that predicts
// an excluded center frame from its surrounding frames. Inputs are
// log(1 + magnitude) frames standardized per bin; the anomaly score of a
// frame is the mean squared reconstruction error of its prediction.
struct NormalModel {
  SwitchingPhase phase = SwitchingPhase::kMovingRail;
  int context = 2;
  Eigen::VectorXd norm_mean;  // per bin, log1p domain
  Eigen::VectorXd norm_std;   // per bin, floored at 1e-4
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;
  std::vector<double> val_loss_history;  // one entry per epoch
  int best_epoch = 0;                    // epoch whose parameters were kept

  int n_bins() const { return static_cast<int>(norm_mean.size()); }
  int input_dim() const { return 2 * context * n_bins(); }
};

struct SegmentedClip {
  const Spectrogram* spec = nullptr;
  const PhaseSegmentation* seg = nullptr;
};

// Trains by plain minibatch gradient descent on the masked-center-frame MSE,
// deterministic given the seed. Parameters from the epoch with the lowest
// held-out loss are kept. Requires >= 20 clips containing the phase and a
// phase length of at least 2*context + 1 frames in each.
NormalModel train_normal_model(const std::vector<SegmentedClip>& clips, SwitchingPhase phase,
                               const NormalModelConfig& cfg, std::uint64_t seed);

// log1p + per-bin standardization with the model's statistics.
Eigen::MatrixXd log_standardize(const NormalModel& m, const Eigen::MatrixXd& magnitudes);

// Forward pass on column-stacked inputs.
Eigen::MatrixXd model_predict(const NormalModel& m, const Eigen::MatrixXd& inputs);

// Mean over samples and bins of the squared prediction error.
double model_loss(const NormalModel& m, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets);

struct ModelGradients {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;
};

// Analytic gradients of model_loss; the tests verify them against central
// finite differences.
double model_loss_and_gradients(const NormalModel& m, const Eigen::MatrixXd& inputs,
                                const Eigen::MatrixXd& targets, ModelGradients* grads);

// Mean center-frame reconstruction error over one phase of one event.
double phase_score(const NormalModel& m, const Spectrogram& spec, const PhaseSegmentation& seg);

struct TargetRow {
  MalfunctionKind target = MalfunctionKind::kGreaseInsideDev;
  double score = 0.0;
  double threshold = 0.0;
  bool anomalous = false;
};

struct AnomalyReport {
  std::string event_id;
  std::map<SwitchingPhase, double> phase_scores;
  std::map<SwitchingPhase, double> phase_thresholds;
  std::vector<TargetRow> targets;
  double switching_time_s = 0.0;  // decoded MovingRail duration
};

// Scores every modeled phase, then aggregates each requested malfunction
// target as the unweighted mean over its detecting phases. A target's
// verdict is Anomalous iff its score exceeds its threshold.
AnomalyReport score_event(const Spectrogram& spec, const PhaseSegmentation& seg,
                          const std::map<SwitchingPhase, NormalModel>& models,
                          const PhaseMalfunctionMatrix& matrix,
                          const std::vector<MalfunctionKind>& targets,
                          const std::map<MalfunctionKind, double>& target_thresholds,
                          const std::map<SwitchingPhase, double>& phase_thresholds,
                          const std::string& event_id);

// threshold = mean + sigma_mult * sample standard deviation of clean scores.
// Requires at least 10 scores.
double calibrate_threshold(const std::vector<double>& clean_scores, double sigma_mult = 3.0);

void save_normal_model(const std::filesystem::path& path, const NormalModel& m);
NormalModel load_normal_model(const std::filesystem::path& path);

}  // namespace switchsound

#endif  // SWITCHSOUND_ANOMALY_H_
