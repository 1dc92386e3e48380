// tests/test_anomaly.cc

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

#include <doctest.h>

#include "gradcheck.h"
#include "switchsound/rng.h"
#include "switchsound/synth.h"
#include "testutil.h"

using namespace switchsound;
using gradcheck::max_gradient_rel_error;
using gradcheck::random_matrix;
using gradcheck::tiny_model;

TEST_SUITE("anomaly") {

TEST_CASE("analytic gradients match central finite differences on a 5-sample batch") {
  const int n_bins = 10, hidden = 16, context = 2;
  NormalModel m = tiny_model(n_bins, hidden, context, 12345);
  const Eigen::MatrixXd x = random_matrix(2 * context * n_bins, 5, 777);
  const Eigen::MatrixXd y = random_matrix(n_bins, 5, 778);

  CHECK(max_gradient_rel_error(m, x, y) < 1e-4);

  // One epoch of SGD on the same data, then the check must still hold.
  ModelGradients g;
  for (int step = 0; step < 8; ++step) {
    model_loss_and_gradients(m, x, y, &g);
    m.w1 -= 1e-3 * g.w1;
    m.b1 -= 1e-3 * g.b1;
    m.w2 -= 1e-3 * g.w2;
    m.b2 -= 1e-3 * g.b2;
    m.w3 -= 1e-3 * g.w3;
    m.b3 -= 1e-3 * g.b3;
  }
  CHECK(max_gradient_rel_error(m, x, y) < 1e-4);
}

TEST_CASE("training on identical frames drives the loss to zero") {
  // Every frame of every clip is the same spectrum: after per-bin
  // standardization the targets are exactly zero, so the network only has to
  // learn a constant.
  Rng rng(4);
  Eigen::VectorXd v(24);
  for (int i = 0; i < v.size(); ++i) v(i) = 0.2 + rng.uniform();

  Spectrogram spec;
  spec.magnitudes = v.replicate(1, 21);
  spec.bin_hz = 10.0;
  spec.hop_s = 0.032;
  spec.window_len = 46;

  PhaseSegmentation seg;
  seg.boundaries = {0, 2, 4, 6, 16, 18, 19, 21};
  seg.hop_s = 0.032;

  std::vector<SegmentedClip> clips(20, SegmentedClip{&spec, &seg});
  NormalModelConfig cfg;
  cfg.hidden1 = 8;
  cfg.hidden2 = 8;
  cfg.epochs = 1200;  // plain SGD at the fixed rate needs the steps
  const NormalModel m = train_normal_model(clips, SwitchingPhase::kMovingRail, cfg, 11);

  CHECK(m.val_loss_history.back() < 1e-6);
  CHECK(phase_score(m, spec, seg) < 1e-6);
}

TEST_CASE("training is bitwise deterministic given seed and data") {
  Rng rng(6);
  Eigen::MatrixXd mags(16, 30);
  for (int j = 0; j < 30; ++j) {
    for (int i = 0; i < 16; ++i) mags(i, j) = 0.1 + rng.uniform();
  }
  Spectrogram spec;
  spec.magnitudes = mags;
  spec.bin_hz = 10.0;
  spec.hop_s = 0.032;
  spec.window_len = 30;
  PhaseSegmentation seg;
  seg.boundaries = {0, 3, 6, 9, 24, 27, 28, 30};
  seg.hop_s = 0.032;
  std::vector<SegmentedClip> clips(22, SegmentedClip{&spec, &seg});

  NormalModelConfig cfg;
  cfg.hidden1 = 8;
  cfg.hidden2 = 8;
  cfg.epochs = 5;
  const NormalModel a = train_normal_model(clips, SwitchingPhase::kMovingRail, cfg, 33);
  const NormalModel b = train_normal_model(clips, SwitchingPhase::kMovingRail, cfg, 33);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  CHECK(a.w3 == b.w3);
  CHECK(a.b1 == b.b1);
  CHECK(a.b2 == b.b2);
  CHECK(a.b3 == b.b3);
  CHECK(a.val_loss_history == b.val_loss_history);
}

TEST_CASE("held-out loss on synthetic MovingRail frames beats the variance baseline") {
  // Ground-truth segmented events; the interpolation network must explain
  // most of the standardized center-frame variance.
  std::vector<Spectrogram> specs;
  std::vector<PhaseSegmentation> segs;
  const BandMask mask{{{50.0, 6000.0}}};
  for (int i = 0; i < 24; ++i) {
    auto [w, gt] = generate_event(DegradationProfile{}, DisturbanceSpec{},
                                  5000 + static_cast<std::uint64_t>(i));
    Spectrogram spec = apply_band_mask(stft(w, 1024, 512), mask);
    PhaseSegmentation seg;
    seg.hop_s = spec.hop_s;
    seg.boundaries = gt_frame_boundaries(gt, spec.hop_s, spec.n_frames());
    specs.push_back(std::move(spec));
    segs.push_back(seg);
  }
  std::vector<SegmentedClip> clips;
  for (std::size_t i = 0; i < specs.size(); ++i) clips.push_back({&specs[i], &segs[i]});

  NormalModelConfig cfg;  // library defaults
  const NormalModel m = train_normal_model(clips, SwitchingPhase::kMovingRail, cfg, 99);

  // Validation loss decreased from the first epoch to the best epoch.
  REQUIRE_FALSE(m.val_loss_history.empty());
  const double first = m.val_loss_history.front();
  const double best =
      *std::min_element(m.val_loss_history.begin(), m.val_loss_history.end());
  CHECK(best < first);

  // Oracle: total variance of the standardized center frames (sum of per-bin
  // variances), the loss a mean-predicting model would incur.
  const int n_bins = m.n_bins();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_bins);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(n_bins);
  long count = 0;
  for (const SegmentedClip& c : clips) {
    const Eigen::MatrixXd z = log_standardize(m, c.spec->magnitudes);
    const int lo = c.seg->start_frame(SwitchingPhase::kMovingRail) + cfg.context;
    const int hi = c.seg->end_frame(SwitchingPhase::kMovingRail) - cfg.context;
    for (int t = lo; t < hi; ++t) {
      sum += z.col(t);
      sq += z.col(t).cwiseProduct(z.col(t));
      ++count;
    }
  }
  const Eigen::VectorXd mean = sum / static_cast<double>(count);
  const double total_variance =
      (sq / static_cast<double>(count) - mean.cwiseProduct(mean)).sum();
  CHECK(best < 0.1 * total_variance);
}

TEST_CASE("threshold calibration uses mean plus sigma times sample deviation") {
  CHECK(calibrate_threshold(std::vector<double>(12, 3.25), 3.0) == doctest::Approx(3.25));

  const std::vector<double> scores = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  // Hand-computed: mean 5.5, sample std sqrt(82.5/9).
  CHECK(calibrate_threshold(scores, 3.0) == doctest::Approx(14.582951062292475).epsilon(1e-12));
  const double by_hand = 5.5 + 3.0 * std::sqrt(82.5 / 9.0);
  CHECK(calibrate_threshold(scores, 3.0) == doctest::Approx(by_hand).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(calibrate_threshold({1, 2, 3}, 3.0), "insufficient validation scores",
                       std::runtime_error);
}

TEST_CASE("scoring is deterministic and self-consistent") {
  Rng rng(8);
  Eigen::MatrixXd mags(12, 40);
  for (int j = 0; j < 40; ++j) {
    for (int i = 0; i < 12; ++i) mags(i, j) = 0.1 + rng.uniform();
  }
  Spectrogram spec;
  spec.magnitudes = mags;
  spec.bin_hz = 10.0;
  spec.hop_s = 0.032;
  spec.window_len = 22;
  PhaseSegmentation seg;
  seg.boundaries = {0, 5, 10, 15, 25, 30, 35, 40};
  seg.hop_s = 0.032;

  NormalModel m = tiny_model(12, 8, 2, 99);
  m.phase = SwitchingPhase::kMovingRail;
  const double s1 = phase_score(m, spec, seg);
  const double s2 = phase_score(m, spec, seg);
  CHECK(s1 == s2);

  NormalModel deact = tiny_model(12, 8, 2, 100);
  deact.phase = SwitchingPhase::kDeactivateSafety;
  NormalModel act = tiny_model(12, 8, 2, 101);
  act.phase = SwitchingPhase::kActivateSafety;
  NormalModel ib = tiny_model(12, 8, 2, 102);
  ib.phase = SwitchingPhase::kIdleBeforeMoving;
  NormalModel ia = tiny_model(12, 8, 2, 103);
  ia.phase = SwitchingPhase::kIdleAfterMoving;

  std::map<SwitchingPhase, NormalModel> models;
  models.emplace(SwitchingPhase::kMovingRail, m);
  models.emplace(SwitchingPhase::kDeactivateSafety, deact);
  models.emplace(SwitchingPhase::kActivateSafety, act);
  models.emplace(SwitchingPhase::kIdleBeforeMoving, ib);
  models.emplace(SwitchingPhase::kIdleAfterMoving, ia);

  const std::map<MalfunctionKind, double> thresholds = {
      {MalfunctionKind::kGreaseInsideDev, 10.0},
      {MalfunctionKind::kContact, 10.0},
      {MalfunctionKind::kLock, 10.0}};
  const std::map<SwitchingPhase, double> phase_thr = {
      {SwitchingPhase::kMovingRail, 10.0},
      {SwitchingPhase::kDeactivateSafety, 10.0},
      {SwitchingPhase::kActivateSafety, 10.0},
      {SwitchingPhase::kIdleBeforeMoving, 10.0},
      {SwitchingPhase::kIdleAfterMoving, 10.0}};

  const PhaseMalfunctionMatrix matrix = default_phase_malfunction_matrix();
  const AnomalyReport report = score_event(
      spec, seg, models,
      matrix, {MalfunctionKind::kGreaseInsideDev, MalfunctionKind::kContact, MalfunctionKind::kLock},
      thresholds, phase_thr, "ev");

  CHECK(report.phase_scores.at(SwitchingPhase::kMovingRail) == s1);
  CHECK(report.switching_time_s == doctest::Approx(10 * 0.032));
  for (const TargetRow& row : report.targets) {
    CHECK(row.score >= 0.0);
    CHECK(row.anomalous == (row.score > row.threshold));
  }
  // Contact maps to MovingRail only, so its score is the MovingRail score.
  for (const TargetRow& row : report.targets) {
    if (row.target == MalfunctionKind::kContact) CHECK(row.score == s1);
    if (row.target == MalfunctionKind::kLock) {
      const double expect = 0.5 * (report.phase_scores.at(SwitchingPhase::kDeactivateSafety) +
                                   report.phase_scores.at(SwitchingPhase::kActivateSafety));
      CHECK(row.score == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  // Missing phase model is an explicit error.
  std::map<SwitchingPhase, NormalModel> partial;
  partial.emplace(SwitchingPhase::kMovingRail, m);
  CHECK_THROWS_AS(score_event(spec, seg, partial, matrix, {MalfunctionKind::kGreaseInsideDev},
                              thresholds, phase_thr, "ev"),
                  std::runtime_error);
}

TEST_CASE("normal models persist losslessly") {
  Rng rng(2);
  Eigen::MatrixXd mags(9, 28);
  for (int j = 0; j < 28; ++j) {
    for (int i = 0; i < 9; ++i) mags(i, j) = 0.3 + rng.uniform();
  }
  Spectrogram spec;
  spec.magnitudes = mags;
  spec.bin_hz = 10.0;
  spec.hop_s = 0.032;
  spec.window_len = 16;
  PhaseSegmentation seg;
  seg.boundaries = {0, 3, 6, 9, 22, 25, 26, 28};
  seg.hop_s = 0.032;
  std::vector<SegmentedClip> clips(20, SegmentedClip{&spec, &seg});
  NormalModelConfig cfg;
  cfg.hidden1 = 6;
  cfg.hidden2 = 6;
  cfg.epochs = 3;
  const NormalModel m = train_normal_model(clips, SwitchingPhase::kMovingRail, cfg, 21);

  const auto dir = testutil::scratch_dir("model");
  save_normal_model(dir / "m.txt", m);
  const NormalModel r = load_normal_model(dir / "m.txt");
  CHECK(r.phase == m.phase);
  CHECK(r.context == m.context);
  CHECK(r.w1 == m.w1);
  CHECK(r.w2 == m.w2);
  CHECK(r.w3 == m.w3);
  CHECK(r.b1 == m.b1);
  CHECK(r.b2 == m.b2);
  CHECK(r.b3 == m.b3);
  CHECK(r.norm_mean == m.norm_mean);
  CHECK(r.norm_std == m.norm_std);
  CHECK(phase_score(r, spec, seg) == phase_score(m, spec, seg));
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
