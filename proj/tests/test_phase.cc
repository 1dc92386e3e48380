// tests/test_phase.cc

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

#include "switchsound/phase.h"

#include <doctest.h>

#include "switchsound/synth.h"
#include "testutil.h"

using namespace switchsound;

namespace {

// Shared dictionary trained once on a small synthetic corpus; the decode
// tests below all run the full activation -> segmentation chain.
const BasisDictionary& test_dictionary() {
  static const BasisDictionary d = [] {
    const SynthConfig synth_cfg;
    const BandMask mask{{{50.0, 6000.0}}};
    std::map<std::string, Spectrogram> specs;
    std::map<SourceName, std::vector<LabelSegment>> segs;
    const std::vector<std::pair<SourceName, std::vector<SwitchingPhase>>> mapping = {
        {SourceName::kRelay, {SwitchingPhase::kStartingRoutine, SwitchingPhase::kEndingRoutine}},
        {SourceName::kMotor,
         {SwitchingPhase::kIdleBeforeMoving, SwitchingPhase::kIdleAfterMoving}},
        {SourceName::kLockPiece,
         {SwitchingPhase::kDeactivateSafety, SwitchingPhase::kActivateSafety}},
        {SourceName::kRod, {SwitchingPhase::kMovingRail}},
    };
    for (int i = 0; i < 8; ++i) {
      auto [w, gt] = generate_event(DegradationProfile{}, DisturbanceSpec{},
                                    9000 + static_cast<std::uint64_t>(i), synth_cfg);
      const std::string id = "train" + std::to_string(i);
      Spectrogram spec = apply_band_mask(stft(w, 1024, 512), mask);
      const auto bounds = gt_frame_boundaries(gt, spec.hop_s, spec.n_frames());
      for (const auto& [source, phases] : mapping) {
        for (SwitchingPhase p : phases) {
          const int lo = bounds[static_cast<std::size_t>(p)] + 1;
          const int hi = bounds[static_cast<std::size_t>(p) + 1] - 1;
          if (hi > lo) segs[source].push_back({id, lo, hi});
        }
      }
      specs.emplace(id, std::move(spec));
    }
    std::vector<SourceLabel> labels;
    for (const auto& [s, v] : segs) labels.push_back({s, v});
    FitOptions opts;
    opts.n_per_source = 4;
    opts.iters = 150;
    opts.seed = 4242;
    return fit_bases(specs, labels, opts);
  }();
  return d;
}

PhaseSegmentation decode_event(const Waveform& w) {
  const BandMask mask{{{50.0, 6000.0}}};
  const Spectrogram spec = apply_band_mask(stft(w, 1024, 512), mask);
  const ActivationMatrix act = estimate_activations(spec, test_dictionary(), 200);
  return segment_phases(act, test_dictionary());
}

// Indicator traces that follow the expected profiles exactly, `len` frames
// per phase.
std::map<SourceName, Eigen::VectorXd> indicator_traces(int len) {
  const int total = kNumPhases * len;
  std::map<SourceName, Eigen::VectorXd> traces;
  for (SourceName s :
       {SourceName::kRelay, SourceName::kMotor, SourceName::kLockPiece, SourceName::kRod}) {
    traces[s] = Eigen::VectorXd::Zero(total);
  }
  for (int p = 0; p < kNumPhases; ++p) {
    for (SourceName s : expected_source_profile(static_cast<SwitchingPhase>(p))) {
      traces[s].segment(p * len, len).setConstant(1.0);
    }
  }
  return traces;
}

}  // namespace

TEST_SUITE("phase") {

TEST_CASE("expected source profiles match the phase model") {
  CHECK(expected_source_profile(SwitchingPhase::kStartingRoutine) ==
        std::vector<SourceName>{SourceName::kRelay});
  CHECK(expected_source_profile(SwitchingPhase::kEndingRoutine) ==
        std::vector<SourceName>{SourceName::kRelay});
  CHECK(expected_source_profile(SwitchingPhase::kIdleBeforeMoving) ==
        std::vector<SourceName>{SourceName::kMotor});
  CHECK(expected_source_profile(SwitchingPhase::kMovingRail) ==
        std::vector<SourceName>({SourceName::kMotor, SourceName::kRod}));
  CHECK(expected_source_profile(SwitchingPhase::kDeactivateSafety) ==
        std::vector<SourceName>({SourceName::kMotor, SourceName::kLockPiece}));
}

TEST_CASE("phases_for_malfunction reads the matrix in phase order") {
  const PhaseMalfunctionMatrix m = default_phase_malfunction_matrix();
  CHECK(phases_for_malfunction(MalfunctionKind::kGreaseInsideDev, m) ==
        std::vector<SwitchingPhase>({SwitchingPhase::kIdleBeforeMoving,
                                     SwitchingPhase::kDeactivateSafety,
                                     SwitchingPhase::kActivateSafety,
                                     SwitchingPhase::kIdleAfterMoving}));
  CHECK(phases_for_malfunction(MalfunctionKind::kLock, m) ==
        std::vector<SwitchingPhase>(
            {SwitchingPhase::kDeactivateSafety, SwitchingPhase::kActivateSafety}));
  CHECK(phases_for_malfunction(MalfunctionKind::kInsufficientControlVoltage, m) ==
        std::vector<SwitchingPhase>({SwitchingPhase::kStartingRoutine}));
  CHECK(phases_for_malfunction(MalfunctionKind::kContact, m) ==
        std::vector<SwitchingPhase>({SwitchingPhase::kMovingRail}));

  // Cost ranks line up with the inspection table.
  CHECK(m.cost_effect[static_cast<std::size_t>(MalfunctionKind::kGreaseInsideDev)] ==
        CostEffect::kVeryHigh);
  CHECK(m.cost_effect[static_cast<std::size_t>(MalfunctionKind::kTorqueFluctuation)] ==
        CostEffect::kVeryLow);
}

TEST_CASE("exact indicator traces decode to their change points with confidence 1") {
  const int len = 6;
  const PhaseSegmentation seg = segment_phases(indicator_traces(len), 0.032);
  for (int p = 0; p <= kNumPhases; ++p) {
    CHECK(seg.boundaries[static_cast<std::size_t>(p)] == p * len);
  }
  for (double c : seg.confidence) CHECK(c == doctest::Approx(1.0));
}

TEST_CASE("segmentation is a partition and scaling traces changes nothing") {
  auto traces = indicator_traces(5);
  // Perturb: drop one motor frame so the decode is not cost-free.
  traces[SourceName::kMotor](7) = 0.0;
  const PhaseSegmentation seg = segment_phases(traces, 0.032);
  int total = 0;
  for (SwitchingPhase p : kAllPhases) total += seg.length(p);
  CHECK(total == seg.n_frames());
  CHECK(seg.boundaries.front() == 0);

  auto scaled = traces;
  for (auto& [s, t] : scaled) t *= 3.7;
  const PhaseSegmentation seg2 = segment_phases(scaled, 0.032);
  CHECK(seg.boundaries == seg2.boundaries);
}

TEST_CASE("cost ties break toward the earliest boundary") {
  // Frames 2 and 3 are silent: putting them in StartingRoutine or
  // IdleBeforeMoving costs the same, so the decoder must pick b1 = 2.
  const int total = 35;
  std::map<SourceName, Eigen::VectorXd> traces;
  for (SourceName s :
       {SourceName::kRelay, SourceName::kMotor, SourceName::kLockPiece, SourceName::kRod}) {
    traces[s] = Eigen::VectorXd::Zero(total);
  }
  traces[SourceName::kRelay].segment(0, 2).setOnes();
  traces[SourceName::kMotor].segment(4, 26).setOnes();
  traces[SourceName::kLockPiece].segment(10, 5).setOnes();
  traces[SourceName::kRod].segment(15, 5).setOnes();
  traces[SourceName::kLockPiece].segment(20, 5).setOnes();
  traces[SourceName::kRelay].segment(30, 5).setOnes();

  const PhaseSegmentation seg = segment_phases(traces, 0.032);
  const std::array<int, 8> expected = {0, 2, 10, 15, 20, 25, 30, 35};
  CHECK(seg.boundaries == expected);
}

TEST_CASE("error paths: unequal lengths, silence, too few frames") {
  std::map<SourceName, Eigen::VectorXd> traces;
  traces[SourceName::kRelay] = Eigen::VectorXd::Ones(20);
  traces[SourceName::kMotor] = Eigen::VectorXd::Ones(19);
  CHECK_THROWS_AS(segment_phases(traces, 0.032), std::runtime_error);

  std::map<SourceName, Eigen::VectorXd> zero;
  zero[SourceName::kRelay] = Eigen::VectorXd::Zero(20);
  zero[SourceName::kMotor] = Eigen::VectorXd::Zero(20);
  CHECK_THROWS_WITH_AS(segment_phases(zero, 0.032), "no activity detected", std::runtime_error);

  std::map<SourceName, Eigen::VectorXd> tiny;
  tiny[SourceName::kRelay] = Eigen::VectorXd::Ones(5);
  CHECK_THROWS_AS(segment_phases(tiny, 0.032), std::runtime_error);
}

TEST_CASE("decoded boundaries track ground truth on synthetic events") {
  for (std::uint64_t seed : {311u, 312u, 313u}) {
    auto [w, gt] = generate_event(DegradationProfile{}, DisturbanceSpec{}, seed);
    const PhaseSegmentation seg = decode_event(w);
    const auto gt_bounds = gt_frame_boundaries(gt, seg.hop_s, seg.n_frames());
    for (int p = 1; p < kNumPhases; ++p) {
      CHECK_MESSAGE(std::abs(seg.boundaries[static_cast<std::size_t>(p)] -
                             gt_bounds[static_cast<std::size_t>(p)]) <= 1,
                    "seed ", seed, " boundary ", p, " decoded ",
                    seg.boundaries[static_cast<std::size_t>(p)], " truth ",
                    gt_bounds[static_cast<std::size_t>(p)]);
    }
  }
}

TEST_CASE("doubling MovingRail stretches only that interval") {
  const std::uint64_t seed = 606;
  auto [w_base, gt_base] = generate_event(DegradationProfile{}, DisturbanceSpec{}, seed);
  SynthConfig stretched_cfg;
  stretched_cfg.phase_durations[static_cast<std::size_t>(SwitchingPhase::kMovingRail)] *= 2.0;
  auto [w_long, gt_long] =
      generate_event(DegradationProfile{}, DisturbanceSpec{}, seed, stretched_cfg);

  const PhaseSegmentation base = decode_event(w_base);
  const PhaseSegmentation longer = decode_event(w_long);

  for (SwitchingPhase p : kAllPhases) {
    if (p == SwitchingPhase::kMovingRail) {
      CHECK(longer.length(p) >= 2 * base.length(p) - 2);
      CHECK(longer.length(p) <= 2 * base.length(p) + 2);
    } else {
      CHECK(std::abs(longer.length(p) - base.length(p)) <= 1);
    }
  }
}

}  // TEST_SUITE
