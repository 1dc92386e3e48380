// core/src/phase.cc

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

#include <limits>
#include <stdexcept>

namespace switchsound {

std::string_view phase_name(SwitchingPhase p) {
  switch (p) {
    case SwitchingPhase::kStartingRoutine: return "StartingRoutine";
    case SwitchingPhase::kIdleBeforeMoving: return "IdleBeforeMoving";
    case SwitchingPhase::kDeactivateSafety: return "DeactivateSafety";
    case SwitchingPhase::kMovingRail: return "MovingRail";
    case SwitchingPhase::kActivateSafety: return "ActivateSafety";
    case SwitchingPhase::kIdleAfterMoving: return "IdleAfterMoving";
    case SwitchingPhase::kEndingRoutine: return "EndingRoutine";
  }
  return "?";
}

std::optional<SwitchingPhase> parse_phase(std::string_view name) {
  for (SwitchingPhase p : kAllPhases) {
    if (phase_name(p) == name) return p;
  }
  return std::nullopt;
}

std::string_view malfunction_name(MalfunctionKind m) {
  switch (m) {
    case MalfunctionKind::kGreaseInsideDev: return "GreaseInsideDev";
    case MalfunctionKind::kContact: return "Contact";
    case MalfunctionKind::kLock: return "Lock";
    case MalfunctionKind::kGear: return "Gear";
    case MalfunctionKind::kMotor: return "Motor";
    case MalfunctionKind::kCollisionInclusions: return "CollisionInclusions";
    case MalfunctionKind::kCollisionSnowMelting: return "CollisionSnowMelting";
    case MalfunctionKind::kGreaseOutsideDev: return "GreaseOutsideDev";
    case MalfunctionKind::kTorqueFluctuation: return "TorqueFluctuation";
    case MalfunctionKind::kInsufficientControlVoltage: return "InsufficientControlVoltage";
  }
  return "?";
}

std::optional<MalfunctionKind> parse_malfunction(std::string_view name) {
  for (MalfunctionKind m : kAllMalfunctions) {
    if (malfunction_name(m) == name) return m;
  }
  return std::nullopt;
}

PhaseMalfunctionMatrix default_phase_malfunction_matrix() {
  using P = SwitchingPhase;
  using M = MalfunctionKind;
  PhaseMalfunctionMatrix t;
  auto set = [&t](P p, std::initializer_list<M> ms) {
    for (M m : ms) t.detects[static_cast<std::size_t>(p)][static_cast<std::size_t>(m)] = true;
  };
  set(P::kStartingRoutine, {M::kInsufficientControlVoltage});
  set(P::kIdleBeforeMoving, {M::kGreaseInsideDev, M::kGear, M::kMotor});
  set(P::kDeactivateSafety, {M::kGreaseInsideDev, M::kLock, M::kGear, M::kMotor});
  set(P::kMovingRail, {M::kContact, M::kGear, M::kMotor, M::kCollisionInclusions,
                       M::kCollisionSnowMelting, M::kGreaseOutsideDev, M::kTorqueFluctuation});
  set(P::kActivateSafety, {M::kGreaseInsideDev, M::kLock, M::kGear, M::kMotor});
  set(P::kIdleAfterMoving, {M::kGreaseInsideDev, M::kGear, M::kMotor});
  // Ending routine reveals nothing.

  auto rank = [&t](M m, CostEffect c) { t.cost_effect[static_cast<std::size_t>(m)] = c; };
  rank(M::kGreaseInsideDev, CostEffect::kVeryHigh);
  rank(M::kContact, CostEffect::kHigh);
  rank(M::kLock, CostEffect::kAvg);
  rank(M::kGear, CostEffect::kAvg);
  rank(M::kMotor, CostEffect::kAvg);
  rank(M::kCollisionInclusions, CostEffect::kAvg);
  rank(M::kCollisionSnowMelting, CostEffect::kLow);
  rank(M::kGreaseOutsideDev, CostEffect::kLow);
  rank(M::kTorqueFluctuation, CostEffect::kVeryLow);
  rank(M::kInsufficientControlVoltage, CostEffect::kNone);
  return t;
}

std::vector<SwitchingPhase> phases_for_malfunction(MalfunctionKind m,
                                                   const PhaseMalfunctionMatrix& matrix) {
  std::vector<SwitchingPhase> out;
  for (SwitchingPhase p : kAllPhases) {
    if (matrix.cell(p, m)) out.push_back(p);
  }
  return out;
}

std::vector<SourceName> expected_source_profile(SwitchingPhase p) {
  switch (p) {
    case SwitchingPhase::kStartingRoutine:
    case SwitchingPhase::kEndingRoutine:
      return {SourceName::kRelay};
    case SwitchingPhase::kIdleBeforeMoving:
    case SwitchingPhase::kIdleAfterMoving:
      return {SourceName::kMotor};
    case SwitchingPhase::kDeactivateSafety:
    case SwitchingPhase::kActivateSafety:
      return {SourceName::kMotor, SourceName::kLockPiece};
    case SwitchingPhase::kMovingRail:
      return {SourceName::kMotor, SourceName::kRod};
  }
  return {};
}

PhaseSegmentation segment_phases(const std::map<SourceName, Eigen::VectorXd>& traces,
                                 double hop_s, const SegmentationOptions& opts) {
  // Profiles constrain the four component sources only.
  std::vector<SourceName> sources;
  Eigen::Index n_frames = -1;
  for (const auto& [name, trace] : traces) {
    if (n_frames < 0) n_frames = trace.size();
    if (trace.size() != n_frames) {
      throw std::runtime_error("segment_phases: traces of unequal length");
    }
    if (name != SourceName::kBackground) sources.push_back(name);
  }
  if (sources.empty()) throw std::runtime_error("segment_phases: no component source traces");
  const int T = static_cast<int>(n_frames);
  if (T < kNumPhases) throw std::runtime_error("segment_phases: too few frames (need >= 7)");

  // Binarize each trace at a fraction of its own event maximum.
  const int S = static_cast<int>(sources.size());
  std::vector<std::vector<bool>> active(static_cast<std::size_t>(S));
  bool any_activity = false;
  for (int si = 0; si < S; ++si) {
    const Eigen::VectorXd& trace = traces.at(sources[static_cast<std::size_t>(si)]);
    const double peak = trace.maxCoeff();
    auto& flags = active[static_cast<std::size_t>(si)];
    flags.resize(static_cast<std::size_t>(T), false);
    if (peak <= 0.0) continue;
    any_activity = true;
    const double cut = opts.activity_threshold * peak;
    for (int t = 0; t < T; ++t) flags[static_cast<std::size_t>(t)] = trace(t) >= cut;
  }
  if (!any_activity) throw std::runtime_error("no activity detected");

  // Per-frame mismatch cost against each phase profile, plus prefix sums.
  std::array<std::vector<double>, kNumPhases> prefix;
  for (int p = 0; p < kNumPhases; ++p) {
    std::vector<bool> expected(static_cast<std::size_t>(S), false);
    for (SourceName want : expected_source_profile(static_cast<SwitchingPhase>(p))) {
      for (int si = 0; si < S; ++si) {
        if (sources[static_cast<std::size_t>(si)] == want) expected[static_cast<std::size_t>(si)] = true;
      }
    }
    auto& pre = prefix[static_cast<std::size_t>(p)];
    pre.assign(static_cast<std::size_t>(T) + 1, 0.0);
    for (int t = 0; t < T; ++t) {
      int mism = 0;
      for (int si = 0; si < S; ++si) {
        if (active[static_cast<std::size_t>(si)][static_cast<std::size_t>(t)] !=
            expected[static_cast<std::size_t>(si)]) {
          ++mism;
        }
      }
      pre[static_cast<std::size_t>(t) + 1] = pre[static_cast<std::size_t>(t)] + mism;
    }
  }

  // dp[p][t]: cost of assigning frames [0, t) to phases 0..p-1, one frame
  // minimum per phase. Scanning predecessors in ascending order with strict
  // improvement keeps the earliest minimizer, which is the documented
  // tie-breaking rule.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dp(kNumPhases + 1,
                                      std::vector<double>(static_cast<std::size_t>(T) + 1, kInf));
  std::vector<std::vector<int>> parent(kNumPhases + 1,
                                       std::vector<int>(static_cast<std::size_t>(T) + 1, -1));
  dp[0][0] = 0.0;
  for (int p = 1; p <= kNumPhases; ++p) {
    const auto& pre = prefix[static_cast<std::size_t>(p) - 1];
    for (int t = p; t <= T - (kNumPhases - p); ++t) {
      double best = kInf;
      int best_prev = -1;
      for (int prev = p - 1; prev < t; ++prev) {
        const double c = dp[static_cast<std::size_t>(p) - 1][static_cast<std::size_t>(prev)];
        if (c == kInf) continue;
        const double cand =
            c + pre[static_cast<std::size_t>(t)] - pre[static_cast<std::size_t>(prev)];
        if (cand < best) {
          best = cand;
          best_prev = prev;
        }
      }
      dp[static_cast<std::size_t>(p)][static_cast<std::size_t>(t)] = best;
      parent[static_cast<std::size_t>(p)][static_cast<std::size_t>(t)] = best_prev;
    }
  }

  PhaseSegmentation seg;
  seg.hop_s = hop_s;
  seg.boundaries[kNumPhases] = T;
  for (int p = kNumPhases; p >= 1; --p) {
    const int b = seg.boundaries[static_cast<std::size_t>(p)];
    const int prev = parent[static_cast<std::size_t>(p)][static_cast<std::size_t>(b)];
    if (prev < 0) throw std::runtime_error("segment_phases: decode failed");
    seg.boundaries[static_cast<std::size_t>(p) - 1] = prev;
  }

  for (int p = 0; p < kNumPhases; ++p) {
    const int lo = seg.boundaries[static_cast<std::size_t>(p)];
    const int hi = seg.boundaries[static_cast<std::size_t>(p) + 1];
    const auto& pre = prefix[static_cast<std::size_t>(p)];
    const double mismatch =
        pre[static_cast<std::size_t>(hi)] - pre[static_cast<std::size_t>(lo)];
    seg.confidence[static_cast<std::size_t>(p)] =
        1.0 - mismatch / (static_cast<double>(hi - lo) * static_cast<double>(S));
  }
  return seg;
}

PhaseSegmentation segment_phases(const ActivationMatrix& a, const BasisDictionary& d,
                                 const SegmentationOptions& opts) {
  std::map<SourceName, Eigen::VectorXd> traces;
  for (SourceName s : d.sources()) traces[s] = source_activation(a, d, s);
  return segment_phases(traces, a.hop_s, opts);
}

}  // namespace switchsound
