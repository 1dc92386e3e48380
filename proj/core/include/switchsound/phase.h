// switchsound/phase.h

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

#ifndef SWITCHSOUND_PHASE_H_
#define SWITCHSOUND_PHASE_H_

#include <array>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "switchsound/snmf.h"

namespace switchsound {

// The seven ordered temporal stages of one throw.
enum class SwitchingPhase {
  kStartingRoutine = 0,
  kIdleBeforeMoving,
  kDeactivateSafety,
  kMovingRail,
  kActivateSafety,
  kIdleAfterMoving,
  kEndingRoutine,
};

inline constexpr int kNumPhases = 7;

inline constexpr std::array<SwitchingPhase, kNumPhases> kAllPhases = {
    SwitchingPhase::kStartingRoutine, SwitchingPhase::kIdleBeforeMoving,
    SwitchingPhase::kDeactivateSafety, SwitchingPhase::kMovingRail,
    SwitchingPhase::kActivateSafety,   SwitchingPhase::kIdleAfterMoving,
    SwitchingPhase::kEndingRoutine};

std::string_view phase_name(SwitchingPhase p);
std::optional<SwitchingPhase> parse_phase(std::string_view name);

// Malfunction classes a point machine exhibits. Abnormal adhesion force
// manifests as tongue-rail contact pressure, i.e. the Contact class.
enum class MalfunctionKind {
  kGreaseInsideDev = 0,
  kContact,
  kLock,
  kGear,
  kMotor,
  kCollisionInclusions,
  kCollisionSnowMelting,
  kGreaseOutsideDev,
  kTorqueFluctuation,
  kInsufficientControlVoltage,
};

inline constexpr int kNumMalfunctions = 10;

inline constexpr std::array<MalfunctionKind, kNumMalfunctions> kAllMalfunctions = {
    MalfunctionKind::kGreaseInsideDev,      MalfunctionKind::kContact,
    MalfunctionKind::kLock,                 MalfunctionKind::kGear,
    MalfunctionKind::kMotor,                MalfunctionKind::kCollisionInclusions,
    MalfunctionKind::kCollisionSnowMelting, MalfunctionKind::kGreaseOutsideDev,
    MalfunctionKind::kTorqueFluctuation,    MalfunctionKind::kInsufficientControlVoltage};

std::string_view malfunction_name(MalfunctionKind m);
std::optional<MalfunctionKind> parse_malfunction(std::string_view name);

enum class CostEffect { kVeryHigh, kHigh, kAvg, kLow, kVeryLow, kNone };

// Which phases can reveal which malfunction, plus the inspection-cost rank
// of addressing each malfunction class.
struct PhaseMalfunctionMatrix {
  std::array<std::array<bool, kNumMalfunctions>, kNumPhases> detects{};
  std::array<CostEffect, kNumMalfunctions> cost_effect{};

  bool cell(SwitchingPhase p, MalfunctionKind m) const {
    return detects[static_cast<std::size_t>(p)][static_cast<std::size_t>(m)];
  }
};

PhaseMalfunctionMatrix default_phase_malfunction_matrix();

// Phases whose matrix cell is set, in phase order.
std::vector<SwitchingPhase> phases_for_malfunction(MalfunctionKind m,
                                                   const PhaseMalfunctionMatrix& matrix);

// The sources expected audible during a phase.
std::vector<SourceName> expected_source_profile(SwitchingPhase p);

// Frame boundaries b0 <= b1 <= ... <= b7 delimiting the seven phases;
// b0 == 0 and b7 == n_frames, so phases partition the frames.
struct PhaseSegmentation {
  std::array<int, kNumPhases + 1> boundaries{};
  double hop_s = 0.0;
  std::array<double, kNumPhases> confidence{};

  int start_frame(SwitchingPhase p) const { return boundaries[static_cast<std::size_t>(p)]; }
  int end_frame(SwitchingPhase p) const { return boundaries[static_cast<std::size_t>(p) + 1]; }
  int length(SwitchingPhase p) const { return end_frame(p) - start_frame(p); }
  double start_s(SwitchingPhase p) const { return start_frame(p) * hop_s; }
  double end_s(SwitchingPhase p) const { return end_frame(p) * hop_s; }
  double duration_s(SwitchingPhase p) const { return length(p) * hop_s; }
  int n_frames() const { return boundaries.back(); }
};

struct SegmentationOptions {
  // A source counts as active in a frame when its trace reaches this fraction
  // of that source's maximum over the event, so decoding is invariant to
  // per-installation gain.
  double activity_threshold = 0.2;
};

// Left-to-right dynamic-programming decode: boundaries minimize the summed
// per-frame Hamming mismatch between binarized trace activity and each
// phase's expected profile. Every phase receives at least one frame. Cost
// ties are broken toward the earliest boundary (during backtracking each
// stored predecessor is the smallest frame index achieving the stage
// minimum). Confidence per phase is 1 - mean normalized mismatch.
//
// Background traces, if present, are ignored; profiles only constrain the
// four component sources. Throws "no activity detected" when every trace is
// identically zero and on unequal trace lengths.
PhaseSegmentation segment_phases(const std::map<SourceName, Eigen::VectorXd>& traces,
                                 double hop_s, const SegmentationOptions& opts = {});

// Convenience overload building per-source traces from activations.
PhaseSegmentation segment_phases(const ActivationMatrix& a, const BasisDictionary& d,
                                 const SegmentationOptions& opts = {});

}  // namespace switchsound

#endif  // SWITCHSOUND_PHASE_H_
