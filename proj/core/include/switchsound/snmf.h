// switchsound/snmf.h

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

#ifndef SWITCHSOUND_SNMF_H_
#define SWITCHSOUND_SNMF_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "switchsound/dsp.h"

namespace switchsound {

// The sound sources a point machine emits during a throw, plus an optional
// background slot for stationary noise.
enum class SourceName { kRelay = 0, kMotor, kLockPiece, kRod, kBackground };

inline constexpr std::array<SourceName, 5> kAllSources = {
    SourceName::kRelay, SourceName::kMotor, SourceName::kLockPiece, SourceName::kRod,
    SourceName::kBackground};

std::string_view source_name(SourceName s);
std::optional<SourceName> parse_source(std::string_view name);

struct LabelSegment {
  std::string event_id;
  int start_frame = 0;
  int end_frame = 0;  // exclusive
};

// Time ranges in which one component is heard (near-)isolated.
struct SourceLabel {
  SourceName name = SourceName::kRelay;
  std::vector<LabelSegment> segments;
};

// The W factor: per-component timbre bases. Columns are L2-normalized and
// each column is owned by exactly one source.
struct BasisDictionary {
  Eigen::MatrixXd bases;  // n_bins x n_components
  std::vector<SourceName> component_owner;
  int n_per_source = 0;
  double bin_hz = 0.0;

  int n_bins() const { return static_cast<int>(bases.rows()); }
  int n_components() const { return static_cast<int>(bases.cols()); }
  // Distinct owners, in enum order.
  std::vector<SourceName> sources() const;
  bool has_source(SourceName s) const;
};

// The H factor: per-frame volume of each dictionary component.
struct ActivationMatrix {
  Eigen::MatrixXd activations;  // n_components x n_frames
  double hop_s = 0.0;

  int n_components() const { return static_cast<int>(activations.rows()); }
  int n_frames() const { return static_cast<int>(activations.cols()); }
};

struct FitOptions {
  int n_per_source = 4;
  int iters = 200;
  std::uint64_t seed = 0;
  // Labeled frames per source are subsampled (deterministic stride) above
  // this count to bound fitting cost.
  int max_frames_per_source = 3000;
};

// Per-iteration objective values, for convergence checks.
struct NmfTrace {
  // fit_bases: one series per fitted source, in fitting order.
  std::vector<std::pair<SourceName, std::vector<double>>> fit_objectives;
  // estimate_activations: single series.
  std::vector<double> objectives;
};

// Generalized KL divergence D(V || WH), the objective minimized throughout.
double kl_divergence(const Eigen::MatrixXd& v, const Eigen::MatrixXd& wh);

// Learns n_per_source basis columns per labeled source with multiplicative
// KL updates on the concatenation of that source's labeled frames.
//
// Sources are fitted in enum order and every already-fitted source joins the
// factorization as fixed explanatory atoms, so a later source's new columns
// model only what earlier sources cannot explain. This keeps e.g. motor hum
// out of the lock-piece bases even though the lock piece is never heard
// without the motor running.
//
// Deterministic given the seed. Throws "unlabeled source" when the label set
// is empty or a source has no labeled frames, and "invalid spectrogram" on
// non-finite input.
BasisDictionary fit_bases(const std::map<std::string, Spectrogram>& spectrograms,
                          const std::vector<SourceLabel>& labels, const FitOptions& opts,
                          NmfTrace* trace = nullptr);

// Estimates H >= 0 minimizing KL(V || W H) with W held fixed, multiplicative
// updates from an all-ones initialization. The dictionary is never modified.
// Throws "dictionary/spectrogram mismatch" on bin-count mismatch.
ActivationMatrix estimate_activations(const Spectrogram& s, const BasisDictionary& d, int iters,
                                      NmfTrace* trace = nullptr);

// Per-frame activation summed over the rows owned by one source.
// Throws on a source absent from the dictionary.
Eigen::VectorXd source_activation(const ActivationMatrix& a, const BasisDictionary& d,
                                  SourceName source);

// Versioned structured-text persistence; round-trip is lossless.
void save_dictionary(const std::filesystem::path& path, const BasisDictionary& d);
BasisDictionary load_dictionary(const std::filesystem::path& path);

}  // namespace switchsound

#endif  // SWITCHSOUND_SNMF_H_
