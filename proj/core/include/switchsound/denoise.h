// switchsound/denoise.h

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

#ifndef SWITCHSOUND_DENOISE_H_
#define SWITCHSOUND_DENOISE_H_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "switchsound/dsp.h"
#include "switchsound/phase.h"

namespace switchsound {

struct FeatureConfig {
  int n_bands = 8;             // log-spaced energy bands
  double band_low_hz = 50.0;   // first band edge
  double band_high_hz = 8000.0;
};

// Low-dimensional acoustic summary of one clip: 8 log-spaced band energy
// ratios (sum to 1), spectral centroid mean and variance over frames with
// nonzero energy, and the clip duration. Global gain cancels everywhere
// except duration.
struct ClipFeatures {
  static constexpr int kDim = 11;
  Eigen::VectorXd values;  // [ratios(8), centroid_mean, centroid_var, duration]

  double band_ratio(int i) const { return values(i); }
  double centroid_mean() const { return values(8); }
  double centroid_var() const { return values(9); }
  double duration_s() const { return values(10); }
};

// Throws "silent clip" on an all-zero spectrogram.
ClipFeatures extract_clip_features(const Spectrogram& s, const FeatureConfig& cfg = {});

// Gaussian envelope of clean-clip features; clips farther than threshold
// (in Mahalanobis distance) are treated as disturbance-contaminated.
struct CleanlinessModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // ridge-regularized, symmetric positive definite
  double threshold = 0.0;
  double quantile = 0.99;
  FeatureConfig feature_config;
};

// Empirical mean/covariance with 1e-6 ridge (1e-3 when there are fewer clips
// than feature dimensions); the threshold is the given empirical quantile of
// the training Mahalanobis distances (sorted ascending, index ceil(q*n)-1).
// Throws "insufficient training data" below 10 clips.
CleanlinessModel fit_cleanliness(const std::vector<ClipFeatures>& clean, double quantile = 0.99);

double mahalanobis_distance(const CleanlinessModel& m, const ClipFeatures& f);

enum class ScreeningVerdict { kClean, kContaminated };

std::string_view screening_verdict_name(ScreeningVerdict v);

struct ScreeningResult {
  ScreeningVerdict verdict = ScreeningVerdict::kClean;
  double distance = 0.0;
};

// Contaminated iff the clip's Mahalanobis distance exceeds the threshold.
ScreeningResult screen_event(const Spectrogram& s, const CleanlinessModel& m);

enum class PersistenceVerdict { kNormal, kTransientDisturbance, kPersistentAnomaly };

std::string_view persistence_verdict_name(PersistenceVerdict v);

struct ScoredEvent {
  std::string event_id;
  std::map<SwitchingPhase, double> phase_scores;
};

// External noise is not synchronized with the switching operation, so only
// anomaly levels that recur at the same phase across k consecutive events
// count as real anomalies; rarer exceedances are one-off disturbances.
// Events must agree on their phase score sets.
std::map<SwitchingPhase, PersistenceVerdict> persistence_check(
    const std::vector<ScoredEvent>& events, const std::map<SwitchingPhase, double>& thresholds,
    int k = 2);

void save_cleanliness(const std::filesystem::path& path, const CleanlinessModel& m);
CleanlinessModel load_cleanliness(const std::filesystem::path& path);

}  // namespace switchsound

#endif  // SWITCHSOUND_DENOISE_H_
