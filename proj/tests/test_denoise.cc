// tests/test_denoise.cc

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

#include <cmath>
#include <doctest.h>

#include "switchsound/rng.h"
#include "switchsound/synth.h"
#include "testutil.h"

using namespace switchsound;

namespace {

Waveform tone_clip(double freq, double amp, std::size_t n = 16000) {
  Waveform w;
  w.sample_rate = 16000.0;
  w.event_id = "tone";
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / 16000.0);
  }
  return w;
}

ClipFeatures synthetic_features(Rng& rng, const Eigen::VectorXd& base) {
  ClipFeatures f;
  f.values = base;
  for (int i = 0; i < f.values.size(); ++i) f.values(i) += rng.normal();
  return f;
}

}  // namespace

TEST_SUITE("denoise") {

TEST_CASE("a pure tone concentrates its band ratio and has a stable centroid") {
  const Spectrogram s = stft(tone_clip(1000.0, 0.8), 1024, 512);
  const ClipFeatures f = extract_clip_features(s);
  // Band 4 of the 8 log-spaced bands over [50, 8000] covers 630.9..1189.2 Hz.
  CHECK(f.band_ratio(4) > 0.95);
  CHECK(f.centroid_mean() == doctest::Approx(1000.0).epsilon(0.05));
  const double ratio_sum = f.values.head(8).sum();
  CHECK(ratio_sum == doctest::Approx(1.0).epsilon(1e-9));

  // Near-zero variance: the per-frame centroid barely moves for a steady
  // tone, zero-padded tail frames included.
  CHECK(std::sqrt(f.centroid_var()) < 0.01 * f.centroid_mean());
}

TEST_CASE("white noise centroid matches the flat-spectrum value within 10%") {
  Rng rng(88);
  Waveform w;
  w.sample_rate = 16000.0;
  w.event_id = "noise";
  w.samples.resize(32000);
  for (double& v : w.samples) v = rng.uniform(-1.0, 1.0);
  const Spectrogram s = stft(w, 1024, 512);
  const ClipFeatures f = extract_clip_features(s);
  // Flat magnitude spectrum: centroid = mean bin frequency.
  const double flat_centroid = 0.5 * s.bin_hz * static_cast<double>(s.n_bins() - 1);
  CHECK(f.centroid_mean() == doctest::Approx(flat_centroid).epsilon(0.10));
}

TEST_CASE("clip features are invariant to global gain") {
  Waveform a = tone_clip(700.0, 0.3, 24000);
  Waveform b = a;
  for (double& v : b.samples) v *= 2.0;
  const ClipFeatures fa = extract_clip_features(stft(a, 1024, 512));
  const ClipFeatures fb = extract_clip_features(stft(b, 1024, 512));
  CHECK(fa.values == fb.values);
}

TEST_CASE("silent clips are rejected") {
  Waveform w;
  w.sample_rate = 16000.0;
  w.samples.assign(4096, 0.0);
  const Spectrogram s = stft(w, 1024, 512);
  CHECK_THROWS_WITH_AS(extract_clip_features(s), "silent clip", std::runtime_error);
}

TEST_CASE("degenerate identical training clips give a zero-distance model") {
  const Spectrogram s = stft(tone_clip(500.0, 0.5), 1024, 512);
  const ClipFeatures f = extract_clip_features(s);
  std::vector<ClipFeatures> train(12, f);
  const CleanlinessModel m = fit_cleanliness(train, 0.99);
  for (int i = 0; i < ClipFeatures::kDim; ++i) {
    CHECK(m.mean(i) == doctest::Approx(f.values(i)).epsilon(1e-12));
  }
  CHECK(mahalanobis_distance(m, f) == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));

  const ClipFeatures other = extract_clip_features(stft(tone_clip(2500.0, 0.5), 1024, 512));
  CHECK(mahalanobis_distance(m, other) > 0.0);

  // The clip equal to the training mean screens Clean with distance ~0.
  const ScreeningResult r = screen_event(s, m);
  CHECK(r.verdict == ScreeningVerdict::kClean);
  CHECK(r.distance == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
}

TEST_CASE("the threshold is exactly the empirical quantile of training distances") {
  Rng rng(31);
  Eigen::VectorXd base(ClipFeatures::kDim);
  for (int i = 0; i < base.size(); ++i) base(i) = 5.0 + rng.uniform();
  std::vector<ClipFeatures> train;
  for (int i = 0; i < 100; ++i) train.push_back(synthetic_features(rng, base));

  const CleanlinessModel m = fit_cleanliness(train, 0.99);
  std::vector<double> dists;
  for (const ClipFeatures& f : train) dists.push_back(mahalanobis_distance(m, f));
  std::sort(dists.begin(), dists.end());
  CHECK(m.threshold == doctest::Approx(dists[98]).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(fit_cleanliness(std::vector<ClipFeatures>(9, train[0]), 0.99),
                       "insufficient training data", std::runtime_error);
}

TEST_CASE("distances are invariant to a consistent diagonal rescaling") {
  Rng rng(57);
  Eigen::VectorXd base = Eigen::VectorXd::Constant(ClipFeatures::kDim, 3.0);
  std::vector<ClipFeatures> train;
  for (int i = 0; i < 60; ++i) train.push_back(synthetic_features(rng, base));
  const ClipFeatures query = synthetic_features(rng, base);

  Eigen::VectorXd scale(ClipFeatures::kDim);
  for (int i = 0; i < scale.size(); ++i) scale(i) = (i % 2 == 0) ? 2.0 : 0.5;

  std::vector<ClipFeatures> scaled_train = train;
  for (ClipFeatures& f : scaled_train) f.values = f.values.cwiseProduct(scale);
  ClipFeatures scaled_query = query;
  scaled_query.values = scaled_query.values.cwiseProduct(scale);

  const CleanlinessModel m1 = fit_cleanliness(train, 0.9);
  const CleanlinessModel m2 = fit_cleanliness(scaled_train, 0.9);
  const double d1 = mahalanobis_distance(m1, query);
  const double d2 = mahalanobis_distance(m2, scaled_query);
  CHECK(d1 == doctest::Approx(d2).epsilon(1e-5));
}

TEST_CASE("screening separates synthetic disturbances from clean events") {
  // An 11-dimensional covariance needs a reasonable sample to generalize.
  std::vector<ClipFeatures> train;
  for (int i = 0; i < 30; ++i) {
    auto [w, gt] =
        generate_event(DegradationProfile{}, DisturbanceSpec{}, 700 + static_cast<std::uint64_t>(i));
    train.push_back(extract_clip_features(stft(w, 1024, 512)));
  }
  const CleanlinessModel m = fit_cleanliness(train, 0.99);

  const SynthConfig cfg;
  const DisturbanceSpec shinkansen =
      make_disturbance(DisturbanceKind::kShinkansenViaduct, 42, cfg);
  auto [wd, gtd] = generate_event(DegradationProfile{}, shinkansen, 4040);
  CHECK(screen_event(stft(wd, 1024, 512), m).verdict == ScreeningVerdict::kContaminated);

  auto [wc, gtc] = generate_event(DegradationProfile{}, DisturbanceSpec{}, 4041);
  CHECK(screen_event(stft(wc, 1024, 512), m).verdict == ScreeningVerdict::kClean);
}

TEST_CASE("persistence rule: consecutive exceedances become anomalies") {
  const SwitchingPhase mr = SwitchingPhase::kMovingRail;
  const SwitchingPhase ds = SwitchingPhase::kDeactivateSafety;
  const std::map<SwitchingPhase, double> thresholds = {{mr, 1.0}, {ds, 1.0}};

  auto event = [&](double mr_score, double ds_score) {
    ScoredEvent e;
    e.event_id = "e";
    e.phase_scores = {{mr, mr_score}, {ds, ds_score}};
    return e;
  };

  // Three consecutive exceedances in MovingRail with k=2.
  std::vector<ScoredEvent> events = {event(0.5, 0.5), event(1.5, 0.5), event(1.6, 0.5),
                                     event(1.7, 0.5), event(0.5, 0.5)};
  auto verdicts = persistence_check(events, thresholds, 2);
  CHECK(verdicts.at(mr) == PersistenceVerdict::kPersistentAnomaly);
  CHECK(verdicts.at(ds) == PersistenceVerdict::kNormal);

  // A single spike among ten events stays a transient disturbance.
  std::vector<ScoredEvent> spiked(10, event(0.5, 0.5));
  spiked[4] = event(2.0, 0.5);
  verdicts = persistence_check(spiked, thresholds, 2);
  CHECK(verdicts.at(mr) == PersistenceVerdict::kTransientDisturbance);

  // All below threshold.
  verdicts = persistence_check(std::vector<ScoredEvent>(5, event(0.5, 0.5)), thresholds, 2);
  CHECK(verdicts.at(mr) == PersistenceVerdict::kNormal);
  CHECK(verdicts.at(ds) == PersistenceVerdict::kNormal);
}

TEST_CASE("persistence verdicts depend only on the exceedance pattern") {
  const SwitchingPhase mr = SwitchingPhase::kMovingRail;
  std::vector<ScoredEvent> events;
  const std::vector<double> scores = {0.2, 1.4, 1.9, 0.3, 1.2};
  for (double s : scores) {
    ScoredEvent e;
    e.event_id = "e";
    e.phase_scores = {{mr, s}};
    events.push_back(e);
  }
  const auto base = persistence_check(events, {{mr, 1.0}}, 2);

  const double gain = 137.0;
  std::vector<ScoredEvent> scaled = events;
  for (ScoredEvent& e : scaled) e.phase_scores[mr] *= gain;
  const auto rescaled = persistence_check(scaled, {{mr, gain * 1.0}}, 2);
  CHECK(base.at(mr) == rescaled.at(mr));

  // Mismatched phase counts are rejected.
  std::vector<ScoredEvent> bad = events;
  bad[2].phase_scores[SwitchingPhase::kActivateSafety] = 0.1;
  CHECK_THROWS_AS(persistence_check(bad, {{mr, 1.0}}, 2), std::runtime_error);
}

}  // TEST_SUITE
