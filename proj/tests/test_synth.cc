// tests/test_synth.cc

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

#include "switchsound/synth.h"

#include <doctest.h>
#include <filesystem>

#include "switchsound/wav.h"
#include "testutil.h"

using namespace switchsound;
namespace fs = std::filesystem;

TEST_SUITE("synth") {

TEST_CASE("a normal profile renders a contiguous seven-phase healthy event") {
  auto [w, gt] = generate_event(DegradationProfile{}, DisturbanceSpec{}, 123);
  CHECK_FALSE(gt.switching_failure);
  CHECK(gt.phase_windows[0].first == 0.0);
  for (int p = 1; p < kNumPhases; ++p) {
    CHECK(gt.phase_windows[static_cast<std::size_t>(p)].first ==
          gt.phase_windows[static_cast<std::size_t>(p) - 1].second);
  }
  CHECK(gt.duration_s() == doctest::Approx(5.8));
  CHECK(static_cast<double>(w.samples.size()) / w.sample_rate == doctest::Approx(5.8));
  // Amplitudes stay inside PCM16 range.
  double peak = 0.0;
  for (double s : w.samples) peak = std::max(peak, std::abs(s));
  CHECK(peak < 1.0);
}

TEST_CASE("ladder endpoints are switching failures") {
  auto [w1, gt1] = generate_event(DegradationProfile{4, 17, 5}, DisturbanceSpec{}, 9);
  CHECK(gt1.switching_failure);
  auto [w2, gt2] = generate_event(DegradationProfile{4, 0, 10}, DisturbanceSpec{}, 9);
  CHECK(gt2.switching_failure);
  auto [w3, gt3] = generate_event(DegradationProfile{0, 0, 5}, DisturbanceSpec{}, 9);
  CHECK_FALSE(gt3.switching_failure);
}

TEST_CASE("generation is deterministic given the seed") {
  auto [w1, gt1] = generate_event(DegradationProfile{2, 3, 6}, DisturbanceSpec{}, 321);
  auto [w2, gt2] = generate_event(DegradationProfile{2, 3, 6}, DisturbanceSpec{}, 321);
  CHECK(w1.samples == w2.samples);
  auto [w3, gt3] = generate_event(DegradationProfile{2, 3, 6}, DisturbanceSpec{}, 322);
  CHECK(w1.samples != w3.samples);
}

TEST_CASE("adhesion turns strictly stretch the MovingRail window") {
  double prev = 0.0;
  for (int turns = 0; turns <= 17; ++turns) {
    auto [w, gt] = generate_event(DegradationProfile{4, turns, 5}, DisturbanceSpec{}, 55);
    const auto& mr = gt.phase_windows[static_cast<std::size_t>(SwitchingPhase::kMovingRail)];
    const double dur = mr.second - mr.first;
    if (turns > 0) CHECK(dur > prev);
    prev = dur;
  }
}

TEST_CASE("disturbances are additive and never move ground-truth windows") {
  const SynthConfig cfg;
  const DisturbanceSpec d = make_disturbance(DisturbanceKind::kTrainPass, 77, cfg);
  auto [clean, gt_clean] = generate_event(DegradationProfile{}, DisturbanceSpec{}, 888);
  auto [noisy, gt_noisy] = generate_event(DegradationProfile{}, d, 888);

  CHECK(gt_clean.phase_windows == gt_noisy.phase_windows);
  CHECK(clean.samples.size() == noisy.samples.size());
  CHECK(clean.samples != noisy.samples);

  // The base switch sound is identical: the difference is only the additive
  // disturbance, which vanishes outside its window.
  const double sr = clean.sample_rate;
  const long onset = std::lround(d.onset_s * sr);
  for (long i = 0; i < onset; ++i) {
    CHECK(clean.samples[static_cast<std::size_t>(i)] ==
          noisy.samples[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("corpus generation writes WAVs plus a faithful manifest") {
  const auto dir = testutil::scratch_dir("corpus");
  CorpusSpec spec;
  spec.clean = 10;
  const auto entries = generate_corpus(spec, dir, 42);
  REQUIRE(entries.size() == 10);
  for (const ManifestEntry& e : entries) {
    CHECK_FALSE(e.switching_failure);
    CHECK(fs::exists(dir / e.file));
  }
  const auto reread = read_manifest(dir / "manifest.jsonl");
  REQUIRE(reread.size() == entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(reread[i].event_id == entries[i].event_id);
    CHECK(reread[i].seed == entries[i].seed);
    CHECK(reread[i].phase_windows == entries[i].phase_windows);
  }
  fs::remove_all(dir);
}

TEST_CASE("an adhesion ladder corpus flags exactly the final step as failure") {
  const auto dir = testutil::scratch_dir("ladder");
  CorpusSpec spec;
  spec.adhesion_per_step = 2;
  const auto entries = generate_corpus(spec, dir, 7);
  REQUIRE(entries.size() == 36);  // steps 0..17, two events each
  for (const ManifestEntry& e : entries) {
    CHECK(e.switching_failure == (e.profile.adhesion_sixth_turns == 17));
  }
  fs::remove_all(dir);
}

TEST_CASE("disturbance mix counts match the corpus spec exactly") {
  const auto dir = testutil::scratch_dir("mix");
  CorpusSpec spec;
  spec.clean = 7;
  spec.disturbed[DisturbanceKind::kTrainPass] = 3;
  const auto entries = generate_corpus(spec, dir, 3);
  int train_pass = 0, none = 0;
  for (const ManifestEntry& e : entries) {
    if (e.disturbance.kind == DisturbanceKind::kTrainPass) ++train_pass;
    if (e.disturbance.kind == DisturbanceKind::kNone) ++none;
  }
  CHECK(train_pass == 3);
  CHECK(none == 7);
  fs::remove_all(dir);
}

TEST_CASE("labeled segments follow the fixed phase-to-source mapping") {
  const auto dir = testutil::scratch_dir("labels");
  CorpusSpec spec;
  spec.clean = 2;
  const auto entries = generate_corpus(spec, dir, 99);
  const BandMask mask{{{50.0, 6000.0}}};
  const LabeledTrainingSet set =
      labeled_segments_for_training(entries, dir, 1024, 512, mask, 1);

  REQUIRE(set.spectrograms.size() == 2);
  REQUIRE(set.labels.size() == 4);

  const Spectrogram& spec0 = set.spectrograms.at(entries[0].event_id);
  GroundTruth gt;
  gt.phase_windows = entries[0].phase_windows;
  const auto bounds = gt_frame_boundaries(gt, spec0.hop_s, spec0.n_frames());

  for (const SourceLabel& label : set.labels) {
    if (label.name == SourceName::kRelay) {
      for (const LabelSegment& seg : label.segments) {
        if (seg.event_id != entries[0].event_id) continue;
        const bool starting = seg.start_frame >= bounds[0] && seg.end_frame <= bounds[1];
        const bool ending = seg.start_frame >= bounds[6] && seg.end_frame <= bounds[7];
        CHECK((starting || ending));
      }
    }
    if (label.name == SourceName::kLockPiece) {
      for (const LabelSegment& seg : label.segments) {
        if (seg.event_id != entries[0].event_id) continue;
        const bool deact = seg.start_frame >= bounds[2] && seg.end_frame <= bounds[3];
        const bool act = seg.start_frame >= bounds[4] && seg.end_frame <= bounds[5];
        CHECK((deact || act));
      }
    }
  }

  // Empty manifests produce empty label sets.
  const LabeledTrainingSet empty =
      labeled_segments_for_training({}, dir, 1024, 512, mask, 1);
  CHECK(empty.labels.empty());
  CHECK(empty.spectrograms.empty());
  fs::remove_all(dir);
}

TEST_CASE("wav files round-trip within PCM16 quantization") {
  const auto dir = testutil::scratch_dir("wav");
  auto [w, gt] = generate_event(DegradationProfile{}, DisturbanceSpec{}, 5);
  write_wav_pcm16(dir / "e.wav", w);
  const Waveform r = read_wav(dir / "e.wav");
  REQUIRE(r.samples.size() == w.samples.size());
  CHECK(r.sample_rate == w.sample_rate);
  CHECK(r.event_id == "e");
  double max_err = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    max_err = std::max(max_err, std::abs(r.samples[i] - w.samples[i]));
  }
  CHECK(max_err <= 1.0 / 32768.0 + 1e-12);
  fs::remove_all(dir);
}

}  // TEST_SUITE
