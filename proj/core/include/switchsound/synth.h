// switchsound/synth.h

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

#ifndef SWITCHSOUND_SYNTH_H_
#define SWITCHSOUND_SYNTH_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "switchsound/dsp.h"
#include "switchsound/phase.h"
#include "switchsound/snmf.h"

namespace switchsound {

// Machine condition along the three degradation axes the test rig exercises.
// Defaults describe a healthy machine.
struct DegradationProfile {
  int grease_pushes = 4;        // 0 = fully wiped, >= 4 = normal lubrication
  int adhesion_sixth_turns = 0; // 0 = normal, 17 = switching failure
  int lock_ratio_left = 5;      // left:right gap ratio; 5 = 5:5 normal, 10 = 10:0 failure
};

enum class DisturbanceKind { kNone, kTrainPass, kShinkansenViaduct, kRain, kBirds, kCar };

std::string_view disturbance_name(DisturbanceKind k);
std::optional<DisturbanceKind> parse_disturbance(std::string_view name);

struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::kNone;
  double onset_s = 0.0;
  double duration_s = 0.0;
  double gain = 0.0;
};

// Everything a test needs to verify pipeline output against construction.
struct GroundTruth {
  std::array<std::pair<double, double>, kNumPhases> phase_windows{};  // (start_s, end_s)
  bool switching_failure = false;
  DegradationProfile profile;
  DisturbanceSpec disturbance;

  double duration_s() const { return phase_windows.back().second; }
};

// Every synthesis parameter in one block; nothing is hidden from tests.
// The acoustic correlates are phenomenological, chosen so each degradation
// axis has a controllable monotone effect, not a mechanical model.
struct SynthConfig {
  double sample_rate = 16000.0;

  // Phase durations, seconds, in phase order (MovingRail stretches with
  // adhesion misadjustment).
  std::array<double, kNumPhases> phase_durations = {0.3, 0.5, 0.6, 3.0, 0.6, 0.5, 0.3};

  // Stationary noise floor, present throughout.
  double floor_amp = 0.002;
  double floor_band_low_hz = 30.0, floor_band_high_hz = 7900.0;
  double floor_gain_jitter_log = 0.10;  // one-sided log-uniform, per event

  // Motor hum: harmonic stack with onset/offset ramps, slow amplitude
  // flicker, and a per-event level jitter.
  double motor_fundamental_hz = 100.0;
  int motor_harmonics = 7;
  double motor_amp = 0.10;
  double motor_gain_jitter_log = 0.30;
  double motor_flicker = 0.04;
  double motor_ramp_s = 0.06;

  // Relay clicks: short broadband bursts opening and closing the event.
  std::array<double, 3> click_times_s = {0.04, 0.15, 0.26};  // offsets into the routine phases
  double click_dur_s = 0.005;
  double click_amp = 0.18;  // rms of the burst; peaks stay inside PCM16 range
  double click_gain_jitter_log = 0.10;
  double click_time_jitter_s = 0.003;

  // Lock-piece sounds: a resonant scrape through both safety phases plus a
  // damped impact when the piece releases/engages.
  double scrape_band_low_hz = 1800.0, scrape_band_high_hz = 2400.0;
  double scrape_amp = 0.06;
  double scrape_gain_jitter_log = 0.15;
  double impact_freq_hz = 2000.0;
  double impact_tau_s = 0.022;
  double impact_amp_deact = 0.32;
  double impact_amp_act = 0.40;
  double impact_gain_jitter_log = 0.08;  // symmetric
  double impact_time_jitter_s = 0.003;
  double impact_offset_deact_s = 0.10;
  double impact_offset_act_s = 0.30;

  // Rod friction: band noise, loudest while the rail moves, faint elsewhere.
  // The band sits above the lock-piece resonance so the two sources stay
  // spectrally separable.
  double friction_band_low_hz = 2600.0, friction_band_high_hz = 5000.0;
  double friction_amp_moving = 0.08;
  double friction_amp_safety = 0.012;
  double friction_amp_idle = 0.012;
  double friction_gain_jitter_log = 0.15;

  // Degradation-to-acoustics coefficients.
  double grease_friction_gain = 0.5;    // friction gain factor per missing push
  double adhesion_stretch = 0.04;       // MovingRail duration factor per sixth-turn
  double adhesion_harmonic_gain = 0.05; // motor harmonic raise per sixth-turn, MovingRail only
  double lock_impact_shift_s = 0.010;   // ActivateSafety impact shift per ratio step from 5
  double lock_impact_gain = 0.15;       // engagement-impact amplitude raise per ratio step

  // Lock deviation beyond 8 adds a secondary engagement impact.
  int secondary_impact_min_ratio = 9;
  double secondary_impact_gap_s = 0.045;
  double secondary_impact_gain = 0.85;

  // Failure endpoints render a strained (stalled) rail movement: the motor
  // boosts and the rod grinds louder over the final stretch of MovingRail.
  double stall_start_fraction = 0.6;
  double stall_motor_boost = 1.15;
  double stall_friction_boost = 1.3;

  // Disturbances (additive, never move ground-truth windows).
  double disturbance_fade_s = 0.3;
  double train_band_low_hz = 40.0, train_band_high_hz = 400.0, train_amp = 0.12;
  double train_dur_min_s = 2.0, train_dur_max_s = 4.0;
  double shinkansen_band_low_hz = 6200.0, shinkansen_band_high_hz = 7800.0, shinkansen_amp = 0.10;
  double shinkansen_dur_min_s = 2.5, shinkansen_dur_max_s = 4.0;
  double rain_band_low_hz = 3000.0, rain_band_high_hz = 7900.0, rain_amp = 0.05;
  double rain_dur_s = 30.0;  // clipped to the event
  double car_band_low_hz = 60.0, car_band_high_hz = 500.0, car_amp = 0.08;
  double car_dur_min_s = 1.0, car_dur_max_s = 2.0;
  double bird_chirp_low_hz = 2500.0, bird_chirp_high_hz = 5000.0;
  double bird_chirp_dur_s = 0.08, bird_amp = 0.15;
  double bird_chirps_per_s = 2.0;
  double bird_dur_min_s = 2.0, bird_dur_max_s = 4.0;
  double disturbance_onset_min_s = 0.3, disturbance_onset_max_s = 2.0;
};

// Renders one switching event. Deterministic given (profile, disturbance,
// seed); each sound component draws from an independent substream, so adding
// a disturbance never changes the underlying switch sound.
std::pair<Waveform, GroundTruth> generate_event(const DegradationProfile& profile,
                                                const DisturbanceSpec& disturbance,
                                                std::uint64_t seed,
                                                const SynthConfig& cfg = {});

// Randomized onset/duration/gain for a disturbance kind, from cfg defaults.
DisturbanceSpec make_disturbance(DisturbanceKind kind, std::uint64_t seed, const SynthConfig& cfg);

// Ground-truth phase boundaries on the analysis frame grid.
std::array<int, kNumPhases + 1> gt_frame_boundaries(const GroundTruth& gt, double hop_s,
                                                    int n_frames);

// One manifest record per generated event; the ground truth tests consume.
struct ManifestEntry {
  std::string file;  // wav path relative to the manifest
  std::string event_id;
  double sample_rate = 0.0;
  DegradationProfile profile;
  DisturbanceSpec disturbance;
  std::array<std::pair<double, double>, kNumPhases> phase_windows{};
  bool switching_failure = false;
  std::uint64_t seed = 0;

  bool is_clean() const { return disturbance.kind == DisturbanceKind::kNone; }
  bool is_normal_profile() const {
    return profile.grease_pushes >= 4 && profile.adhesion_sixth_turns == 0 &&
           profile.lock_ratio_left == 5;
  }
};

// How many events of each flavor a corpus holds. Ladder counts are events
// per step over the full step range of that axis.
struct CorpusSpec {
  int clean = 0;
  int grease_per_step = 0;    // pushes 0..4
  int adhesion_per_step = 0;  // sixth-turns 0..17
  int lock_per_step = 0;      // ratios 5..10
  std::map<DisturbanceKind, int> disturbed;  // counts per kind, normal profile
};

CorpusSpec load_corpus_spec(const std::filesystem::path& path);

// Writes WAVs plus manifest.jsonl into out_dir and returns the entries.
std::vector<ManifestEntry> generate_corpus(const CorpusSpec& spec,
                                           const std::filesystem::path& out_dir,
                                           std::uint64_t seed, const SynthConfig& cfg = {});

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Spectrograms plus per-source labels derived from ground-truth windows.
struct LabeledTrainingSet {
  std::map<std::string, Spectrogram> spectrograms;
  std::vector<SourceLabel> labels;
};

// Converts ground-truth phase windows of clean normal events into per-source
// labeled frame ranges. Each source is labeled on the phases where it is
// heard with the fewest other sources: Relay on the routine phases, Motor on
// the idle phases, LockPiece on the safety phases, Rod on MovingRail.
// Contaminated or degraded events are rejected (skipped).
LabeledTrainingSet labeled_segments_for_training(const std::vector<ManifestEntry>& entries,
                                                 const std::filesystem::path& wav_dir,
                                                 int window_len, int hop, const BandMask& mask,
                                                 int inset_frames = 1);

}  // namespace switchsound

#endif  // SWITCHSOUND_SYNTH_H_
