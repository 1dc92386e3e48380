// core/src/synth.cc

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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "switchsound/rng.h"
#include "switchsound/textio.h"
#include "switchsound/version.h"
#include "switchsound/wav.h"

namespace switchsound {

namespace {

using nlohmann::json;

// Independent substreams per sound component, so changing one component's
// draw (e.g. adding a disturbance) never perturbs the others.
enum Stream : std::uint64_t {
  kFloorStream = 1,
  kMotorStream,
  kFrictionStream,
  kScrapeStream,
  kImpactStream,
  kClickStream,
  kDisturbanceStream,
  kFlickerStream,
};

// Noise loops repeat with the analysis hop so their frame spectra are
// constant within an event: the per-event texture is random (phases), the
// level is the controlled quantity.
constexpr int kNoiseLoopLen = 512;

// Periodic band-limited noise, unit rms: deterministic flat magnitude
// profile, random phases per event.
std::vector<double> noise_loop(Rng& rng, double sr, double lo_hz, double hi_hz) {
  std::vector<double> loop(kNoiseLoopLen, 0.0);
  const double bin_hz = sr / kNoiseLoopLen;
  int count = 0;
  for (int k = 1; k < kNoiseLoopLen / 2; ++k) {
    const double hz = k * bin_hz;
    if (hz < lo_hz || hz > hi_hz) continue;
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    for (int n = 0; n < kNoiseLoopLen; ++n) {
      loop[static_cast<std::size_t>(n)] +=
          std::cos(2.0 * M_PI * k * n / static_cast<double>(kNoiseLoopLen) + phase);
    }
    ++count;
  }
  if (count == 0) throw std::runtime_error("noise_loop: empty band");
  double rms = 0.0;
  for (double v : loop) rms += v * v;
  rms = std::sqrt(rms / kNoiseLoopLen);
  for (double& v : loop) v /= rms;
  return loop;
}

// Piecewise-constant envelope with linear transitions of `ramp` samples
// centered on each breakpoint. steps[0] must start at sample 0.
std::vector<double> step_envelope(long n, const std::vector<std::pair<long, double>>& steps,
                                  long ramp) {
  std::vector<double> env(static_cast<std::size_t>(n));
  const long half = ramp / 2;
  std::size_t j = 0;
  for (long i = 0; i < n; ++i) {
    while (j + 1 < steps.size() && i >= steps[j + 1].first + half) ++j;
    double v = steps[j].second;
    if (j + 1 < steps.size()) {
      const long b = steps[j + 1].first;
      if (i >= b - half) {
        const double frac = static_cast<double>(i - (b - half)) / static_cast<double>(ramp);
        v = steps[j].second + (steps[j + 1].second - steps[j].second) * frac;
      }
    }
    env[static_cast<std::size_t>(i)] = v;
  }
  return env;
}

void add_noise(std::vector<double>& buf, const std::vector<double>& loop,
               const std::vector<double>& gain) {
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf[i] += loop[i % loop.size()] * gain[i];
  }
}

void add_damped_impact(std::vector<double>& buf, double sr, double t0, double amp, double freq,
                       double tau) {
  const long start = std::lround(t0 * sr);
  const long len = std::lround(6.0 * tau * sr);
  for (long i = 0; i < len; ++i) {
    const long idx = start + i;
    if (idx < 0 || idx >= static_cast<long>(buf.size())) continue;
    const double t = static_cast<double>(i) / sr;
    buf[static_cast<std::size_t>(idx)] +=
        amp * std::exp(-t / tau) * std::sin(2.0 * M_PI * freq * t);
  }
}

void add_click(std::vector<double>& buf, Rng& rng, double sr, double t0, double dur, double amp) {
  const long start = std::lround(t0 * sr);
  const long len = std::max<long>(1, std::lround(dur * sr));
  for (long i = 0; i < len; ++i) {
    const long idx = start + i;
    const double env = 0.5 * (1.0 - std::cos(2.0 * M_PI * (i + 1) / (len + 1)));
    const double v = amp * env * rng.normal();
    if (idx < 0 || idx >= static_cast<long>(buf.size())) continue;
    buf[static_cast<std::size_t>(idx)] += v;
  }
}

// Raised-cosine fade in/out around a disturbance window.
double fade_gain(double t, double onset, double end, double fade) {
  if (t < onset || t > end) return 0.0;
  if (t < onset + fade) return 0.5 * (1.0 - std::cos(M_PI * (t - onset) / fade));
  if (t > end - fade) return 0.5 * (1.0 - std::cos(M_PI * (end - t) / fade));
  return 1.0;
}

void render_disturbance(std::vector<double>& buf, const DisturbanceSpec& d, double sr,
                        const SynthConfig& cfg, Rng& rng) {
  if (d.kind == DisturbanceKind::kNone || d.gain <= 0.0 || d.duration_s <= 0.0) return;
  const double total_s = static_cast<double>(buf.size()) / sr;
  const double onset = std::clamp(d.onset_s, 0.0, total_s);
  const double end = std::min(total_s, onset + d.duration_s);
  if (end <= onset) return;

  if (d.kind == DisturbanceKind::kBirds) {
    const int n_chirps = std::max(1, static_cast<int>((end - onset) * cfg.bird_chirps_per_s));
    for (int c = 0; c < n_chirps; ++c) {
      const double t0 = rng.uniform(onset, std::max(onset, end - cfg.bird_chirp_dur_s));
      const double f0 = cfg.bird_chirp_low_hz;
      const double f1 = rng.uniform(cfg.bird_chirp_low_hz, cfg.bird_chirp_high_hz);
      const long start = std::lround(t0 * sr);
      const long len = std::lround(cfg.bird_chirp_dur_s * sr);
      for (long i = 0; i < len; ++i) {
        const long idx = start + i;
        if (idx < 0 || idx >= static_cast<long>(buf.size())) continue;
        const double t = static_cast<double>(i) / sr;
        const double frac = static_cast<double>(i) / static_cast<double>(len);
        const double env = std::sin(M_PI * frac);
        const double phase =
            2.0 * M_PI * (f0 * t + 0.5 * (f1 - f0) / cfg.bird_chirp_dur_s * t * t);
        buf[static_cast<std::size_t>(idx)] += d.gain * env * std::sin(phase);
      }
    }
    return;
  }

  double lo = 0.0, hi = 0.0;
  switch (d.kind) {
    case DisturbanceKind::kTrainPass:
      lo = cfg.train_band_low_hz;
      hi = cfg.train_band_high_hz;
      break;
    case DisturbanceKind::kShinkansenViaduct:
      lo = cfg.shinkansen_band_low_hz;
      hi = cfg.shinkansen_band_high_hz;
      break;
    case DisturbanceKind::kRain:
      lo = cfg.rain_band_low_hz;
      hi = cfg.rain_band_high_hz;
      break;
    case DisturbanceKind::kCar:
      lo = cfg.car_band_low_hz;
      hi = cfg.car_band_high_hz;
      break;
    default:
      return;
  }
  const std::vector<double> loop = noise_loop(rng, sr, lo, hi);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const double t = static_cast<double>(i) / sr;
    const double g = fade_gain(t, onset, end, cfg.disturbance_fade_s);
    if (g > 0.0) buf[i] += d.gain * g * loop[i % loop.size()];
  }
}

json profile_to_json(const DegradationProfile& p) {
  return json{{"grease_pushes", p.grease_pushes},
              {"adhesion_sixth_turns", p.adhesion_sixth_turns},
              {"lock_ratio_left", p.lock_ratio_left}};
}

DegradationProfile profile_from_json(const json& j) {
  DegradationProfile p;
  p.grease_pushes = j.at("grease_pushes").get<int>();
  p.adhesion_sixth_turns = j.at("adhesion_sixth_turns").get<int>();
  p.lock_ratio_left = j.at("lock_ratio_left").get<int>();
  return p;
}

json disturbance_to_json(const DisturbanceSpec& d) {
  return json{{"kind", std::string(disturbance_name(d.kind))},
              {"onset_s", d.onset_s},
              {"duration_s", d.duration_s},
              {"gain", d.gain}};
}

DisturbanceSpec disturbance_from_json(const json& j) {
  DisturbanceSpec d;
  const auto kind = parse_disturbance(j.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("manifest: unknown disturbance kind");
  d.kind = *kind;
  d.onset_s = j.at("onset_s").get<double>();
  d.duration_s = j.at("duration_s").get<double>();
  d.gain = j.at("gain").get<double>();
  return d;
}

}  // namespace

std::string_view disturbance_name(DisturbanceKind k) {
  switch (k) {
    case DisturbanceKind::kNone: return "None";
    case DisturbanceKind::kTrainPass: return "TrainPass";
    case DisturbanceKind::kShinkansenViaduct: return "ShinkansenViaduct";
    case DisturbanceKind::kRain: return "Rain";
    case DisturbanceKind::kBirds: return "Birds";
    case DisturbanceKind::kCar: return "Car";
  }
  return "?";
}

std::optional<DisturbanceKind> parse_disturbance(std::string_view name) {
  for (DisturbanceKind k :
       {DisturbanceKind::kNone, DisturbanceKind::kTrainPass, DisturbanceKind::kShinkansenViaduct,
        DisturbanceKind::kRain, DisturbanceKind::kBirds, DisturbanceKind::kCar}) {
    if (disturbance_name(k) == name) return k;
  }
  return std::nullopt;
}

DisturbanceSpec make_disturbance(DisturbanceKind kind, std::uint64_t seed,
                                 const SynthConfig& cfg) {
  DisturbanceSpec d;
  d.kind = kind;
  if (kind == DisturbanceKind::kNone) return d;
  Rng rng(mix_seed(seed, 0x5eedu));
  d.onset_s = rng.uniform(cfg.disturbance_onset_min_s, cfg.disturbance_onset_max_s);
  switch (kind) {
    case DisturbanceKind::kTrainPass:
      d.duration_s = rng.uniform(cfg.train_dur_min_s, cfg.train_dur_max_s);
      d.gain = cfg.train_amp;
      break;
    case DisturbanceKind::kShinkansenViaduct:
      d.duration_s = rng.uniform(cfg.shinkansen_dur_min_s, cfg.shinkansen_dur_max_s);
      d.gain = cfg.shinkansen_amp;
      break;
    case DisturbanceKind::kRain:
      d.duration_s = cfg.rain_dur_s;
      d.gain = cfg.rain_amp;
      break;
    case DisturbanceKind::kBirds:
      d.duration_s = rng.uniform(cfg.bird_dur_min_s, cfg.bird_dur_max_s);
      d.gain = cfg.bird_amp;
      break;
    case DisturbanceKind::kCar:
      d.duration_s = rng.uniform(cfg.car_dur_min_s, cfg.car_dur_max_s);
      d.gain = cfg.car_amp;
      break;
    default:
      break;
  }
  return d;
}

std::pair<Waveform, GroundTruth> generate_event(const DegradationProfile& profile,
                                                const DisturbanceSpec& disturbance,
                                                std::uint64_t seed, const SynthConfig& cfg) {
  if (profile.grease_pushes < 0 || profile.adhesion_sixth_turns < 0 ||
      profile.adhesion_sixth_turns > 17 || profile.lock_ratio_left < 0 ||
      profile.lock_ratio_left > 10) {
    throw std::runtime_error("generate_event: profile out of range");
  }
  const double sr = cfg.sample_rate;
  const int turns = profile.adhesion_sixth_turns;
  const int ratio = profile.lock_ratio_left;
  const bool failure = turns >= 17 || ratio >= 10;

  // Phase boundaries in samples; MovingRail stretches with adhesion turns.
  std::array<double, kNumPhases> durations = cfg.phase_durations;
  durations[static_cast<std::size_t>(SwitchingPhase::kMovingRail)] *=
      1.0 + cfg.adhesion_stretch * turns;
  std::array<long, kNumPhases + 1> b{};
  b[0] = 0;
  for (int p = 0; p < kNumPhases; ++p) {
    b[static_cast<std::size_t>(p) + 1] =
        b[static_cast<std::size_t>(p)] + std::lround(durations[static_cast<std::size_t>(p)] * sr);
  }
  const long n = b.back();

  GroundTruth gt;
  gt.profile = profile;
  gt.disturbance = disturbance;
  gt.switching_failure = failure;
  for (int p = 0; p < kNumPhases; ++p) {
    gt.phase_windows[static_cast<std::size_t>(p)] = {
        static_cast<double>(b[static_cast<std::size_t>(p)]) / sr,
        static_cast<double>(b[static_cast<std::size_t>(p) + 1]) / sr};
  }

  std::vector<double> buf(static_cast<std::size_t>(n), 0.0);
  const long ramp = std::lround(0.016 * sr);

  // Stationary floor.
  {
    Rng rng(mix_seed(seed, kFloorStream));
    const std::vector<double> loop = noise_loop(rng, sr, cfg.floor_band_low_hz,
                                                cfg.floor_band_high_hz);
    const double g = cfg.floor_amp * std::exp(rng.uniform(0.0, cfg.floor_gain_jitter_log));
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g * loop[i % loop.size()];
  }

  // Motor hum: runs from the first idle phase to the end of the second one.
  {
    Rng rng(mix_seed(seed, kMotorStream));
    const double jitter = std::exp(rng.uniform(0.0, cfg.motor_gain_jitter_log));
    const double raise = 1.0 + cfg.adhesion_harmonic_gain * turns;
    std::vector<std::pair<long, double>> steps = {{0, 0.0}, {b[1], 1.0}, {b[3], raise}};
    if (failure && turns >= 17) {
      const long stall = b[3] + std::lround(cfg.stall_start_fraction *
                                            static_cast<double>(b[4] - b[3]));
      steps.push_back({stall, raise * cfg.stall_motor_boost});
    }
    steps.push_back({b[4], 1.0});
    steps.push_back({b[6], 0.0});
    std::vector<double> env = step_envelope(n, steps, ramp);

    // Slow per-frame amplitude flicker, linearly interpolated.
    Rng flick_rng(mix_seed(seed, kFlickerStream));
    const long flick_hop = kNoiseLoopLen;
    const long n_targets = n / flick_hop + 2;
    std::vector<double> targets(static_cast<std::size_t>(n_targets));
    for (auto& t : targets) t = 1.0 + flick_rng.uniform(-cfg.motor_flicker, cfg.motor_flicker);

    std::vector<double> phases(static_cast<std::size_t>(cfg.motor_harmonics));
    for (auto& p : phases) p = rng.uniform(0.0, 2.0 * M_PI);

    for (long i = 0; i < n; ++i) {
      const double e = env[static_cast<std::size_t>(i)];
      if (e <= 0.0) continue;
      const long ti = i / flick_hop;
      const double frac = static_cast<double>(i - ti * flick_hop) / flick_hop;
      const double flick = targets[static_cast<std::size_t>(ti)] * (1.0 - frac) +
                           targets[static_cast<std::size_t>(ti) + 1] * frac;
      const double t = static_cast<double>(i) / sr;
      double v = 0.0;
      for (int k = 1; k <= cfg.motor_harmonics; ++k) {
        v += (cfg.motor_amp / k) *
             std::sin(2.0 * M_PI * cfg.motor_fundamental_hz * k * t +
                      phases[static_cast<std::size_t>(k) - 1]);
      }
      buf[static_cast<std::size_t>(i)] += v * e * jitter * flick;
    }
  }

  // Rod friction: loudest while the rail moves, faint during the safety and
  // idle phases. Less grease means louder friction everywhere it occurs.
  {
    Rng rng(mix_seed(seed, kFrictionStream));
    const std::vector<double> loop = noise_loop(rng, sr, cfg.friction_band_low_hz,
                                                cfg.friction_band_high_hz);
    const double grease_factor =
        1.0 + cfg.grease_friction_gain * (4 - std::min(profile.grease_pushes, 4));
    const double jitter = std::exp(rng.uniform(0.0, cfg.friction_gain_jitter_log));
    const double g = grease_factor * jitter;
    std::vector<std::pair<long, double>> steps = {{0, 0.0},
                                                  {b[1], cfg.friction_amp_idle * g},
                                                  {b[2], cfg.friction_amp_safety * g},
                                                  {b[3], cfg.friction_amp_moving * g}};
    if (failure) {
      const long stall = b[3] + std::lround(cfg.stall_start_fraction *
                                            static_cast<double>(b[4] - b[3]));
      steps.push_back({stall, cfg.friction_amp_moving * g * cfg.stall_friction_boost});
    }
    steps.push_back({b[4], cfg.friction_amp_safety * g});
    steps.push_back({b[5], cfg.friction_amp_idle * g});
    steps.push_back({b[6], 0.0});
    const std::vector<double> env = step_envelope(n, steps, ramp);
    add_noise(buf, loop, env);
  }

  // Lock-piece scrape through both safety phases.
  {
    Rng rng(mix_seed(seed, kScrapeStream));
    const std::vector<double> loop =
        noise_loop(rng, sr, cfg.scrape_band_low_hz, cfg.scrape_band_high_hz);
    const double g = cfg.scrape_amp * std::exp(rng.uniform(0.0, cfg.scrape_gain_jitter_log));
    const std::vector<double> env = step_envelope(
        n, {{0, 0.0}, {b[2], g}, {b[3], 0.0}, {b[4], g}, {b[5], 0.0}}, ramp);
    add_noise(buf, loop, env);
  }

  // Lock-piece impacts. Lock deviation shifts the engagement impact, makes
  // it strike harder, and past the secondary threshold the piece bounces
  // before seating. At the 10:0 endpoint it rattles without seating.
  {
    Rng rng(mix_seed(seed, kImpactStream));
    const double tj = cfg.impact_time_jitter_s;
    const double t_deact = static_cast<double>(b[2]) / sr + cfg.impact_offset_deact_s +
                           rng.uniform(-tj, tj);
    const double a_deact = cfg.impact_amp_deact *
                           std::exp(rng.uniform(-cfg.impact_gain_jitter_log,
                                                cfg.impact_gain_jitter_log));
    add_damped_impact(buf, sr, t_deact, a_deact, cfg.impact_freq_hz, cfg.impact_tau_s);

    const double shift = cfg.lock_impact_shift_s * (ratio - 5);
    const double t_act = static_cast<double>(b[4]) / sr + cfg.impact_offset_act_s + shift +
                         rng.uniform(-tj, tj);
    const double a_act = cfg.impact_amp_act *
                         (1.0 + cfg.lock_impact_gain * std::abs(ratio - 5)) *
                         std::exp(rng.uniform(-cfg.impact_gain_jitter_log,
                                              cfg.impact_gain_jitter_log));
    add_damped_impact(buf, sr, t_act, a_act, cfg.impact_freq_hz, cfg.impact_tau_s);
    if (ratio >= cfg.secondary_impact_min_ratio) {
      add_damped_impact(buf, sr, t_act + cfg.secondary_impact_gap_s,
                        a_act * cfg.secondary_impact_gain, cfg.impact_freq_hz, cfg.impact_tau_s);
    }
    if (ratio >= 10) {
      add_damped_impact(buf, sr, t_act + 2.0 * cfg.secondary_impact_gap_s, a_act * 0.6,
                        cfg.impact_freq_hz, cfg.impact_tau_s);
    }
  }

  // Relay clicks opening and closing the event.
  {
    Rng rng(mix_seed(seed, kClickStream));
    for (long base : {b[0], b[6]}) {
      for (double offset : cfg.click_times_s) {
        const double t0 = static_cast<double>(base) / sr + offset +
                          rng.uniform(-cfg.click_time_jitter_s, cfg.click_time_jitter_s);
        const double amp =
            cfg.click_amp * std::exp(rng.uniform(0.0, cfg.click_gain_jitter_log));
        add_click(buf, rng, sr, t0, cfg.click_dur_s, amp);
      }
    }
  }

  {
    Rng rng(mix_seed(seed, kDisturbanceStream));
    render_disturbance(buf, disturbance, sr, cfg, rng);
  }

  Waveform w;
  w.samples = std::move(buf);
  w.sample_rate = sr;
  return {std::move(w), gt};
}

std::array<int, kNumPhases + 1> gt_frame_boundaries(const GroundTruth& gt, double hop_s,
                                                    int n_frames) {
  std::array<int, kNumPhases + 1> out{};
  out[0] = 0;
  for (int p = 0; p < kNumPhases; ++p) {
    const double end_s = gt.phase_windows[static_cast<std::size_t>(p)].second;
    out[static_cast<std::size_t>(p) + 1] =
        std::min(n_frames, static_cast<int>(std::lround(end_s / hop_s)));
  }
  out[kNumPhases] = n_frames;
  return out;
}

CorpusSpec load_corpus_spec(const std::filesystem::path& path) {
  const TomlLite toml = parse_toml_lite_file(path);
  CorpusSpec spec;
  for (const auto& [section, kv] : toml) {
    if (section == "corpus") {
      for (const auto& [key, value] : kv) {
        if (key == "clean") {
          spec.clean = std::stoi(value);
        } else if (key == "grease_per_step") {
          spec.grease_per_step = std::stoi(value);
        } else if (key == "adhesion_per_step") {
          spec.adhesion_per_step = std::stoi(value);
        } else if (key == "lock_per_step") {
          spec.lock_per_step = std::stoi(value);
        } else {
          throw std::runtime_error("corpus spec: unknown key [corpus] " + key);
        }
      }
    } else if (section == "disturbed") {
      for (const auto& [key, value] : kv) {
        const auto kind = parse_disturbance(key);
        if (!kind || *kind == DisturbanceKind::kNone) {
          throw std::runtime_error("corpus spec: unknown disturbance kind " + key);
        }
        spec.disturbed[*kind] = std::stoi(value);
      }
    } else {
      throw std::runtime_error("corpus spec: unknown section [" + section + "]");
    }
  }
  return spec;
}

std::vector<ManifestEntry> generate_corpus(const CorpusSpec& spec,
                                           const std::filesystem::path& out_dir,
                                           std::uint64_t seed, const SynthConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create corpus directory: " + out_dir.string());

  struct Planned {
    DegradationProfile profile;
    DisturbanceKind kind;
  };
  std::vector<Planned> plan;
  for (int i = 0; i < spec.clean; ++i) plan.push_back({DegradationProfile{}, DisturbanceKind::kNone});
  for (int step = 0; step <= 4; ++step) {
    for (int i = 0; i < spec.grease_per_step; ++i) {
      plan.push_back({DegradationProfile{step, 0, 5}, DisturbanceKind::kNone});
    }
  }
  for (int step = 0; step <= 17; ++step) {
    for (int i = 0; i < spec.adhesion_per_step; ++i) {
      plan.push_back({DegradationProfile{4, step, 5}, DisturbanceKind::kNone});
    }
  }
  for (int step = 5; step <= 10; ++step) {
    for (int i = 0; i < spec.lock_per_step; ++i) {
      plan.push_back({DegradationProfile{4, 0, step}, DisturbanceKind::kNone});
    }
  }
  for (const auto& [kind, count] : spec.disturbed) {
    for (int i = 0; i < count; ++i) plan.push_back({DegradationProfile{}, kind});
  }

  std::vector<ManifestEntry> entries;
  entries.reserve(plan.size());
  int index = 0;
  for (const Planned& p : plan) {
    const std::uint64_t event_seed = mix_seed(seed, static_cast<std::uint64_t>(index));
    const DisturbanceSpec d = make_disturbance(p.kind, event_seed, cfg);
    auto [w, gt] = generate_event(p.profile, d, event_seed, cfg);

    char name[32];
    std::snprintf(name, sizeof(name), "ev_%05d", index);
    w.event_id = name;
    const std::string file = std::string(name) + ".wav";
    write_wav_pcm16(out_dir / file, w);

    ManifestEntry e;
    e.file = file;
    e.event_id = name;
    e.sample_rate = cfg.sample_rate;
    e.profile = p.profile;
    e.disturbance = d;
    e.phase_windows = gt.phase_windows;
    e.switching_failure = gt.switching_failure;
    e.seed = event_seed;
    entries.push_back(std::move(e));
    ++index;
  }

  write_manifest(out_dir / "manifest.jsonl", entries);
  return entries;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ostringstream out;
  for (const ManifestEntry& e : entries) {
    json row;
    row["v"] = kManifestVersion;
    row["file"] = e.file;
    row["event_id"] = e.event_id;
    row["sample_rate"] = e.sample_rate;
    row["profile"] = profile_to_json(e.profile);
    row["disturbance"] = disturbance_to_json(e.disturbance);
    json windows = json::array();
    for (const auto& [s, t] : e.phase_windows) windows.push_back(json::array({s, t}));
    row["phase_windows"] = windows;
    row["switching_failure"] = e.switching_failure;
    row["seed"] = e.seed;
    out << row.dump() << "\n";
  }
  write_text_file(path, out.str());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::vector<ManifestEntry> entries;
  std::istringstream in(read_text_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("manifest parse error at line " + std::to_string(lineno) + ": " +
                               e.what());
    }
    if (row.at("v").get<int>() != kManifestVersion) {
      throw std::runtime_error("manifest version mismatch at line " + std::to_string(lineno));
    }
    ManifestEntry e;
    e.file = row.at("file").get<std::string>();
    e.event_id = row.at("event_id").get<std::string>();
    e.sample_rate = row.at("sample_rate").get<double>();
    e.profile = profile_from_json(row.at("profile"));
    e.disturbance = disturbance_from_json(row.at("disturbance"));
    const auto& windows = row.at("phase_windows");
    if (windows.size() != kNumPhases) {
      throw std::runtime_error("manifest: wrong number of phase windows");
    }
    for (int p = 0; p < kNumPhases; ++p) {
      e.phase_windows[static_cast<std::size_t>(p)] = {windows[p][0].get<double>(),
                                                      windows[p][1].get<double>()};
    }
    e.switching_failure = row.at("switching_failure").get<bool>();
    e.seed = row.at("seed").get<std::uint64_t>();
    entries.push_back(std::move(e));
  }
  return entries;
}

LabeledTrainingSet labeled_segments_for_training(const std::vector<ManifestEntry>& entries,
                                                 const std::filesystem::path& wav_dir,
                                                 int window_len, int hop, const BandMask& mask,
                                                 int inset_frames) {
  // Each source labeled where it is heard with the fewest other components.
  static const std::vector<std::pair<SourceName, std::vector<SwitchingPhase>>> kLabelingPhases = {
      {SourceName::kRelay, {SwitchingPhase::kStartingRoutine, SwitchingPhase::kEndingRoutine}},
      {SourceName::kMotor, {SwitchingPhase::kIdleBeforeMoving, SwitchingPhase::kIdleAfterMoving}},
      {SourceName::kLockPiece,
       {SwitchingPhase::kDeactivateSafety, SwitchingPhase::kActivateSafety}},
      {SourceName::kRod, {SwitchingPhase::kMovingRail}},
  };

  LabeledTrainingSet out;
  std::map<SourceName, std::vector<LabelSegment>> segments;
  for (const ManifestEntry& e : entries) {
    if (!e.is_clean() || !e.is_normal_profile() || e.switching_failure) continue;
    const Waveform w = read_wav(wav_dir / e.file);
    Spectrogram spec = apply_band_mask(stft(w, window_len, hop), mask);
    const double hop_s = spec.hop_s;
    const int n_frames = spec.n_frames();

    GroundTruth gt;
    gt.phase_windows = e.phase_windows;
    const auto bounds = gt_frame_boundaries(gt, hop_s, n_frames);
    for (const auto& [source, phases] : kLabelingPhases) {
      for (SwitchingPhase p : phases) {
        const int lo = bounds[static_cast<std::size_t>(p)] + inset_frames;
        const int hi = bounds[static_cast<std::size_t>(p) + 1] - inset_frames;
        if (hi > lo) segments[source].push_back({e.event_id, lo, hi});
      }
    }
    out.spectrograms.emplace(e.event_id, std::move(spec));
  }

  for (const auto& [source, segs] : segments) {
    SourceLabel label;
    label.name = source;
    label.segments = segs;
    out.labels.push_back(std::move(label));
  }
  return out;
}

}  // namespace switchsound
