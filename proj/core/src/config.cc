// core/src/config.cc

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

#include "switchsound/config.h"

#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

#include "switchsound/textio.h"

namespace switchsound {

namespace {

struct FieldRef {
  const char* section;
  const char* key;
  std::variant<int*, double*> ptr;
};

// Single binding table: the dump, the parser and the hash all walk it, so
// they cannot drift apart.
std::vector<FieldRef> config_fields(Config& c) {
  std::vector<FieldRef> f;
  auto add = [&f](const char* s, const char* k, auto* p) { f.push_back({s, k, p}); };

  add("dsp", "sample_rate", &c.dsp.sample_rate);
  add("dsp", "window", &c.dsp.window);
  add("dsp", "hop", &c.dsp.hop);

  add("mask", "low_hz", &c.mask.low_hz);
  add("mask", "high_hz", &c.mask.high_hz);

  add("snmf", "n_per_source", &c.snmf.n_per_source);
  add("snmf", "fit_iters", &c.snmf.fit_iters);
  add("snmf", "activation_iters", &c.snmf.activation_iters);
  add("snmf", "max_frames_per_source", &c.snmf.max_frames_per_source);
  add("snmf", "label_inset_frames", &c.snmf.label_inset_frames);

  add("phase", "activity_threshold", &c.phase.activity_threshold);

  add("screen", "n_bands", &c.screen.n_bands);
  add("screen", "band_low_hz", &c.screen.band_low_hz);
  add("screen", "band_high_hz", &c.screen.band_high_hz);
  add("screen", "quantile", &c.screen.quantile);

  add("model", "context", &c.model.context);
  add("model", "hidden1", &c.model.hidden1);
  add("model", "hidden2", &c.model.hidden2);
  add("model", "epochs", &c.model.epochs);
  add("model", "learning_rate", &c.model.learning_rate);
  add("model", "batch", &c.model.batch);
  add("model", "val_fraction", &c.model.val_fraction);
  add("model", "sigma_mult", &c.model.sigma_mult);

  add("persistence", "k", &c.persistence.k);

  add("ladder", "events_per_step", &c.ladder.events_per_step);

  SynthConfig& s = c.synth;
  add("synth", "phase_starting_s", &s.phase_durations[0]);
  add("synth", "phase_idle_before_s", &s.phase_durations[1]);
  add("synth", "phase_deactivate_s", &s.phase_durations[2]);
  add("synth", "phase_moving_s", &s.phase_durations[3]);
  add("synth", "phase_activate_s", &s.phase_durations[4]);
  add("synth", "phase_idle_after_s", &s.phase_durations[5]);
  add("synth", "phase_ending_s", &s.phase_durations[6]);
  add("synth", "floor_amp", &s.floor_amp);
  add("synth", "floor_band_low_hz", &s.floor_band_low_hz);
  add("synth", "floor_band_high_hz", &s.floor_band_high_hz);
  add("synth", "floor_gain_jitter_log", &s.floor_gain_jitter_log);
  add("synth", "motor_fundamental_hz", &s.motor_fundamental_hz);
  add("synth", "motor_harmonics", &s.motor_harmonics);
  add("synth", "motor_amp", &s.motor_amp);
  add("synth", "motor_gain_jitter_log", &s.motor_gain_jitter_log);
  add("synth", "motor_flicker", &s.motor_flicker);
  add("synth", "motor_ramp_s", &s.motor_ramp_s);
  add("synth", "click_time1_s", &s.click_times_s[0]);
  add("synth", "click_time2_s", &s.click_times_s[1]);
  add("synth", "click_time3_s", &s.click_times_s[2]);
  add("synth", "click_dur_s", &s.click_dur_s);
  add("synth", "click_amp", &s.click_amp);
  add("synth", "click_gain_jitter_log", &s.click_gain_jitter_log);
  add("synth", "click_time_jitter_s", &s.click_time_jitter_s);
  add("synth", "scrape_band_low_hz", &s.scrape_band_low_hz);
  add("synth", "scrape_band_high_hz", &s.scrape_band_high_hz);
  add("synth", "scrape_amp", &s.scrape_amp);
  add("synth", "scrape_gain_jitter_log", &s.scrape_gain_jitter_log);
  add("synth", "impact_freq_hz", &s.impact_freq_hz);
  add("synth", "impact_tau_s", &s.impact_tau_s);
  add("synth", "impact_amp_deact", &s.impact_amp_deact);
  add("synth", "impact_amp_act", &s.impact_amp_act);
  add("synth", "impact_gain_jitter_log", &s.impact_gain_jitter_log);
  add("synth", "impact_time_jitter_s", &s.impact_time_jitter_s);
  add("synth", "impact_offset_deact_s", &s.impact_offset_deact_s);
  add("synth", "impact_offset_act_s", &s.impact_offset_act_s);
  add("synth", "friction_band_low_hz", &s.friction_band_low_hz);
  add("synth", "friction_band_high_hz", &s.friction_band_high_hz);
  add("synth", "friction_amp_moving", &s.friction_amp_moving);
  add("synth", "friction_amp_safety", &s.friction_amp_safety);
  add("synth", "friction_amp_idle", &s.friction_amp_idle);
  add("synth", "friction_gain_jitter_log", &s.friction_gain_jitter_log);
  add("synth", "grease_friction_gain", &s.grease_friction_gain);
  add("synth", "adhesion_stretch", &s.adhesion_stretch);
  add("synth", "adhesion_harmonic_gain", &s.adhesion_harmonic_gain);
  add("synth", "lock_impact_shift_s", &s.lock_impact_shift_s);
  add("synth", "lock_impact_gain", &s.lock_impact_gain);
  add("synth", "secondary_impact_min_ratio", &s.secondary_impact_min_ratio);
  add("synth", "secondary_impact_gap_s", &s.secondary_impact_gap_s);
  add("synth", "secondary_impact_gain", &s.secondary_impact_gain);
  add("synth", "stall_start_fraction", &s.stall_start_fraction);
  add("synth", "stall_motor_boost", &s.stall_motor_boost);
  add("synth", "stall_friction_boost", &s.stall_friction_boost);
  add("synth", "disturbance_fade_s", &s.disturbance_fade_s);
  add("synth", "train_band_low_hz", &s.train_band_low_hz);
  add("synth", "train_band_high_hz", &s.train_band_high_hz);
  add("synth", "train_amp", &s.train_amp);
  add("synth", "train_dur_min_s", &s.train_dur_min_s);
  add("synth", "train_dur_max_s", &s.train_dur_max_s);
  add("synth", "shinkansen_band_low_hz", &s.shinkansen_band_low_hz);
  add("synth", "shinkansen_band_high_hz", &s.shinkansen_band_high_hz);
  add("synth", "shinkansen_amp", &s.shinkansen_amp);
  add("synth", "shinkansen_dur_min_s", &s.shinkansen_dur_min_s);
  add("synth", "shinkansen_dur_max_s", &s.shinkansen_dur_max_s);
  add("synth", "rain_band_low_hz", &s.rain_band_low_hz);
  add("synth", "rain_band_high_hz", &s.rain_band_high_hz);
  add("synth", "rain_amp", &s.rain_amp);
  add("synth", "rain_dur_s", &s.rain_dur_s);
  add("synth", "car_band_low_hz", &s.car_band_low_hz);
  add("synth", "car_band_high_hz", &s.car_band_high_hz);
  add("synth", "car_amp", &s.car_amp);
  add("synth", "car_dur_min_s", &s.car_dur_min_s);
  add("synth", "car_dur_max_s", &s.car_dur_max_s);
  add("synth", "bird_chirp_low_hz", &s.bird_chirp_low_hz);
  add("synth", "bird_chirp_high_hz", &s.bird_chirp_high_hz);
  add("synth", "bird_chirp_dur_s", &s.bird_chirp_dur_s);
  add("synth", "bird_amp", &s.bird_amp);
  add("synth", "bird_chirps_per_s", &s.bird_chirps_per_s);
  add("synth", "bird_dur_min_s", &s.bird_dur_min_s);
  add("synth", "bird_dur_max_s", &s.bird_dur_max_s);
  add("synth", "disturbance_onset_min_s", &s.disturbance_onset_min_s);
  add("synth", "disturbance_onset_max_s", &s.disturbance_onset_max_s);

  return f;
}

void finalize(Config& c) {
  // The synthesizer renders at the analysis rate; one source of truth.
  c.synth.sample_rate = c.dsp.sample_rate;
  if (c.dsp.window <= 0 || (c.dsp.window & (c.dsp.window - 1)) != 0) {
    throw std::runtime_error("config: dsp.window must be a power of two");
  }
  if (c.dsp.hop <= 0 || c.dsp.hop > c.dsp.window) {
    throw std::runtime_error("config: dsp.hop must satisfy 0 < hop <= window");
  }
  if (c.mask.low_hz >= c.mask.high_hz) {
    throw std::runtime_error("config: mask.low_hz must be below mask.high_hz");
  }
  if (c.screen.quantile <= 0.0 || c.screen.quantile >= 1.0) {
    throw std::runtime_error("config: screen.quantile must be in (0, 1)");
  }
  if (c.persistence.k < 2) throw std::runtime_error("config: persistence.k must be >= 2");
}

}  // namespace

void apply_config_file(Config& c, const std::filesystem::path& path) {
  apply_config_text(c, read_text_file(path));
}

void apply_config_text(Config& c, std::string_view text) {
  const TomlLite toml = parse_toml_lite(text);
  auto fields = config_fields(c);
  for (const auto& [section, kv] : toml) {
    for (const auto& [key, value] : kv) {
      bool found = false;
      for (FieldRef& f : fields) {
        if (section != f.section || key != f.key) continue;
        found = true;
        if (std::holds_alternative<int*>(f.ptr)) {
          *std::get<int*>(f.ptr) = std::stoi(value);
        } else {
          *std::get<double*>(f.ptr) = parse_double(value);
        }
        break;
      }
      if (!found) {
        throw std::runtime_error("config: unknown key [" + section + "] " + key);
      }
    }
  }
  finalize(c);
}

Config load_config(const std::filesystem::path& path) {
  Config c;
  apply_config_file(c, path);
  return c;
}

std::string dump_effective_config(const Config& c) {
  Config copy = c;
  copy.synth.sample_rate = copy.dsp.sample_rate;
  auto fields = config_fields(copy);
  std::ostringstream out;
  const char* current_section = "";
  for (const FieldRef& f : fields) {
    if (std::string_view(current_section) != f.section) {
      if (*current_section != '\0') out << "\n";
      out << "[" << f.section << "]\n";
      current_section = f.section;
    }
    out << f.key << " = ";
    if (std::holds_alternative<int*>(f.ptr)) {
      out << *std::get<int*>(f.ptr);
    } else {
      out << format_double(*std::get<double*>(f.ptr));
    }
    out << "\n";
  }
  return out.str();
}

std::string config_hash(const Config& c) { return to_hex(fnv1a64(dump_effective_config(c))); }

}  // namespace switchsound
