// switchsound/config.h

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

#ifndef SWITCHSOUND_CONFIG_H_
#define SWITCHSOUND_CONFIG_H_

#include <filesystem>
#include <string>

#include "switchsound/anomaly.h"
#include "switchsound/denoise.h"
#include "switchsound/dsp.h"
#include "switchsound/snmf.h"
#include "switchsound/synth.h"

namespace switchsound {

// Every tunable of every stage, with the defaults the pipeline ships with.
// A config file overlays defaults; unknown keys are rejected. The canonical
// effective-config dump is what gets hashed into bundle descriptors.
struct Config {
  struct Dsp {
    double sample_rate = 16000.0;
    int window = 1024;  // 64 ms at 16 kHz
    int hop = 512;
  } dsp;

  struct Mask {
    double low_hz = 50.0;
    double high_hz = 6000.0;
  } mask;

  struct Snmf {
    int n_per_source = 4;
    int fit_iters = 200;
    int activation_iters = 200;
    int max_frames_per_source = 3000;
    int label_inset_frames = 1;
  } snmf;

  struct Phase {
    double activity_threshold = 0.2;
  } phase;

  struct Screen {
    int n_bands = 8;
    double band_low_hz = 50.0;
    double band_high_hz = 8000.0;
    double quantile = 0.99;
  } screen;

  struct Model {
    int context = 2;
    int hidden1 = 64;
    int hidden2 = 64;
    int epochs = 30;
    double learning_rate = 1e-3;
    int batch = 32;
    double val_fraction = 0.2;
    double sigma_mult = 3.0;
  } model;

  struct Persistence {
    int k = 2;
  } persistence;

  struct Ladder {
    int events_per_step = 10;
  } ladder;

  SynthConfig synth;

  double hop_s() const { return dsp.hop / dsp.sample_rate; }
  BandMask band_mask() const { return BandMask{{{mask.low_hz, mask.high_hz}}}; }
  FeatureConfig feature_config() const {
    return FeatureConfig{screen.n_bands, screen.band_low_hz, screen.band_high_hz};
  }
  NormalModelConfig model_config() const {
    return NormalModelConfig{model.context, model.hidden1,       model.hidden2, model.epochs,
                             model.learning_rate, model.batch, model.val_fraction};
  }
  FitOptions fit_options(std::uint64_t seed) const {
    FitOptions o;
    o.n_per_source = snmf.n_per_source;
    o.iters = snmf.fit_iters;
    o.seed = seed;
    o.max_frames_per_source = snmf.max_frames_per_source;
    return o;
  }
  SegmentationOptions segmentation_options() const {
    return SegmentationOptions{phase.activity_threshold};
  }
};

// Defaults overlaid with a config file; throws on unknown sections/keys.
Config load_config(const std::filesystem::path& path);
void apply_config_file(Config& c, const std::filesystem::path& path);
void apply_config_text(Config& c, std::string_view text);

// Canonical text dump of every knob. Parsing the dump reproduces the config.
std::string dump_effective_config(const Config& c);

// FNV-1a hash (hex) of the canonical dump.
std::string config_hash(const Config& c);

}  // namespace switchsound

#endif  // SWITCHSOUND_CONFIG_H_
