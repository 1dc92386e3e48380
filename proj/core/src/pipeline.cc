// core/src/pipeline.cc

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

#include "switchsound/pipeline.h"

#include <algorithm>
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

double median(std::vector<double> v) {
  if (v.empty()) throw std::runtime_error("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<SwitchingPhase> modeled_phases(const PhaseMalfunctionMatrix& matrix) {
  std::vector<SwitchingPhase> out;
  for (SwitchingPhase p : kAllPhases) {
    for (MalfunctionKind t : kInspectionTargets) {
      if (matrix.cell(p, t)) {
        out.push_back(p);
        break;
      }
    }
  }
  return out;
}

void check_bundle_consistency(const TrainedBundle& b) {
  const int n_bins = b.config.dsp.window / 2 + 1;
  if (b.dictionary.n_bins() != n_bins) {
    throw std::runtime_error("bundle inconsistency: dictionary bin count does not match config");
  }
  for (const auto& [phase, model] : b.models) {
    if (model.n_bins() != n_bins) {
      throw std::runtime_error("bundle inconsistency: model bin count does not match config");
    }
  }
  if (config_hash(b.config) != b.config_hash) {
    throw std::runtime_error("bundle config hash mismatch");
  }
}

}  // namespace

std::string_view experiment_name(ExperimentKind e) {
  switch (e) {
    case ExperimentKind::kGrease: return "grease";
    case ExperimentKind::kAdhesion: return "adhesion";
    case ExperimentKind::kLock: return "lock";
  }
  return "?";
}

std::optional<ExperimentKind> parse_experiment(std::string_view name) {
  for (ExperimentKind e :
       {ExperimentKind::kGrease, ExperimentKind::kAdhesion, ExperimentKind::kLock}) {
    if (experiment_name(e) == name) return e;
  }
  return std::nullopt;
}

TrainedBundle train_bundle(const std::vector<ManifestEntry>& manifest,
                           const std::filesystem::path& wav_dir, const Config& config,
                           std::uint64_t seed) {
  TrainedBundle bundle;
  bundle.config = config;
  bundle.config_hash = config_hash(config);
  bundle.seed = seed;
  const BandMask mask = config.band_mask();

  // Cleanliness sees every undisturbed event, whatever the machine state:
  // "clean" here means free of external disturbance, not healthy. Degraded
  // events must still pass screening so they can be scored.
  std::vector<ClipFeatures> features;
  std::vector<const ManifestEntry*> normal_clean;
  for (const ManifestEntry& e : manifest) {
    if (!e.is_clean()) continue;
    const Waveform w = read_wav(wav_dir / e.file);
    const Spectrogram raw = stft(w, config.dsp.window, config.dsp.hop);
    features.push_back(extract_clip_features(raw, config.feature_config()));
    if (e.is_normal_profile() && !e.switching_failure) normal_clean.push_back(&e);
  }
  if (static_cast<int>(features.size()) < 10) {
    throw std::runtime_error("insufficient training data (stage: cleanliness): need >= 10 "
                             "undisturbed events");
  }
  bundle.cleanliness = fit_cleanliness(features, config.screen.quantile);
  bundle.cleanliness.feature_config = config.feature_config();

  // Dictionary from ground-truth labeled segments of normal clean events.
  std::vector<ManifestEntry> normal_entries;
  normal_entries.reserve(normal_clean.size());
  for (const ManifestEntry* e : normal_clean) normal_entries.push_back(*e);
  const LabeledTrainingSet labeled = labeled_segments_for_training(
      normal_entries, wav_dir, config.dsp.window, config.dsp.hop, mask,
      config.snmf.label_inset_frames);
  if (labeled.labels.empty()) {
    throw std::runtime_error("insufficient training data (stage: dictionary): no labeled events");
  }
  bundle.dictionary =
      fit_bases(labeled.spectrograms, labeled.labels, config.fit_options(mix_seed(seed, 1)));

  // Decode every normal clean event once; models train on decoded phases so
  // training and scoring see the same alignment.
  struct Decoded {
    Spectrogram spec;
    PhaseSegmentation seg;
  };
  std::vector<Decoded> decoded;
  decoded.reserve(normal_entries.size());
  for (const ManifestEntry& e : normal_entries) {
    auto it = labeled.spectrograms.find(e.event_id);
    if (it == labeled.spectrograms.end()) continue;
    const Spectrogram& spec = it->second;
    const ActivationMatrix act =
        estimate_activations(spec, bundle.dictionary, config.snmf.activation_iters);
    Decoded d{spec, segment_phases(act, bundle.dictionary, config.segmentation_options())};
    decoded.push_back(std::move(d));
  }

  // Event-level split: validation events calibrate thresholds.
  const int n = static_cast<int>(decoded.size());
  const int n_val = std::max(10, static_cast<int>(std::lround(0.2 * n)));
  if (n - n_val < 20) {
    throw std::runtime_error(
        "insufficient training data (stage: normal models): need >= 30 clean normal events");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng split_rng(mix_seed(seed, 2));
  split_rng.shuffle(order);
  std::vector<SegmentedClip> train_clips, val_clips;
  for (int i = 0; i < n; ++i) {
    const Decoded& d = decoded[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    SegmentedClip c{&d.spec, &d.seg};
    if (i < n - n_val) {
      train_clips.push_back(c);
    } else {
      val_clips.push_back(c);
    }
  }

  const std::vector<SwitchingPhase> phases = modeled_phases(bundle.matrix);
  for (SwitchingPhase p : phases) {
    bundle.models.emplace(
        p, train_normal_model(train_clips, p, config.model_config(),
                              mix_seed(seed, 100 + static_cast<std::uint64_t>(p))));
  }

  // Per-phase and per-target thresholds from validation scores.
  std::map<SwitchingPhase, std::vector<double>> val_phase_scores;
  std::map<MalfunctionKind, std::vector<double>> val_target_scores;
  for (const SegmentedClip& c : val_clips) {
    std::map<SwitchingPhase, double> scores;
    for (const auto& [p, model] : bundle.models) scores[p] = phase_score(model, *c.spec, *c.seg);
    for (const auto& [p, s] : scores) val_phase_scores[p].push_back(s);
    for (MalfunctionKind t : kInspectionTargets) {
      double sum = 0.0;
      const auto tp = phases_for_malfunction(t, bundle.matrix);
      for (SwitchingPhase p : tp) sum += scores.at(p);
      val_target_scores[t].push_back(sum / static_cast<double>(tp.size()));
    }
  }
  for (const auto& [p, scores] : val_phase_scores) {
    bundle.phase_thresholds[p] = calibrate_threshold(scores, config.model.sigma_mult);
  }
  for (const auto& [t, scores] : val_target_scores) {
    bundle.target_thresholds[t] = calibrate_threshold(scores, config.model.sigma_mult);
  }
  return bundle;
}

void save_bundle(const std::filesystem::path& dir, const TrainedBundle& bundle) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create bundle directory: " + dir.string());

  write_text_file(dir / "effective_config.txt", dump_effective_config(bundle.config));
  save_dictionary(dir / "dictionary.txt", bundle.dictionary);
  save_cleanliness(dir / "cleanliness.txt", bundle.cleanliness);

  std::ostringstream thr;
  thr << kThresholdsMagic << "\n";
  thr << "sigma_mult " << format_double(bundle.config.model.sigma_mult) << "\n";
  for (const auto& [t, v] : bundle.target_thresholds) {
    thr << "target " << malfunction_name(t) << " " << format_double(v) << "\n";
  }
  for (const auto& [p, v] : bundle.phase_thresholds) {
    thr << "phase " << phase_name(p) << " " << format_double(v) << "\n";
  }
  write_text_file(dir / "thresholds.txt", thr.str());

  std::ostringstream desc;
  desc << kBundleMagic << "\n";
  desc << "config_hash " << bundle.config_hash << "\n";
  desc << "seed " << bundle.seed << "\n";
  desc << "dictionary dictionary.txt\n";
  desc << "cleanliness cleanliness.txt\n";
  desc << "thresholds thresholds.txt\n";
  desc << "config effective_config.txt\n";
  for (const auto& [p, model] : bundle.models) {
    const std::string file = "model_" + std::string(phase_name(p)) + ".txt";
    save_normal_model(dir / file, model);
    desc << "model " << phase_name(p) << " " << file << "\n";
  }
  write_text_file(dir / "descriptor.txt", desc.str());
}

TrainedBundle load_bundle(const std::filesystem::path& dir) {
  const std::filesystem::path desc_path = dir / "descriptor.txt";
  std::istringstream in(read_text_file(desc_path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != kBundleMagic) {
    throw std::runtime_error("not a bundle descriptor (or unsupported version): " +
                             desc_path.string());
  }

  TrainedBundle bundle;
  std::string stored_hash;
  while (std::getline(in, line)) {
    const auto parts = split(trim(line), ' ');
    if (parts.empty() || parts[0].empty()) continue;
    if (parts[0] == "config_hash" && parts.size() == 2) {
      stored_hash = parts[1];
    } else if (parts[0] == "seed" && parts.size() == 2) {
      bundle.seed = std::stoull(parts[1]);
    } else if (parts[0] == "dictionary" && parts.size() == 2) {
      bundle.dictionary = load_dictionary(dir / parts[1]);
    } else if (parts[0] == "cleanliness" && parts.size() == 2) {
      bundle.cleanliness = load_cleanliness(dir / parts[1]);
    } else if (parts[0] == "thresholds" && parts.size() == 2) {
      std::istringstream tin(read_text_file(dir / parts[1]));
      std::string tline;
      if (!std::getline(tin, tline) || trim(tline) != kThresholdsMagic) {
        throw std::runtime_error("not a thresholds file: " + (dir / parts[1]).string());
      }
      while (std::getline(tin, tline)) {
        const auto tp = split(trim(tline), ' ');
        if (tp.size() == 3 && tp[0] == "target") {
          const auto m = parse_malfunction(tp[1]);
          if (!m) throw std::runtime_error("thresholds file: unknown target " + tp[1]);
          bundle.target_thresholds[*m] = parse_double(tp[2]);
        } else if (tp.size() == 3 && tp[0] == "phase") {
          const auto p = parse_phase(tp[1]);
          if (!p) throw std::runtime_error("thresholds file: unknown phase " + tp[1]);
          bundle.phase_thresholds[*p] = parse_double(tp[2]);
        }
      }
    } else if (parts[0] == "config" && parts.size() == 2) {
      apply_config_text(bundle.config, read_text_file(dir / parts[1]));
    } else if (parts[0] == "model" && parts.size() == 3) {
      const auto p = parse_phase(parts[1]);
      if (!p) throw std::runtime_error("bundle descriptor: unknown phase " + parts[1]);
      bundle.models.emplace(*p, load_normal_model(dir / parts[2]));
    } else {
      throw std::runtime_error("bundle descriptor: malformed line '" + line + "'");
    }
  }
  bundle.config_hash = stored_hash;
  check_bundle_consistency(bundle);
  return bundle;
}

RunRecord process_waveform(const Waveform& w, const TrainedBundle& bundle,
                           const std::string& machine) {
  // Abort before any stage if the bundle disagrees with its own config.
  check_bundle_consistency(bundle);

  RunRecord r;
  r.event_id = w.event_id;
  r.machine = machine;
  r.captured_at = w.captured_at;
  r.config_hash = bundle.config_hash;

  int seq = 0;
  auto run_stage = [&](const char* name, auto&& fn) -> bool {
    StageStatus st;
    st.seq = ++seq;
    st.name = name;
    try {
      fn();
    } catch (const std::exception& e) {
      st.ok = false;
      st.error = e.what();
      r.stages.push_back(st);
      r.ok = false;
      r.error = std::string(name) + ": " + e.what();
      return false;
    }
    r.stages.push_back(st);
    return true;
  };

  Spectrogram raw, masked;
  ActivationMatrix activations;
  if (!run_stage("stft", [&] { raw = stft(w, bundle.config.dsp.window, bundle.config.dsp.hop); }))
    return r;
  if (!run_stage("screen", [&] { r.screening = screen_event(raw, bundle.cleanliness); })) return r;
  if (r.screening->verdict == ScreeningVerdict::kContaminated) {
    // Excluded from anomaly evaluation; the record keeps the distance.
    r.ok = true;
    return r;
  }
  if (!run_stage("mask", [&] { masked = apply_band_mask(raw, bundle.config.band_mask()); }))
    return r;
  if (!run_stage("activations", [&] {
        activations = estimate_activations(masked, bundle.dictionary,
                                           bundle.config.snmf.activation_iters);
      }))
    return r;
  if (!run_stage("segment", [&] {
        r.segmentation = segment_phases(activations, bundle.dictionary,
                                        bundle.config.segmentation_options());
      }))
    return r;
  if (!run_stage("score", [&] {
        r.report = score_event(masked, *r.segmentation, bundle.models, bundle.matrix,
                               kInspectionTargets, bundle.target_thresholds,
                               bundle.phase_thresholds, w.event_id);
      }))
    return r;
  r.ok = true;
  return r;
}

RunRecord process_event(const std::filesystem::path& wav_path, const TrainedBundle& bundle,
                        const std::string& machine) {
  const Waveform w = read_wav(wav_path);
  return process_waveform(w, bundle, machine);
}

std::string record_to_json_line(const RunRecord& r) {
  json j;
  j["v"] = r.version;
  j["event_id"] = r.event_id;
  j["machine"] = r.machine;
  j["captured_at"] = r.captured_at ? json(*r.captured_at) : json(nullptr);
  j["seq"] = r.seq;
  j["config_hash"] = r.config_hash;
  json stages = json::array();
  for (const StageStatus& s : r.stages) {
    json st{{"seq", s.seq}, {"stage", s.name}, {"ok", s.ok}};
    if (!s.ok) st["error"] = s.error;
    stages.push_back(st);
  }
  j["stages"] = stages;
  j["ok"] = r.ok;
  if (!r.error.empty()) j["error"] = r.error;
  if (r.screening) {
    j["screening"] = {{"verdict", std::string(screening_verdict_name(r.screening->verdict))},
                      {"distance", r.screening->distance}};
  }
  if (r.segmentation) {
    json seg;
    seg["hop_s"] = r.segmentation->hop_s;
    seg["boundaries"] = r.segmentation->boundaries;
    seg["confidence"] = r.segmentation->confidence;
    j["segmentation"] = seg;
  }
  if (r.report) {
    json rep;
    rep["switching_time_s"] = r.report->switching_time_s;
    json ps = json::object();
    for (const auto& [p, s] : r.report->phase_scores) ps[std::string(phase_name(p))] = s;
    rep["phase_scores"] = ps;
    json pt = json::object();
    for (const auto& [p, t] : r.report->phase_thresholds) pt[std::string(phase_name(p))] = t;
    rep["phase_thresholds"] = pt;
    json targets = json::array();
    for (const TargetRow& t : r.report->targets) {
      targets.push_back({{"target", std::string(malfunction_name(t.target))},
                         {"score", t.score},
                         {"threshold", t.threshold},
                         {"verdict", t.anomalous ? "Anomalous" : "Normal"}});
    }
    rep["targets"] = targets;
    j["report"] = rep;
  }
  return j.dump();
}

RunRecord record_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  RunRecord r;
  r.version = j.at("v").get<int>();
  if (r.version != kLedgerVersion) throw std::runtime_error("ledger record version mismatch");
  r.event_id = j.at("event_id").get<std::string>();
  r.machine = j.at("machine").get<std::string>();
  if (!j.at("captured_at").is_null()) r.captured_at = j.at("captured_at").get<std::string>();
  r.seq = j.at("seq").get<std::uint64_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& st : j.at("stages")) {
    StageStatus s;
    s.seq = st.at("seq").get<int>();
    s.name = st.at("stage").get<std::string>();
    s.ok = st.at("ok").get<bool>();
    if (st.contains("error")) s.error = st.at("error").get<std::string>();
    r.stages.push_back(s);
  }
  r.ok = j.at("ok").get<bool>();
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  if (j.contains("screening")) {
    ScreeningResult s;
    s.verdict = j.at("screening").at("verdict").get<std::string>() == "Contaminated"
                    ? ScreeningVerdict::kContaminated
                    : ScreeningVerdict::kClean;
    s.distance = j.at("screening").at("distance").get<double>();
    r.screening = s;
  }
  if (j.contains("segmentation")) {
    PhaseSegmentation seg;
    seg.hop_s = j.at("segmentation").at("hop_s").get<double>();
    const auto& b = j.at("segmentation").at("boundaries");
    for (std::size_t i = 0; i < seg.boundaries.size(); ++i) seg.boundaries[i] = b.at(i).get<int>();
    const auto& c = j.at("segmentation").at("confidence");
    for (std::size_t i = 0; i < seg.confidence.size(); ++i) seg.confidence[i] = c.at(i).get<double>();
    r.segmentation = seg;
  }
  if (j.contains("report")) {
    AnomalyReport rep;
    rep.event_id = r.event_id;
    rep.switching_time_s = j.at("report").at("switching_time_s").get<double>();
    for (const auto& [name, value] : j.at("report").at("phase_scores").items()) {
      const auto p = parse_phase(name);
      if (!p) throw std::runtime_error("ledger record: unknown phase " + name);
      rep.phase_scores[*p] = value.get<double>();
    }
    for (const auto& [name, value] : j.at("report").at("phase_thresholds").items()) {
      const auto p = parse_phase(name);
      if (!p) throw std::runtime_error("ledger record: unknown phase " + name);
      rep.phase_thresholds[*p] = value.get<double>();
    }
    for (const auto& t : j.at("report").at("targets")) {
      TargetRow row;
      const auto m = parse_malfunction(t.at("target").get<std::string>());
      if (!m) throw std::runtime_error("ledger record: unknown target");
      row.target = *m;
      row.score = t.at("score").get<double>();
      row.threshold = t.at("threshold").get<double>();
      row.anomalous = t.at("verdict").get<std::string>() == "Anomalous";
      rep.targets.push_back(row);
    }
    r.report = rep;
  }
  return r;
}

Ledger::Ledger(std::filesystem::path path) : path_(std::move(path)) {}

void Ledger::append(RunRecord& record) {
  std::uint64_t seq = 1;
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (!trim(line).empty()) ++seq;
    }
  }
  record.seq = seq;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot open ledger for append: " + path_.string());
  out << record_to_json_line(record) << "\n";
  if (!out) throw std::runtime_error("ledger append failed: " + path_.string());
}

std::vector<RunRecord> Ledger::read(const std::filesystem::path& path) {
  std::vector<RunRecord> records;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    records.push_back(record_from_json_line(line));
  }
  return records;
}

std::map<SwitchingPhase, PersistenceVerdict> rolling_diagnosis(
    const std::vector<RunRecord>& records, int k, const std::string& machine) {
  std::vector<ScoredEvent> scored;
  std::map<SwitchingPhase, double> thresholds;
  for (const RunRecord& r : records) {
    if (r.machine != machine || !r.ok || !r.report) continue;  // contaminated/failed skipped
    ScoredEvent e;
    e.event_id = r.event_id;
    e.phase_scores = r.report->phase_scores;
    scored.push_back(std::move(e));
    thresholds = r.report->phase_thresholds;
  }
  if (static_cast<int>(scored.size()) < k) {
    throw std::runtime_error("insufficient scored events for diagnosis (need >= k)");
  }
  return persistence_check(scored, thresholds, k);
}

std::vector<LadderRow> run_experiment_ladder(ExperimentKind experiment,
                                             const TrainedBundle& bundle, int events_per_step,
                                             std::uint64_t seed) {
  check_bundle_consistency(bundle);
  if (events_per_step < 1) throw std::runtime_error("run_experiment_ladder: need >= 1 event/step");

  int step_lo = 0, step_hi = 0;
  MalfunctionKind target = MalfunctionKind::kGreaseInsideDev;
  switch (experiment) {
    case ExperimentKind::kGrease:
      step_lo = 0;
      step_hi = 4;
      target = MalfunctionKind::kGreaseInsideDev;
      break;
    case ExperimentKind::kAdhesion:
      step_lo = 0;
      step_hi = 17;
      target = MalfunctionKind::kContact;
      break;
    case ExperimentKind::kLock:
      step_lo = 5;
      step_hi = 10;
      target = MalfunctionKind::kLock;
      break;
  }

  std::vector<LadderRow> rows;
  for (int step = step_lo; step <= step_hi; ++step) {
    std::vector<double> scores, durations;
    bool gt_failure = false;
    for (int i = 0; i < events_per_step; ++i) {
      DegradationProfile profile;
      switch (experiment) {
        case ExperimentKind::kGrease: profile.grease_pushes = step; break;
        case ExperimentKind::kAdhesion: profile.adhesion_sixth_turns = step; break;
        case ExperimentKind::kLock: profile.lock_ratio_left = step; break;
      }
      // Common random numbers across steps: event i keeps its draws while the
      // degradation parameter advances, mirroring a rig that degrades the
      // same machine progressively. Per-event scores then respond to the
      // degradation alone, so step medians move monotonically.
      const std::uint64_t event_seed = mix_seed(seed, static_cast<std::uint64_t>(i));
      auto [w, gt] = generate_event(profile, DisturbanceSpec{}, event_seed, bundle.config.synth);
      gt_failure = gt_failure || gt.switching_failure;

      // Controlled rig events carry no external disturbance; screen/exclude
      // is deliberately not part of the experiment path.
      const Spectrogram masked = apply_band_mask(
          stft(w, bundle.config.dsp.window, bundle.config.dsp.hop), bundle.config.band_mask());
      const ActivationMatrix act =
          estimate_activations(masked, bundle.dictionary, bundle.config.snmf.activation_iters);
      const PhaseSegmentation seg =
          segment_phases(act, bundle.dictionary, bundle.config.segmentation_options());
      const AnomalyReport report =
          score_event(masked, seg, bundle.models, bundle.matrix, {target},
                      bundle.target_thresholds, bundle.phase_thresholds, w.event_id);
      scores.push_back(report.targets.front().score);
      durations.push_back(report.switching_time_s);
    }

    LadderRow row;
    row.step = step;
    row.target = target;
    row.events = events_per_step;
    row.median_score = median(scores);
    row.threshold = bundle.target_thresholds.at(target);
    row.anomalous = row.median_score > row.threshold;
    row.median_moving_rail_s = median(durations);
    row.gt_failure = gt_failure;
    for (double s : scores) row.anomalous_events += s > row.threshold ? 1 : 0;
    rows.push_back(row);
  }
  return rows;
}

std::string ladder_table_tsv(const std::vector<LadderRow>& rows) {
  std::ostringstream out;
  out << "step\ttarget\tevents\tmedian_score\tthreshold\tverdict\tmedian_moving_rail_s\t"
         "gt_failure\tanomalous_events\n";
  for (const LadderRow& r : rows) {
    out << r.step << "\t" << malfunction_name(r.target) << "\t" << r.events << "\t"
        << format_double(r.median_score) << "\t" << format_double(r.threshold) << "\t"
        << (r.anomalous ? "Anomalous" : "Normal") << "\t"
        << format_double(r.median_moving_rail_s) << "\t" << (r.gt_failure ? "true" : "false")
        << "\t" << r.anomalous_events << "\n";
  }
  return out.str();
}

std::string segmentation_table_tsv(const std::string& event_id, const PhaseSegmentation& seg) {
  std::ostringstream out;
  out << "event_id\tphase\tstart_s\tend_s\tconfidence\n";
  for (SwitchingPhase p : kAllPhases) {
    out << event_id << "\t" << phase_name(p) << "\t" << format_double(seg.start_s(p)) << "\t"
        << format_double(seg.end_s(p)) << "\t"
        << format_double(seg.confidence[static_cast<std::size_t>(p)]) << "\n";
  }
  return out.str();
}

std::string score_table_tsv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "event_id\tphase\ttarget\tscore\tthreshold\tverdict\n";
  const PhaseMalfunctionMatrix matrix = default_phase_malfunction_matrix();
  for (const RunRecord& r : records) {
    if (!r.report) continue;
    for (const TargetRow& t : r.report->targets) {
      for (SwitchingPhase p : phases_for_malfunction(t.target, matrix)) {
        out << r.event_id << "\t" << phase_name(p) << "\t" << malfunction_name(t.target) << "\t"
            << format_double(t.score) << "\t" << format_double(t.threshold) << "\t"
            << (t.anomalous ? "Anomalous" : "Normal") << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace switchsound
