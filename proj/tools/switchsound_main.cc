// tools/switchsound_main.cc

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

#include <fnmatch.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "switchsound/pipeline.h"
#include "switchsound/plot.h"
#include "switchsound/textio.h"
#include "switchsound/version.h"
#include "switchsound/wav.h"

namespace fs = std::filesystem;
using namespace switchsound;

namespace {

// Expands a literal glob pattern against the filesystem; plain paths pass
// through. Shell-expanded arguments arrive as multiple --wav values.
std::vector<fs::path> expand_wav_args(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const std::string& a : args) {
    if (a.find('*') == std::string::npos && a.find('?') == std::string::npos) {
      out.emplace_back(a);
      continue;
    }
    const fs::path pattern(a);
    const fs::path dir = pattern.parent_path().empty() ? fs::path(".") : pattern.parent_path();
    const std::string leaf = pattern.filename().string();
    std::vector<fs::path> matched;
    if (fs::exists(dir)) {
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (fnmatch(leaf.c_str(), entry.path().filename().string().c_str(), 0) == 0) {
          matched.push_back(entry.path());
        }
      }
    }
    std::sort(matched.begin(), matched.end());
    out.insert(out.end(), matched.begin(), matched.end());
  }
  if (out.empty()) throw std::runtime_error("no input wav files matched");
  return out;
}

Config load_config_opt(const std::string& config_path) {
  Config c;
  if (!config_path.empty()) apply_config_file(c, config_path);
  return c;
}

int cmd_synth_corpus(const std::string& spec_path, const std::string& out_dir,
                     std::uint64_t seed, const std::string& config_path) {
  const Config config = load_config_opt(config_path);
  const CorpusSpec spec = load_corpus_spec(spec_path);
  const auto entries = generate_corpus(spec, out_dir, seed, config.synth);
  std::cout << "wrote " << entries.size() << " events to " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& config_path,
              const std::string& out_dir, std::uint64_t seed) {
  const Config config = load_config_opt(config_path);
  std::cout << "# effective configuration (hash " << config_hash(config) << ")\n"
            << dump_effective_config(config);
  const auto manifest = read_manifest(manifest_path);
  const fs::path wav_dir = fs::path(manifest_path).parent_path();
  const TrainedBundle bundle = train_bundle(manifest, wav_dir, config, seed);
  save_bundle(out_dir, bundle);
  std::cout << "bundle written to " << out_dir << "\n";
  return 0;
}

int cmd_process(const std::string& bundle_dir, const std::vector<std::string>& wav_args,
                const std::string& ledger_path, const std::string& machine, int jobs) {
  const TrainedBundle bundle = load_bundle(bundle_dir);
  const std::vector<fs::path> files = expand_wav_args(wav_args);

  std::vector<RunRecord> records(files.size());
  if (jobs <= 1 || files.size() <= 1) {
    for (std::size_t i = 0; i < files.size(); ++i) {
      records[i] = process_event(files[i], bundle, machine);
    }
  } else {
    // Fan out across files; records land in input order so ledger contents
    // do not depend on scheduling.
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    const int n_threads = std::min<int>(jobs, static_cast<int>(files.size()));
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
          records[i] = process_event(files[i], bundle, machine);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  Ledger ledger(ledger_path);
  bool all_ok = true;
  std::string first_error;
  for (RunRecord& r : records) {
    ledger.append(r);
    const char* verdict = "no-score";
    if (r.screening) verdict = screening_verdict_name(r.screening->verdict).data();
    std::cout << r.event_id << "\t" << (r.ok ? verdict : "error") << "\n";
    if (!r.ok) {
      all_ok = false;
      if (first_error.empty()) first_error = r.error;
    }
  }
  if (!all_ok) {
    std::cerr << "error: " << first_error << "\n";
    return 1;
  }
  return 0;
}

int cmd_segment(const std::string& bundle_dir, const std::string& wav_path,
                std::string traces_out) {
  const TrainedBundle bundle = load_bundle(bundle_dir);
  const Waveform w = read_wav(wav_path);
  const Spectrogram masked = apply_band_mask(
      stft(w, bundle.config.dsp.window, bundle.config.dsp.hop), bundle.config.band_mask());
  const ActivationMatrix act =
      estimate_activations(masked, bundle.dictionary, bundle.config.snmf.activation_iters);
  const PhaseSegmentation seg =
      segment_phases(act, bundle.dictionary, bundle.config.segmentation_options());

  std::cout << segmentation_table_tsv(w.event_id, seg);

  if (traces_out.empty()) {
    traces_out = (fs::path(wav_path).parent_path() /
                  (fs::path(wav_path).stem().string() + ".traces.tsv"))
                     .string();
  }
  std::ostringstream out;
  const auto sources = bundle.dictionary.sources();
  out << "frame\ttime_s";
  for (SourceName s : sources) out << "\t" << source_name(s);
  out << "\n";
  std::map<SourceName, Eigen::VectorXd> traces;
  for (SourceName s : sources) traces[s] = source_activation(act, bundle.dictionary, s);
  for (int t = 0; t < act.n_frames(); ++t) {
    out << t << "\t" << format_double(t * act.hop_s);
    for (SourceName s : sources) out << "\t" << format_double(traces[s](t));
    out << "\n";
  }
  write_text_file(traces_out, out.str());
  std::cout << "# activation traces written to " << traces_out << "\n";
  return 0;
}

int cmd_ladder(const std::string& experiment_arg, const std::string& bundle_dir,
               const std::string& out_dir, int events_per_step, std::uint64_t seed) {
  const auto experiment = parse_experiment(experiment_arg);
  if (!experiment) {
    throw std::runtime_error("unknown experiment '" + experiment_arg +
                             "' (expected grease|adhesion|lock)");
  }
  const TrainedBundle bundle = load_bundle(bundle_dir);
  const int per_step =
      events_per_step > 0 ? events_per_step : bundle.config.ladder.events_per_step;
  const auto rows = run_experiment_ladder(*experiment, bundle, per_step, seed);

  fs::create_directories(out_dir);
  const std::string table = ladder_table_tsv(rows);
  std::cout << table;
  write_text_file(fs::path(out_dir) / ("ladder_" + experiment_arg + ".tsv"), table);

  PlotSeries scores;
  scores.label = std::string(malfunction_name(rows.front().target)) + " median score";
  for (const LadderRow& r : rows) {
    scores.x.push_back(r.step);
    scores.y.push_back(r.median_score);
  }
  PlotHLine threshold{rows.front().threshold, "threshold", "#d62728"};
  write_line_plot_svg(fs::path(out_dir) / ("ladder_" + experiment_arg + ".svg"),
                      "Degradation ladder: " + experiment_arg, "ladder step",
                      "degree of abnormality", {scores}, threshold);
  return 0;
}

int cmd_diagnose(const std::string& ledger_path, int k, const std::string& machine) {
  const auto records = Ledger::read(ledger_path);
  const auto verdicts = rolling_diagnosis(records, k, machine);
  std::cout << "phase\tverdict\n";
  for (const auto& [phase, verdict] : verdicts) {
    std::cout << phase_name(phase) << "\t" << persistence_verdict_name(verdict) << "\n";
  }
  return 0;
}

int cmd_report(const std::string& ledger_path, const std::string& out_dir) {
  const auto records = Ledger::read(ledger_path);
  if (records.empty()) throw std::runtime_error("ledger is empty: " + ledger_path);
  fs::create_directories(out_dir);

  write_text_file(fs::path(out_dir) / "scores.tsv", score_table_tsv(records));

  std::ostringstream screening;
  screening << "seq\tevent_id\tverdict\tdistance\n";
  PlotSeries distances;
  distances.label = "screening distance";
  for (const RunRecord& r : records) {
    if (!r.screening) continue;
    screening << r.seq << "\t" << r.event_id << "\t"
              << screening_verdict_name(r.screening->verdict) << "\t"
              << format_double(r.screening->distance) << "\n";
    distances.x.push_back(static_cast<double>(r.seq));
    distances.y.push_back(r.screening->distance);
  }
  write_text_file(fs::path(out_dir) / "screening.tsv", screening.str());
  if (!distances.x.empty()) {
    write_line_plot_svg(fs::path(out_dir) / "screening_distances.svg", "Screening distances",
                        "ledger sequence", "Mahalanobis distance", {distances});
  }

  int contaminated = 0, scored = 0;
  std::map<MalfunctionKind, int> anomalous;
  std::map<MalfunctionKind, PlotSeries> trends;
  std::map<MalfunctionKind, double> last_threshold;
  for (const RunRecord& r : records) {
    if (r.screening && r.screening->verdict == ScreeningVerdict::kContaminated) ++contaminated;
    if (!r.report) continue;
    ++scored;
    for (const TargetRow& t : r.report->targets) {
      if (t.anomalous) ++anomalous[t.target];
      PlotSeries& s = trends[t.target];
      s.label = std::string(malfunction_name(t.target)) + " score";
      s.x.push_back(static_cast<double>(r.seq));
      s.y.push_back(t.score);
      last_threshold[t.target] = t.threshold;
    }
  }
  for (const auto& [target, series] : trends) {
    PlotHLine threshold{last_threshold[target], "threshold", "#d62728"};
    write_line_plot_svg(
        fs::path(out_dir) / ("score_trend_" + std::string(malfunction_name(target)) + ".svg"),
        "Score trend: " + std::string(malfunction_name(target)), "ledger sequence",
        "degree of abnormality", {series}, threshold);
  }

  std::ostringstream summary;
  summary << "records\t" << records.size() << "\n";
  summary << "scored\t" << scored << "\n";
  summary << "contaminated\t" << contaminated << "\n";
  for (const auto& [target, count] : anomalous) {
    summary << "anomalous_" << malfunction_name(target) << "\t" << count << "\n";
  }
  write_text_file(fs::path(out_dir) / "summary.tsv", summary.str());
  std::cout << summary.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic inspection of electric point machines from switch sounds"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // synth corpus
  auto* synth = app.add_subcommand("synth", "Synthetic data generation");
  synth->require_subcommand(1);
  auto* corpus = synth->add_subcommand("corpus", "Generate a labeled synthetic corpus");
  std::string corpus_spec, corpus_out, corpus_config;
  std::uint64_t corpus_seed = 1;
  corpus->add_option("--spec", corpus_spec, "Corpus spec file")->required();
  corpus->add_option("--out", corpus_out, "Output directory")->required();
  corpus->add_option("--seed", corpus_seed, "Generation seed");
  corpus->add_option("--config", corpus_config, "Config file (synth section)");

  auto* train = app.add_subcommand("train", "Train a model bundle from a corpus manifest");
  std::string train_manifest, train_config, train_out;
  std::uint64_t train_seed = 1;
  train->add_option("--manifest", train_manifest, "Corpus manifest (jsonl)")->required();
  train->add_option("--config", train_config, "Config file");
  train->add_option("--out", train_out, "Bundle output directory")->required();
  train->add_option("--seed", train_seed, "Training seed");

  auto* process = app.add_subcommand("process", "Process wav events against a bundle");
  std::string process_bundle, process_ledger, process_machine = "default";
  std::vector<std::string> process_wavs;
  int process_jobs = 1;
  process->add_option("--bundle", process_bundle, "Bundle directory")->required();
  process->add_option("--wav", process_wavs, "Wav file(s) or glob")->required();
  process->add_option("--ledger", process_ledger, "Ledger file to append to")->required();
  process->add_option("--machine", process_machine, "Machine identifier");
  process->add_option("--jobs", process_jobs, "Parallel workers");

  auto* segment = app.add_subcommand("segment", "Decode and print the switching phases of a wav");
  std::string segment_bundle, segment_wav, segment_traces;
  segment->add_option("--bundle", segment_bundle, "Bundle directory")->required();
  segment->add_option("--wav", segment_wav, "Wav file")->required();
  segment->add_option("--traces-out", segment_traces, "Activation trace TSV path");

  auto* ladder = app.add_subcommand("ladder", "Run a synthetic degradation ladder experiment");
  std::string ladder_experiment, ladder_bundle, ladder_out;
  int ladder_events = 0;
  std::uint64_t ladder_seed = 7;
  ladder->add_option("--experiment", ladder_experiment, "grease|adhesion|lock")->required();
  ladder->add_option("--bundle", ladder_bundle, "Bundle directory")->required();
  ladder->add_option("--out", ladder_out, "Output directory")->required();
  ladder->add_option("--events-per-step", ladder_events, "Events per ladder step");
  ladder->add_option("--seed", ladder_seed, "Generation seed");

  auto* diagnose = app.add_subcommand("diagnose", "Persistence verdicts over a ledger");
  std::string diagnose_ledger, diagnose_machine = "default";
  int diagnose_k = 2;
  diagnose->add_option("--ledger", diagnose_ledger, "Ledger file")->required();
  diagnose->add_option("--k", diagnose_k, "Consecutive exceedances required");
  diagnose->add_option("--machine", diagnose_machine, "Machine identifier");

  auto* report = app.add_subcommand("report", "Summary tables and plots from a ledger");
  std::string report_ledger, report_out;
  report->add_option("--ledger", report_ledger, "Ledger file")->required();
  report->add_option("--out", report_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (corpus->parsed()) return cmd_synth_corpus(corpus_spec, corpus_out, corpus_seed, corpus_config);
    if (train->parsed()) return cmd_train(train_manifest, train_config, train_out, train_seed);
    if (process->parsed()) {
      return cmd_process(process_bundle, process_wavs, process_ledger, process_machine,
                         process_jobs);
    }
    if (segment->parsed()) return cmd_segment(segment_bundle, segment_wav, segment_traces);
    if (ladder->parsed()) {
      return cmd_ladder(ladder_experiment, ladder_bundle, ladder_out, ladder_events, ladder_seed);
    }
    if (diagnose->parsed()) return cmd_diagnose(diagnose_ledger, diagnose_k, diagnose_machine);
    if (report->parsed()) return cmd_report(report_ledger, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
