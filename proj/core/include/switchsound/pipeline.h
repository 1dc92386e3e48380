// switchsound/pipeline.h

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

#ifndef SWITCHSOUND_PIPELINE_H_
#define SWITCHSOUND_PIPELINE_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "switchsound/anomaly.h"
#include "switchsound/config.h"
#include "switchsound/denoise.h"
#include "switchsound/dsp.h"
#include "switchsound/phase.h"
#include "switchsound/snmf.h"
#include "switchsound/synth.h"

namespace switchsound {

// The three inspection targets the pipeline ships detectors for. Abnormal
// adhesion force maps onto the Contact malfunction class.
inline const std::vector<MalfunctionKind> kInspectionTargets = {
    MalfunctionKind::kGreaseInsideDev, MalfunctionKind::kContact, MalfunctionKind::kLock};

// Every artifact needed to process an event, trained as one consistent unit.
struct TrainedBundle {
  Config config;
  std::string config_hash;
  std::uint64_t seed = 0;
  BasisDictionary dictionary;
  CleanlinessModel cleanliness;
  std::map<SwitchingPhase, NormalModel> models;
  std::map<MalfunctionKind, double> target_thresholds;
  std::map<SwitchingPhase, double> phase_thresholds;
  PhaseMalfunctionMatrix matrix = default_phase_malfunction_matrix();
};

// Trains dictionary, cleanliness model, per-phase normal models and
// thresholds from a synthetic corpus manifest. Undisturbed events feed the
// cleanliness model; normal-profile clean events feed the dictionary and the
// normal models, split per event into a training set and a validation set
// that calibrates thresholds. Deterministic given (config, seed).
TrainedBundle train_bundle(const std::vector<ManifestEntry>& manifest,
                           const std::filesystem::path& wav_dir, const Config& config,
                           std::uint64_t seed);

// Bundle directory layout: descriptor.txt, effective_config.txt,
// dictionary.txt, cleanliness.txt, thresholds.txt, model_<Phase>.txt.
void save_bundle(const std::filesystem::path& dir, const TrainedBundle& bundle);
TrainedBundle load_bundle(const std::filesystem::path& dir);

struct StageStatus {
  int seq = 0;
  std::string name;
  bool ok = true;
  std::string error;
};

// One append-only ledger record per processed event. Records carry no wall
// clock by default so reruns are byte-identical; captured_at comes from the
// input when available.
struct RunRecord {
  int version = 1;
  std::string event_id;
  std::string machine = "default";
  std::optional<std::string> captured_at;
  std::uint64_t seq = 0;  // assigned when appended to a ledger
  std::string config_hash;
  std::vector<StageStatus> stages;
  std::optional<ScreeningResult> screening;
  std::optional<PhaseSegmentation> segmentation;
  std::optional<AnomalyReport> report;
  bool ok = false;
  std::string error;
};

// Fixed stage order: screen -> mask -> activations -> segment -> score.
// Contaminated events stop after screening and carry no scores. Stage
// failures are recorded with the stage name and rethrown by process_event
// only if `rethrow` is set; the record always describes what happened.
RunRecord process_waveform(const Waveform& w, const TrainedBundle& bundle,
                           const std::string& machine = "default");
RunRecord process_event(const std::filesystem::path& wav_path, const TrainedBundle& bundle,
                        const std::string& machine = "default");

std::string record_to_json_line(const RunRecord& r);
RunRecord record_from_json_line(const std::string& line);

// Append-only JSONL ledger.
class Ledger {
 public:
  explicit Ledger(std::filesystem::path path);
  // Assigns the record's sequence number and appends one line.
  void append(RunRecord& record);
  static std::vector<RunRecord> read(const std::filesystem::path& path);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Persistence verdicts over the scored (non-contaminated) records of one
// machine, in ledger order. Contaminated records are skipped, not counted.
std::map<SwitchingPhase, PersistenceVerdict> rolling_diagnosis(
    const std::vector<RunRecord>& records, int k, const std::string& machine = "default");

enum class ExperimentKind { kGrease, kAdhesion, kLock };

std::string_view experiment_name(ExperimentKind e);
std::optional<ExperimentKind> parse_experiment(std::string_view name);

struct LadderRow {
  int step = 0;          // ladder position (pushes, sixth-turns, or left ratio)
  MalfunctionKind target = MalfunctionKind::kGreaseInsideDev;
  int events = 0;
  double median_score = 0.0;
  double threshold = 0.0;
  bool anomalous = false;           // median score above threshold
  double median_moving_rail_s = 0.0;  // decoded MovingRail duration
  bool gt_failure = false;          // ground-truth switching failure at this step
  int anomalous_events = 0;         // events individually above threshold
};

// Reproduces one degradation experiment against a trained bundle: renders
// events per ladder step, scores them through the analysis pipeline (no
// screening; the rig's events are disturbance-free by construction) and
// aggregates per-step medians.
std::vector<LadderRow> run_experiment_ladder(ExperimentKind experiment,
                                             const TrainedBundle& bundle, int events_per_step,
                                             std::uint64_t seed);

std::string ladder_table_tsv(const std::vector<LadderRow>& rows);
std::string segmentation_table_tsv(const std::string& event_id, const PhaseSegmentation& seg);
std::string score_table_tsv(const std::vector<RunRecord>& records);

}  // namespace switchsound

#endif  // SWITCHSOUND_PIPELINE_H_
