/* Copyright 2026 The Layoutkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LAYOUTKIT_ORCHESTRATOR_H_
#define LAYOUTKIT_ORCHESTRATOR_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "layoutkit/coco.h"
#include "layoutkit/image.h"
#include "layoutkit/schedule.h"

namespace layoutkit {

// Where a stage takes its starting weights from.
struct StageInit {
  enum class Kind { kFresh, kFromPrevious, kExternal };

  Kind kind = Kind::kFresh;
  std::filesystem::path external_path;

  static StageInit fresh() { return {Kind::kFresh, {}}; }
  static StageInit from_previous() { return {Kind::kFromPrevious, {}}; }
  static StageInit external(std::filesystem::path path) {
    return {Kind::kExternal, std::move(path)};
  }

  friend bool operator==(const StageInit&, const StageInit&) = default;
};

struct StageConfig {
  std::string name;
  StageInit init;
  double train_fraction = 0.75;
  // Unscaled; see effective_schedule.
  ScheduleConfig schedule;
  std::uint64_t seed = 0;

  friend bool operator==(const StageConfig&, const StageConfig&) = default;
};

struct StagePlan {
  std::vector<StageConfig> stages;
  // Data directory holding annotations.json and the images it names.
  std::string dataset;
  // Applied to every max_iter and milestone.
  double scale = 1.0;
  // Seeds the per-stage train/val split.
  std::uint64_t seed = 0;

  friend bool operator==(const StagePlan&, const StagePlan&) = default;
};

// The six-stage cumulative fine-tuning sequence: per stage (base_lr, warmup,
// gamma, max_iter, train fraction) of
//   (0.007, 100, 1e-4, 22000, 0.75)   fresh
//   (0.001, 100, 1e-4, 22000, 0.75)   from previous
//   (5e-4,    0, 1e-4, 22000, 0.75)   from previous
//   (1e-5,    0, 1e-5, 22000, 0.75)   from previous
//   (1e-6,    0, 1e-5, 22000, 0.75)   from previous
//   (1e-6,    0, 1e-5,  5000, 0.99)   from previous
// with milestones at floor(0.6 max_iter) and floor(0.8 max_iter).
StagePlan paper_preset();

void validate_plan(const StagePlan& plan);

// Schedule stage `index` runs with once the plan scale is applied.
ScheduleConfig effective_schedule(const StagePlan& plan, std::size_t index);

nlohmann::json plan_to_json(const StagePlan& plan);
StagePlan plan_from_json(const nlohmann::json& json);
StagePlan load_plan(const std::filesystem::path& path);

// A dataset together with its decoded rasters, aligned with dataset.images.
struct TrainingData {
  std::filesystem::path root;
  Dataset dataset;
  std::vector<GrayImage> rasters;

  const GrayImage& raster_for(std::int64_t image_id) const;
};

// Loads <dir>/annotations.json (strict) and every image it references,
// resolving file names against `dir`.
TrainingData load_training_data(const std::filesystem::path& dir);

enum class StageStatus { kPending, kCompleted, kDiverged, kFailed };

const char* stage_status_name(StageStatus status);

struct StageRequest {
  std::size_t index = 0;
  std::string name;
  ScheduleConfig schedule;
  std::uint64_t seed = 0;
  Dataset train;
  Dataset val;
  // Absent for a fresh start.
  std::optional<std::filesystem::path> init_weights;
  // Empty directory owned by this stage.
  std::filesystem::path stage_dir;
};

struct StageOutcome {
  StageStatus status = StageStatus::kFailed;
  std::filesystem::path final_weights;
  std::int64_t iterations_run = 0;
  std::filesystem::path history_csv;
  std::string message;
  std::optional<double> train_dice;
  std::optional<double> val_dice;
};

// Occupant of the training slot. Must be deterministic for a fixed request.
class Trainer {
 public:
  virtual ~Trainer() = default;
  virtual StageOutcome run_stage(const StageRequest& request,
                                 const TrainingData& data) = 0;
};

struct StageRecord {
  std::string name;
  StageInit::Kind init = StageInit::Kind::kFresh;
  StageStatus status = StageStatus::kPending;
  std::string config_digest;
  std::optional<std::string> init_weights_digest;
  std::optional<std::string> final_weights_digest;
  // Paths relative to the run directory.
  std::string final_weights;
  std::string history;
  std::int64_t iterations_run = 0;
  std::int64_t cumulative_iterations = 0;
  std::optional<double> train_dice;
  std::optional<double> val_dice;
  std::string message;
  std::string finished_at;
};

struct CheckpointManifest {
  std::string plan_digest;
  std::vector<StageRecord> stages;

  bool complete() const;
  std::optional<std::size_t> first_incomplete() const;
  std::int64_t total_iterations() const;
};

inline constexpr const char* kPlanFile = "plan.json";
inline constexpr const char* kManifestFile = "manifest.json";

nlohmann::json manifest_to_json(const CheckpointManifest& manifest);
CheckpointManifest manifest_from_json(const nlohmann::json& json);
CheckpointManifest load_manifest(const std::filesystem::path& path);

std::string plan_digest(const StagePlan& plan);
std::string stage_config_digest(const StagePlan& plan, std::size_t index);

// Re-hashes every completed stage's weight file and checks the lineage
// chain. Throws CorruptionError naming the first offending stage.
void verify_manifest(const CheckpointManifest& manifest,
                     const std::filesystem::path& run_dir);

// Runs the plan's stages in order inside `run_dir`, persisting weights and
// the manifest after every stage. A run directory that already holds this
// plan continues from its first incomplete stage; a complete one is left
// untouched. A diverged or failed stage halts the plan.
CheckpointManifest run_plan(const StagePlan& plan, Trainer& trainer,
                            const TrainingData& data,
                            const std::filesystem::path& run_dir);

// Continues the run recorded in `run_dir` (or the directory of a manifest
// path), loading the data directory named by its plan.
CheckpointManifest resume(const std::filesystem::path& run_dir,
                          Trainer& trainer);

}  // namespace layoutkit

#endif  // LAYOUTKIT_ORCHESTRATOR_H_
