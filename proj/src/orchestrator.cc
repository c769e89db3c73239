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

#include "layoutkit/orchestrator.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>

#include "layoutkit/digest.h"
#include "layoutkit/errors.h"

namespace layoutkit {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

ScheduleConfig preset_schedule(double base_lr, std::int64_t warmup,
                               double gamma, std::int64_t max_iter) {
  ScheduleConfig schedule;
  schedule.base_lr = base_lr;
  schedule.warmup_iters = warmup;
  schedule.gamma = gamma;
  schedule.max_iter = max_iter;
  schedule.milestones = {max_iter * 6 / 10, max_iter * 8 / 10};
  return schedule;
}

const char* init_kind_name(StageInit::Kind kind) {
  switch (kind) {
    case StageInit::Kind::kFresh:
      return "fresh";
    case StageInit::Kind::kFromPrevious:
      return "from_previous";
    case StageInit::Kind::kExternal:
      return "external";
  }
  return "fresh";
}

StageInit::Kind init_kind_from_name(const std::string& name) {
  if (name == "fresh") return StageInit::Kind::kFresh;
  if (name == "from_previous") return StageInit::Kind::kFromPrevious;
  if (name == "external") return StageInit::Kind::kExternal;
  throw ValidationError("unknown stage init '" + name + "'");
}

StageStatus status_from_name(const std::string& name) {
  for (StageStatus s : {StageStatus::kPending, StageStatus::kCompleted,
                        StageStatus::kDiverged, StageStatus::kFailed}) {
    if (name == stage_status_name(s)) return s;
  }
  throw ValidationError("unknown stage status '" + name + "'");
}

json init_to_json(const StageInit& init) {
  if (init.kind == StageInit::Kind::kExternal) {
    return {{"external", init.external_path.string()}};
  }
  return init_kind_name(init.kind);
}

StageInit init_from_json(const json& value) {
  if (value.is_string()) {
    const auto kind = init_kind_from_name(value.get<std::string>());
    if (kind == StageInit::Kind::kExternal) {
      throw ValidationError("external init needs {\"external\": <path>}");
    }
    return {kind, {}};
  }
  if (value.is_object() && value.contains("external") &&
      value.at("external").is_string()) {
    return StageInit::external(value.at("external").get<std::string>());
  }
  throw ValidationError(
      "stage init must be \"fresh\", \"from_previous\" or {\"external\": path}");
}

template <typename T>
json optional_to_json(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from_json(const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::string stage_dir_name(std::size_t index, const std::string& name) {
  char prefix[16];
  std::snprintf(prefix, sizeof(prefix), "%02zu-", index + 1);
  return prefix + name;
}

bool valid_stage_name(const std::string& name) {
  if (name.empty() || name.size() > 64) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return name != "." && name != "..";
}

void save_manifest(const fs::path& run_dir, const CheckpointManifest& manifest) {
  write_file_atomic(run_dir / kManifestFile,
                    manifest_to_json(manifest).dump(2) + "\n");
}

}  // namespace

StagePlan paper_preset() {
  StagePlan plan;
  plan.seed = 7;
  plan.scale = 1.0;
  struct Row {
    double base_lr;
    std::int64_t warmup;
    double gamma;
    std::int64_t max_iter;
    double train_fraction;
  };
  const Row rows[] = {
      {0.007, 100, 0.0001, 22000, 0.75},   {0.001, 100, 0.0001, 22000, 0.75},
      {0.0005, 0, 0.0001, 22000, 0.75},    {0.00001, 0, 0.00001, 22000, 0.75},
      {0.000001, 0, 0.00001, 22000, 0.75}, {0.000001, 0, 0.00001, 5000, 0.99},
  };
  for (std::size_t i = 0; i < std::size(rows); ++i) {
    StageConfig stage;
    stage.name = "sub" + std::to_string(i + 1);
    stage.init = i == 0 ? StageInit::fresh() : StageInit::from_previous();
    stage.train_fraction = rows[i].train_fraction;
    stage.schedule = preset_schedule(rows[i].base_lr, rows[i].warmup,
                                     rows[i].gamma, rows[i].max_iter);
    stage.seed = i + 1;
    plan.stages.push_back(std::move(stage));
  }
  return plan;
}

void validate_plan(const StagePlan& plan) {
  if (plan.stages.empty()) throw ValidationError("plan has no stages");
  if (!(plan.scale > 0.0 && plan.scale <= 1.0)) {
    throw ValidationError("plan scale must be in (0, 1]");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const StageConfig& stage = plan.stages[i];
    const std::string where = "stage " + std::to_string(i + 1);
    if (!valid_stage_name(stage.name)) {
      throw ValidationError(where + ": name must be 1-64 characters of [A-Za-z0-9_.-]");
    }
    if (!names.insert(stage.name).second) {
      throw ValidationError(where + ": duplicate name '" + stage.name + "'");
    }
    if (i == 0 && stage.init.kind == StageInit::Kind::kFromPrevious) {
      throw ValidationError(where + ": the first stage has no previous weights");
    }
    if (stage.init.kind == StageInit::Kind::kExternal &&
        stage.init.external_path.empty()) {
      throw ValidationError(where + ": external init needs a path");
    }
    if (!(stage.train_fraction > 0.0 && stage.train_fraction <= 1.0)) {
      throw ValidationError(where + ": train_fraction must be in (0, 1]");
    }
    try {
      validate_schedule(stage.schedule);
      validate_schedule(effective_schedule(plan, i));
    } catch (const ValidationError& e) {
      throw ValidationError(where + " '" + stage.name + "': " + e.what());
    }
  }
}

ScheduleConfig effective_schedule(const StagePlan& plan, std::size_t index) {
  return scale_schedule(plan.stages.at(index).schedule, plan.scale);
}

json plan_to_json(const StagePlan& plan) {
  json stages = json::array();
  for (const StageConfig& stage : plan.stages) {
    stages.push_back({{"name", stage.name},
                      {"init", init_to_json(stage.init)},
                      {"train_fraction", stage.train_fraction},
                      {"seed", stage.seed},
                      {"schedule", schedule_to_json(stage.schedule)}});
  }
  return {{"dataset", plan.dataset},
          {"scale", plan.scale},
          {"seed", plan.seed},
          {"stages", std::move(stages)}};
}

StagePlan plan_from_json(const json& root) {
  if (!root.is_object()) throw ValidationError("plan must be a JSON object");
  StagePlan plan;
  try {
    plan.dataset = root.value("dataset", std::string());
    plan.scale = root.value("scale", 1.0);
    plan.seed = root.value("seed", std::uint64_t{0});
    const json& stages = root.at("stages");
    if (!stages.is_array()) throw ValidationError("plan stages must be an array");
    for (const json& entry : stages) {
      StageConfig stage;
      stage.name = entry.at("name").get<std::string>();
      stage.init = init_from_json(entry.at("init"));
      stage.train_fraction = entry.value("train_fraction", 0.75);
      stage.seed = entry.value("seed", std::uint64_t{0});
      stage.schedule = schedule_from_json(entry.at("schedule"));
      plan.stages.push_back(std::move(stage));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("plan: ") + e.what());
  }
  validate_plan(plan);
  return plan;
}

StagePlan load_plan(const fs::path& path) {
  const std::string raw = read_binary_file(path);
  json root;
  try {
    root = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": malformed JSON at byte " +
                         std::to_string(json_error_offset(e.byte)),
                     json_error_offset(e.byte));
  }
  return plan_from_json(root);
}

const GrayImage& TrainingData::raster_for(std::int64_t image_id) const {
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    if (dataset.images[i].id == image_id) return rasters[i];
  }
  throw ValidationError("no raster for image " + std::to_string(image_id));
}

TrainingData load_training_data(const fs::path& dir) {
  TrainingData data;
  data.root = dir;
  data.dataset = load_dataset(dir / "annotations.json");
  data.rasters.reserve(data.dataset.images.size());
  for (const ImageRecord& image : data.dataset.images) {
    GrayImage raster = read_pgm(dir / image.file_name);
    if (raster.height() != image.height || raster.width() != image.width) {
      throw ValidationError("image " + std::to_string(image.id) + " (" +
                            image.file_name + ") does not match its record size");
    }
    data.rasters.push_back(std::move(raster));
  }
  return data;
}

const char* stage_status_name(StageStatus status) {
  switch (status) {
    case StageStatus::kPending:
      return "pending";
    case StageStatus::kCompleted:
      return "completed";
    case StageStatus::kDiverged:
      return "diverged";
    case StageStatus::kFailed:
      return "failed";
  }
  return "failed";
}

bool CheckpointManifest::complete() const { return !first_incomplete(); }

std::optional<std::size_t> CheckpointManifest::first_incomplete() const {
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].status != StageStatus::kCompleted) return i;
  }
  return std::nullopt;
}

std::int64_t CheckpointManifest::total_iterations() const {
  std::int64_t total = 0;
  for (const StageRecord& stage : stages) total += stage.iterations_run;
  return total;
}

json manifest_to_json(const CheckpointManifest& manifest) {
  json stages = json::array();
  for (const StageRecord& s : manifest.stages) {
    stages.push_back({{"name", s.name},
                      {"init", init_kind_name(s.init)},
                      {"status", stage_status_name(s.status)},
                      {"config_digest", s.config_digest},
                      {"init_weights_digest", optional_to_json(s.init_weights_digest)},
                      {"final_weights_digest", optional_to_json(s.final_weights_digest)},
                      {"final_weights", s.final_weights},
                      {"history", s.history},
                      {"iterations_run", s.iterations_run},
                      {"cumulative_iterations", s.cumulative_iterations},
                      {"train_dice", optional_to_json(s.train_dice)},
                      {"val_dice", optional_to_json(s.val_dice)},
                      {"message", s.message},
                      {"finished_at", s.finished_at}});
  }
  return {{"format", "layoutkit-manifest/1"},
          {"plan_digest", manifest.plan_digest},
          {"total_iterations", manifest.total_iterations()},
          {"stages", std::move(stages)}};
}

CheckpointManifest manifest_from_json(const json& root) {
  CheckpointManifest manifest;
  try {
    if (root.at("format").get<std::string>() != "layoutkit-manifest/1") {
      throw ValidationError("unsupported manifest format");
    }
    manifest.plan_digest = root.at("plan_digest").get<std::string>();
    for (const json& entry : root.at("stages")) {
      StageRecord s;
      s.name = entry.at("name").get<std::string>();
      s.init = init_kind_from_name(entry.at("init").get<std::string>());
      s.status = status_from_name(entry.at("status").get<std::string>());
      s.config_digest = entry.at("config_digest").get<std::string>();
      s.init_weights_digest =
          optional_from_json<std::string>(entry, "init_weights_digest");
      s.final_weights_digest =
          optional_from_json<std::string>(entry, "final_weights_digest");
      s.final_weights = entry.at("final_weights").get<std::string>();
      s.history = entry.at("history").get<std::string>();
      s.iterations_run = entry.at("iterations_run").get<std::int64_t>();
      s.cumulative_iterations =
          entry.at("cumulative_iterations").get<std::int64_t>();
      s.train_dice = optional_from_json<double>(entry, "train_dice");
      s.val_dice = optional_from_json<double>(entry, "val_dice");
      s.message = entry.value("message", std::string());
      s.finished_at = entry.value("finished_at", std::string());
      manifest.stages.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
  return manifest;
}

CheckpointManifest load_manifest(const fs::path& path) {
  const std::string raw = read_binary_file(path);
  try {
    return manifest_from_json(json::parse(raw));
  } catch (const json::parse_error& e) {
    throw CorruptionError(path.string() + ": malformed manifest JSON at byte " +
                          std::to_string(json_error_offset(e.byte)));
  }
}

std::string plan_digest(const StagePlan& plan) {
  return sha256_hex(plan_to_json(plan).dump());
}

std::string stage_config_digest(const StagePlan& plan, std::size_t index) {
  const StageConfig& stage = plan.stages.at(index);
  const json config = {{"name", stage.name},
                       {"init", init_to_json(stage.init)},
                       {"train_fraction", stage.train_fraction},
                       {"seed", stage.seed},
                       {"split_seed", plan.seed},
                       {"schedule", schedule_to_json(effective_schedule(plan, index))}};
  return sha256_hex(config.dump());
}

void verify_manifest(const CheckpointManifest& manifest, const fs::path& run_dir) {
  std::int64_t cumulative = 0;
  const StageRecord* previous = nullptr;
  for (const StageRecord& stage : manifest.stages) {
    if (stage.status != StageStatus::kCompleted) break;
    const std::string where = "stage '" + stage.name + "'";
    if (!stage.final_weights_digest) {
      throw CorruptionError(where + ": completed without a weights digest");
    }
    const fs::path weights = run_dir / stage.final_weights;
    if (!fs::exists(weights)) {
      throw CorruptionError(where + ": weights file " + weights.string() +
                            " is missing");
    }
    if (sha256_file(weights) != *stage.final_weights_digest) {
      throw CorruptionError(where + ": weights file digest mismatch");
    }
    if (stage.init == StageInit::Kind::kFromPrevious &&
        (previous == nullptr ||
         stage.init_weights_digest != previous->final_weights_digest)) {
      throw CorruptionError(where +
                            ": init digest does not match predecessor output");
    }
    cumulative += stage.iterations_run;
    if (stage.cumulative_iterations != cumulative) {
      throw CorruptionError(where + ": cumulative iteration count is wrong");
    }
    previous = &stage;
  }
}

CheckpointManifest run_plan(const StagePlan& plan, Trainer& trainer,
                            const TrainingData& data, const fs::path& run_dir) {
  validate_plan(plan);
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) throw IoError("cannot create " + run_dir.string());

  const std::string digest = plan_digest(plan);
  CheckpointManifest manifest;
  if (fs::exists(run_dir / kManifestFile)) {
    manifest = load_manifest(run_dir / kManifestFile);
    if (manifest.plan_digest != digest ||
        manifest.stages.size() != plan.stages.size()) {
      throw ValidationError(run_dir.string() +
                            " already holds a run of a different plan");
    }
    verify_manifest(manifest, run_dir);
  } else {
    manifest.plan_digest = digest;
    for (std::size_t i = 0; i < plan.stages.size(); ++i) {
      StageRecord record;
      record.name = plan.stages[i].name;
      record.init = plan.stages[i].init.kind;
      record.config_digest = stage_config_digest(plan, i);
      manifest.stages.push_back(std::move(record));
    }
    write_file_atomic(run_dir / kPlanFile, plan_to_json(plan).dump(2) + "\n");
    save_manifest(run_dir, manifest);
  }

  const auto start = manifest.first_incomplete();
  if (!start) return manifest;

  for (std::size_t i = *start; i < plan.stages.size(); ++i) {
    const StageConfig& stage = plan.stages[i];
    StageRecord& record = manifest.stages[i];
    const std::int64_t carried = i == 0 ? 0 : manifest.stages[i - 1].cumulative_iterations;

    StageRequest request;
    request.index = i;
    request.name = stage.name;
    request.schedule = effective_schedule(plan, i);
    request.seed = stage.seed;
    DatasetSplit split =
        split_dataset(data.dataset, {stage.train_fraction, plan.seed});
    request.train = std::move(split.train);
    request.val = std::move(split.val);

    record.init_weights_digest.reset();
    switch (stage.init.kind) {
      case StageInit::Kind::kFresh:
        break;
      case StageInit::Kind::kFromPrevious: {
        const StageRecord& previous = manifest.stages[i - 1];
        const fs::path path = run_dir / previous.final_weights;
        // The chain is re-derived from the bytes on disk, never copied.
        record.init_weights_digest = sha256_file(path);
        if (record.init_weights_digest != previous.final_weights_digest) {
          throw CorruptionError("stage '" + previous.name +
                                "': weights changed since it completed");
        }
        request.init_weights = path;
        break;
      }
      case StageInit::Kind::kExternal:
        if (!fs::exists(stage.init.external_path)) {
          throw IoError("stage '" + stage.name + "': external weights " +
                        stage.init.external_path.string() + " not found");
        }
        record.init_weights_digest = sha256_file(stage.init.external_path);
        request.init_weights = stage.init.external_path;
        break;
    }

    const fs::path relative_dir = fs::path("stages") / stage_dir_name(i, stage.name);
    request.stage_dir = run_dir / relative_dir;
    fs::remove_all(request.stage_dir, ec);
    fs::create_directories(request.stage_dir, ec);
    if (ec) throw IoError("cannot create " + request.stage_dir.string());

    StageOutcome outcome;
    try {
      outcome = trainer.run_stage(request, data);
    } catch (const Error& e) {
      outcome.status = StageStatus::kFailed;
      outcome.message = e.what();
    }

    record.status = outcome.status;
    record.message = outcome.message;
    record.iterations_run = outcome.iterations_run;
    record.cumulative_iterations = carried + outcome.iterations_run;
    record.train_dice = outcome.train_dice;
    record.val_dice = outcome.val_dice;
    record.final_weights.clear();
    record.history.clear();
    record.final_weights_digest.reset();
    if (outcome.status == StageStatus::kCompleted) {
      fs::path weights = outcome.final_weights;
      if (!fs::exists(weights)) {
        throw IoError("stage '" + stage.name +
                      "': trainer reported missing weights " + weights.string());
      }
      if (!fs::equivalent(weights.parent_path(), request.stage_dir)) {
        const fs::path copy =
            request.stage_dir / ("final" + weights.extension().string());
        fs::copy_file(weights, copy, fs::copy_options::overwrite_existing);
        weights = copy;
      }
      record.final_weights = (relative_dir / weights.filename()).generic_string();
      record.final_weights_digest = sha256_file(weights);
      if (!outcome.history_csv.empty()) {
        record.history =
            fs::relative(outcome.history_csv, run_dir, ec).generic_string();
      }
    }
    record.finished_at = utc_timestamp();
    save_manifest(run_dir, manifest);
    if (outcome.status != StageStatus::kCompleted) break;
  }
  return manifest;
}

CheckpointManifest resume(const fs::path& path, Trainer& trainer) {
  const fs::path run_dir =
      fs::is_regular_file(path) ? path.parent_path() : path;
  if (!fs::exists(run_dir / kManifestFile)) {
    throw IoError("no manifest in " + run_dir.string());
  }
  const CheckpointManifest manifest = load_manifest(run_dir / kManifestFile);
  verify_manifest(manifest, run_dir);
  if (manifest.complete()) return manifest;
  const StagePlan plan = load_plan(run_dir / kPlanFile);
  const TrainingData data = load_training_data(plan.dataset);
  return run_plan(plan, trainer, data, run_dir);
}

}  // namespace layoutkit
