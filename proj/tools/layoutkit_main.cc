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

// layoutkit: command-line entry point. Results go to stdout as JSON or CSV,
// diagnostics to stderr. Exit codes: 0 success, 2 validation failure,
// 3 I/O failure, 4 internal failure.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "layoutkit/coco.h"
#include "layoutkit/digest.h"
#include "layoutkit/errors.h"
#include "layoutkit/image.h"
#include "layoutkit/metrics.h"
#include "layoutkit/orchestrator.h"
#include "layoutkit/schedule.h"
#include "layoutkit/segmenter.h"
#include "layoutkit/segmenter_trainer.h"
#include "layoutkit/submission.h"
#include "layoutkit/subprocess_trainer.h"
#include "layoutkit/synth.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace layoutkit {
namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;
constexpr std::string_view kPresetPrefix = "preset:paper-6stage";

std::string shortest(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, text);
}

std::unique_ptr<Trainer> make_trainer(const std::string& adapter,
                                      const TrainerConfig& config) {
  if (adapter.empty()) return std::make_unique<SegmenterTrainer>(config);
  std::vector<std::string> command;
  std::istringstream words(adapter);
  for (std::string word; words >> word;) command.push_back(word);
  return std::make_unique<SubprocessTrainer>(std::move(command));
}

// Numeric id from the trailing digits of a file stem ("000012" -> 12).
std::int64_t id_from_stem(const fs::path& path) {
  static const std::regex kTrailingDigits("([0-9]+)$");
  std::smatch match;
  const std::string stem = path.stem().string();
  if (!std::regex_search(stem, match, kTrailingDigits)) {
    throw ValidationError("cannot derive an image id from " + path.string());
  }
  return std::stoll(match[1]);
}

ScheduleConfig load_schedule_arg(const std::string& arg) {
  if (arg.rfind(kPresetPrefix, 0) == 0) {
    const StagePlan preset = paper_preset();
    std::size_t stage = 1;
    const std::string rest = arg.substr(kPresetPrefix.size());
    if (!rest.empty()) {
      if (rest[0] != '/') throw ValidationError("expected preset:paper-6stage/<n>");
      stage = std::stoul(rest.substr(1));
    }
    if (stage < 1 || stage > preset.stages.size()) {
      throw ValidationError("preset stage must be in 1.." +
                            std::to_string(preset.stages.size()));
    }
    return preset.stages[stage - 1].schedule;
  }
  const std::string raw = read_binary_file(arg);
  try {
    return schedule_from_json(json::parse(raw));
  } catch (const json::parse_error& e) {
    const std::size_t offset = json_error_offset(e.byte);
    throw ParseError(arg + ": malformed JSON at byte " + std::to_string(offset),
                     offset);
  }
}

MaskMap load_predictions(const fs::path& path) {
  if (fs::is_directory(path)) {
    // <image_id>_<class>.pgm, nonzero pixels set.
    static const std::regex kMaskName("([0-9]+)_([A-Za-z0-9_]+)");
    MaskMap masks;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() != ".pgm") continue;
      std::smatch match;
      const std::string stem = entry.path().stem().string();
      if (!std::regex_match(stem, match, kMaskName)) {
        throw ValidationError("mask file name must be <image_id>_<class>.pgm: " +
                              entry.path().string());
      }
      const GrayImage image = read_pgm(entry.path());
      masks.emplace(CellKey{std::stoll(match[1]), match[2]},
                    BitMask::from_dense(image.pixels));
    }
    return masks;
  }
  const std::vector<SubmissionRow> rows =
      parse_submission(read_binary_file(path));
  return submission_masks(rows);
}

void log_manifest(const CheckpointManifest& manifest) {
  for (const StageRecord& stage : manifest.stages) {
    std::cerr << "stage " << stage.name << ": " << stage_status_name(stage.status)
              << ", " << stage.iterations_run << " iterations";
    if (stage.val_dice) std::cerr << ", val dice " << *stage.val_dice;
    if (!stage.message.empty()) std::cerr << " (" << stage.message << ")";
    std::cerr << '\n';
  }
}

}  // namespace
}  // namespace layoutkit

int main(int argc, char** argv) {
  using namespace layoutkit;
  CLI::App app{"Document layout segmentation harness"};
  app.require_subcommand(1);

  // validate
  auto* validate = app.add_subcommand("validate", "Check a COCO-subset annotation file");
  std::string validate_path, remap_path;
  bool strict = false;
  validate->add_option("annotations", validate_path)->required();
  validate->add_flag("--strict", strict, "Reject unknown classes and out-of-bounds vertices");
  validate->add_option("--remap", remap_path, "JSON object renaming categories");

  // split
  auto* split = app.add_subcommand("split", "Seeded image-level train/val split");
  std::string split_path, out_train, out_val;
  double fraction = 0.75;
  std::uint64_t split_seed = 0;
  split->add_option("annotations", split_path)->required();
  split->add_option("--fraction", fraction)->required();
  split->add_option("--seed", split_seed)->required();
  split->add_option("--out-train", out_train)->required();
  split->add_option("--out-val", out_val)->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic layout dataset");
  SynthSpec synth_spec;
  std::string size = "64x64", synth_dir;
  synth->add_option("--seed", synth_spec.seed)->required();
  synth->add_option("--images", synth_spec.num_images)->required();
  synth->add_option("--size", size, "HxW");
  synth->add_option("--out-dir", synth_dir)->required();
  synth->add_option("--min-regions", synth_spec.min_regions);
  synth->add_option("--max-regions", synth_spec.max_regions);
  synth->add_option("--jitter", synth_spec.jitter);

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Dice report for predictions");
  std::string pred_path, truth_path;
  bool micro = false;
  evaluate_cmd
      ->add_option("--pred", pred_path,
                   "Submission CSV or directory of <id>_<class>.pgm masks")
      ->required();
  evaluate_cmd->add_option("--truth", truth_path)->required();
  evaluate_cmd->add_flag("--micro", micro, "Also report pooled-pixel Dice");

  // schedule
  auto* schedule = app.add_subcommand("schedule", "Tabulate a learning-rate schedule");
  std::string schedule_config;
  std::int64_t stride = 1;
  schedule
      ->add_option("--config", schedule_config,
                   "JSON file or preset:paper-6stage[/N]")
      ->required();
  schedule->add_option("--stride", stride);

  // run-stages
  auto* run = app.add_subcommand("run-stages", "Run a staged training plan");
  std::string plan_arg, data_dir, run_dir;
  double scale = 0.0;
  std::string adapter;
  TrainerConfig trainer_config;
  auto add_trainer_options = [&](CLI::App* command) {
    command->add_option("--adapter", adapter,
                        "External trainer command line (split on spaces); "
                        "replaces the built-in segmenter");
    command->add_option("--images-per-batch", trainer_config.images_per_batch);
    command->add_option("--pixels-per-image", trainer_config.pixels_per_image);
    command->add_option("--workers", trainer_config.workers);
    command->add_option("--logit-scale", trainer_config.logit_scale);
  };
  run->add_option("--plan", plan_arg, "Plan JSON or preset:paper-6stage")->required();
  run->add_option("--scale", scale, "Multiplier for every max_iter and milestone");
  run->add_option("--data", data_dir, "Directory with annotations.json and images");
  run->add_option("--out", run_dir)->required();
  add_trainer_options(run);

  // resume
  auto* resume_cmd = app.add_subcommand("resume", "Continue an interrupted run");
  std::string resume_dir;
  resume_cmd->add_option("run_dir", resume_dir)->required();
  add_trainer_options(resume_cmd);

  // infer
  auto* infer = app.add_subcommand("infer", "Predict masks into a submission CSV");
  std::string weights_path, images_dir, infer_out, infer_annotations;
  infer->add_option("--weights", weights_path)->required();
  infer->add_option("--images", images_dir)->required();
  infer->add_option("--out", infer_out)->required();
  infer->add_option("--annotations", infer_annotations,
                    "Take image ids and file names from this dataset");

  // submit-check
  auto* submit_check = app.add_subcommand("submit-check", "Validate a submission CSV");
  std::string submission_path;
  submit_check->add_option("csv", submission_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*validate) {
      ParseOptions options;
      options.mode = strict ? ValidationMode::kStrict : ValidationMode::kLenient;
      if (!remap_path.empty()) options.category_remap = load_category_remap(remap_path);
      const Dataset dataset = load_dataset(validate_path, options);
      json summary = {{"images", dataset.images.size()},
                      {"categories", dataset.categories.size()},
                      {"annotations", dataset.annotations.size()},
                      {"histogram", class_histogram(dataset)}};
      std::cout << summary.dump() << "\n";
    } else if (*split) {
      const Dataset dataset = load_dataset(split_path);
      const DatasetSplit halves = split_dataset(dataset, {fraction, split_seed});
      save_dataset(out_train, halves.train);
      save_dataset(out_val, halves.val);
      std::cout << json{{"train", halves.train.images.size()},
                        {"val", halves.val.images.size()}}.dump()
                << "\n";
    } else if (*synth) {
      const auto x = size.find('x');
      if (x == std::string::npos) throw ValidationError("--size must be HxW");
      synth_spec.height = std::stoi(size.substr(0, x));
      synth_spec.width = std::stoi(size.substr(x + 1));
      const SynthOutput output = generate(synth_spec);
      write_synth(synth_dir, output);
      std::cout << json{{"images", output.dataset.images.size()},
                        {"annotations", output.dataset.annotations.size()},
                        {"histogram", class_histogram(output.dataset)}}.dump()
                << "\n";
    } else if (*evaluate_cmd) {
      const Dataset truth = load_dataset(truth_path);
      const DiceReport report = evaluate(load_predictions(pred_path), truth);
      std::cout << report_to_json(report, micro).dump() << "\n";
    } else if (*schedule) {
      const ScheduleConfig config = load_schedule_arg(schedule_config);
      std::cout << "iteration,lr\n";
      for (const auto& [t, lr] : schedule_table(config, stride)) {
        std::cout << t << ',' << shortest(lr) << '\n';
      }
    } else if (*run) {
      StagePlan plan;
      if (plan_arg == kPresetPrefix) {
        plan = paper_preset();
      } else {
        plan = load_plan(plan_arg);
      }
      if (scale > 0.0) plan.scale = scale;
      if (!data_dir.empty()) plan.dataset = data_dir;
      if (plan.dataset.empty()) throw ValidationError("no dataset: pass --data");
      plan.dataset = fs::absolute(plan.dataset).lexically_normal().string();
      const TrainingData data = load_training_data(plan.dataset);

      const auto trainer = make_trainer(adapter, trainer_config);
      const CheckpointManifest manifest = run_plan(plan, *trainer, data, run_dir);
      log_manifest(manifest);
      std::cout << manifest_to_json(manifest).dump(2) << "\n";
      if (!manifest.complete()) return kExitInternal;
    } else if (*resume_cmd) {
      const auto trainer = make_trainer(adapter, trainer_config);
      const CheckpointManifest manifest = resume(resume_dir, *trainer);
      log_manifest(manifest);
      std::cout << manifest_to_json(manifest).dump(2) << "\n";
      if (!manifest.complete()) return kExitInternal;
    } else if (*infer) {
      const Weights weights = load_weights(weights_path);
      std::vector<std::pair<std::int64_t, fs::path>> images;
      if (!infer_annotations.empty()) {
        const Dataset dataset = load_dataset(infer_annotations);
        for (const ImageRecord& image : dataset.images) {
          fs::path path = fs::path(images_dir) / image.file_name;
          if (!fs::exists(path)) path = fs::path(images_dir) / fs::path(image.file_name).filename();
          images.emplace_back(image.id, path);
        }
      } else {
        for (const auto& entry : fs::directory_iterator(images_dir)) {
          if (entry.path().extension() == ".pgm") {
            images.emplace_back(id_from_stem(entry.path()), entry.path());
          }
        }
      }
      std::sort(images.begin(), images.end());
      std::vector<SubmissionRow> rows;
      for (const auto& [id, path] : images) {
        for (const auto& [name, mask] : predict_masks(weights, read_pgm(path))) {
          rows.push_back(make_submission_row(id, name, mask));
        }
      }
      write_text(infer_out, format_submission(rows));
      std::cerr << "wrote " << rows.size() << " rows to " << infer_out << "\n";
    } else if (*submit_check) {
      const std::vector<SubmissionRow> rows =
          parse_submission(read_binary_file(submission_path));
      check_submission(rows);
      std::cout << json{{"rows", rows.size()}, {"valid", true}}.dump() << "\n";
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const CorruptionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
