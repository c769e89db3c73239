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

#ifndef LAYOUTKIT_SUBPROCESS_TRAINER_H_
#define LAYOUTKIT_SUBPROCESS_TRAINER_H_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "layoutkit/orchestrator.h"

namespace layoutkit {

// File-based handshake with an external training process.
//
// request.json:
//   {"stage": name, "schedule": {base_lr, warmup_iters, warmup_factor, gamma,
//    milestones, max_iter}, "train_annotations": path, "val_annotations":
//    path, "image_dir": path, "init_weights": path | null, "seed": n,
//    "output_dir": path, "result_path": path}
// result.json:
//   {"status": "ok" | "diverged" | "failed", "final_weights": path,
//    "iterations_run": n, "history_csv": path, "message": text}
// Relative result paths resolve against output_dir. All request paths are
// absolute.
nlohmann::json make_stage_request(const StageRequest& request,
                                  const TrainingData& data);
StageOutcome parse_stage_result(const nlohmann::json& result,
                                const std::filesystem::path& output_dir);

// Spawns `command` with the request path appended as its only extra argument
// and waits for it.
class SubprocessTrainer : public Trainer {
 public:
  explicit SubprocessTrainer(std::vector<std::string> command);

  StageOutcome run_stage(const StageRequest& request,
                         const TrainingData& data) override;

 private:
  std::vector<std::string> command_;
};

}  // namespace layoutkit

#endif  // LAYOUTKIT_SUBPROCESS_TRAINER_H_
