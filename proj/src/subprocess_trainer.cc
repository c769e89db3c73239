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

#include "layoutkit/subprocess_trainer.h"

#include <spawn.h>
#include <sys/wait.h>

#include <cerrno>
#include <cstring>

#include "layoutkit/digest.h"
#include "layoutkit/errors.h"

extern char** environ;

namespace layoutkit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Exit status of the child, or -1 if it died from a signal.
int spawn_and_wait(const std::vector<std::string>& argv) {
  std::vector<char*> args;
  for (const std::string& arg : argv) args.push_back(const_cast<char*>(arg.c_str()));
  args.push_back(nullptr);
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, args[0], nullptr, nullptr, args.data(), environ);
  if (rc != 0) {
    throw IoError("cannot start '" + argv[0] + "': " + std::strerror(rc));
  }
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw IoError("waitpid failed");
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

json make_stage_request(const StageRequest& request, const TrainingData& data) {
  const fs::path dir = fs::absolute(request.stage_dir);
  return {{"stage", request.name},
          {"schedule", schedule_to_json(request.schedule)},
          {"train_annotations", (dir / "train.json").string()},
          {"val_annotations", (dir / "val.json").string()},
          {"image_dir", fs::absolute(data.root).string()},
          {"init_weights", request.init_weights
                               ? json(fs::absolute(*request.init_weights).string())
                               : json(nullptr)},
          {"seed", request.seed},
          {"output_dir", dir.string()},
          {"result_path", (dir / "result.json").string()}};
}

StageOutcome parse_stage_result(const json& result, const fs::path& output_dir) {
  StageOutcome outcome;
  try {
    const std::string status = result.at("status").get<std::string>();
    if (status == "ok") {
      outcome.status = StageStatus::kCompleted;
    } else if (status == "diverged") {
      outcome.status = StageStatus::kDiverged;
    } else if (status == "failed") {
      outcome.status = StageStatus::kFailed;
    } else {
      throw ValidationError("result: unknown status '" + status + "'");
    }
    outcome.message = result.value("message", std::string());
    outcome.iterations_run = result.value("iterations_run", std::int64_t{0});
    auto resolve = [&](const char* key) -> fs::path {
      auto it = result.find(key);
      if (it == result.end() || it->is_null()) return {};
      fs::path path = it->get<std::string>();
      return path.is_absolute() ? path : output_dir / path;
    };
    outcome.final_weights = resolve("final_weights");
    outcome.history_csv = resolve("history_csv");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("result: ") + e.what());
  }
  if (outcome.status == StageStatus::kCompleted && outcome.final_weights.empty()) {
    throw ValidationError("result: status ok without final_weights");
  }
  if (outcome.iterations_run < 0) {
    throw ValidationError("result: negative iterations_run");
  }
  return outcome;
}

SubprocessTrainer::SubprocessTrainer(std::vector<std::string> command)
    : command_(std::move(command)) {
  if (command_.empty()) throw ValidationError("adapter command is empty");
}

StageOutcome SubprocessTrainer::run_stage(const StageRequest& request,
                                          const TrainingData& data) {
  const json request_json = make_stage_request(request, data);
  save_dataset(request_json["train_annotations"].get<std::string>(), request.train);
  save_dataset(request_json["val_annotations"].get<std::string>(), request.val);
  const fs::path request_path = fs::absolute(request.stage_dir) / "request.json";
  write_file_atomic(request_path, request_json.dump(2) + "\n");

  std::vector<std::string> argv = command_;
  argv.push_back(request_path.string());
  const int exit_code = spawn_and_wait(argv);

  const fs::path result_path = request_json["result_path"].get<std::string>();
  if (!fs::exists(result_path)) {
    StageOutcome outcome;
    outcome.status = StageStatus::kFailed;
    outcome.message = "adapter exited with status " + std::to_string(exit_code) +
                      " without writing " + result_path.string();
    return outcome;
  }
  json result;
  try {
    result = json::parse(read_binary_file(result_path));
  } catch (const json::parse_error& e) {
    throw ParseError(result_path.string() + ": malformed JSON at byte " +
                         std::to_string(json_error_offset(e.byte)),
                     json_error_offset(e.byte));
  }
  StageOutcome outcome = parse_stage_result(result, request.stage_dir);
  if (exit_code != 0 && outcome.status == StageStatus::kCompleted) {
    outcome.status = StageStatus::kFailed;
    outcome.message = "adapter reported ok but exited with status " +
                      std::to_string(exit_code);
  }
  return outcome;
}

}  // namespace layoutkit
