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

#include <stdio.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"
#include "layoutkit/coco.h"
#include "layoutkit/digest.h"
#include "layoutkit/image.h"
#include "layoutkit/mask.h"
#include "layoutkit/submission.h"
#include "test_util.h"

namespace layoutkit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::ScopedTempDir;

struct Result {
  int exit_code = -1;
  std::string out;
};

// Runs the CLI with stderr discarded.
Result cli(const std::string& args) {
  const std::string command = std::string(LAYOUTKIT_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return {};
  Result result;
  char buffer[4096];
  std::size_t n;
  while ((n = fread(buffer, 1, sizeof(buffer), pipe)) > 0) result.out.append(buffer, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

TEST(CliTest, SynthValidateAndSplit) {
  ScopedTempDir tmp;
  const fs::path data = tmp.path() / "data";
  Result r = cli("synth --seed 4 --images 10 --size 32x40 --out-dir " + q(data));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.out)["images"], 10);

  r = cli("validate --strict " + q(data / "annotations.json"));
  ASSERT_EQ(r.exit_code, 0);
  const json summary = json::parse(r.out);
  EXPECT_EQ(summary["images"], 10);
  EXPECT_EQ(summary["categories"], 4);

  r = cli("split " + q(data / "annotations.json") + " --fraction 0.75 --seed 7 --out-train " +
          q(tmp.path() / "train.json") + " --out-val " + q(tmp.path() / "val.json"));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.out), (json{{"train", 8}, {"val", 2}}));
  EXPECT_EQ(load_dataset(tmp.path() / "train.json").images.size(), 8u);
}

TEST(CliTest, ValidateExitCodes) {
  ScopedTempDir tmp;
  const fs::path bad = tmp.path() / "bad.json";
  std::ofstream(bad) << R"({"images": [{"id": 1, "file_name": "a", "width": 4, "height": 4}],
    "categories": [{"id": 1, "name": "paragraph"}],
    "annotations": [{"id": 1, "image_id": 99, "category_id": 1,
                     "segmentation": [[0,0,1,0,1,1]]}]})";
  EXPECT_EQ(cli("validate " + q(bad)).exit_code, 2);
  std::ofstream(tmp.path() / "broken.json") << "{\"images\": [";
  EXPECT_EQ(cli("validate " + q(tmp.path() / "broken.json")).exit_code, 2);
  EXPECT_EQ(cli("validate " + q(tmp.path() / "missing.json")).exit_code, 3);
  EXPECT_EQ(cli("validate").exit_code, 2);
}

TEST(CliTest, ScheduleTable) {
  Result r = cli("schedule --config preset:paper-6stage/1 --stride 11000");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out,
            "iteration,lr\n0,7e-06\n100,0.007\n11000,0.007\n13200,7.000000000000001e-07\n"
            "17600,7.000000000000002e-11\n21999,7.000000000000002e-11\n");
}

TEST(CliTest, EvaluateInferAndSubmitCheck) {
  ScopedTempDir tmp;
  const fs::path data = tmp.path() / "data";
  ASSERT_EQ(cli("synth --seed 2 --images 3 --size 16x16 --out-dir " + q(data)).exit_code, 0);
  const Dataset truth = load_dataset(data / "annotations.json");

  // Perfect predictions as a submission CSV.
  std::vector<SubmissionRow> rows;
  for (const auto& image : truth.images) {
    for (const auto& category : truth.categories) {
      std::vector<Polygon> polygons;
      for (const auto& a : truth.annotations) {
        if (a.image_id == image.id && a.category_id == category.id) {
          polygons.insert(polygons.end(), a.segmentation.begin(), a.segmentation.end());
        }
      }
      rows.push_back(make_submission_row(image.id, category.name,
                                         rasterize(polygons, image.height, image.width)));
    }
  }
  write_file_atomic(tmp.path() / "perfect.csv", format_submission(rows));
  Result r = cli("evaluate --pred " + q(tmp.path() / "perfect.csv") + " --truth " +
                 q(data / "annotations.json") + " --micro");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.out)["macro"], 1.0);
  EXPECT_EQ(json::parse(r.out)["micro"], 1.0);

  // The same masks as a PGM directory.
  fs::create_directories(tmp.path() / "masks");
  for (const auto& row : rows) {
    const BitMask m = rle_decode({row.height, row.width, parse_rle_counts(row.rle)});
    GrayImage image;
    image.pixels = (m.to_dense() * std::uint8_t{255}).matrix().cast<std::uint8_t>();
    write_pgm(tmp.path() / "masks" /
                  (std::to_string(row.image_id) + "_" + row.category + ".pgm"),
              image);
  }
  r = cli("evaluate --pred " + q(tmp.path() / "masks") + " --truth " +
          q(data / "annotations.json"));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.out)["macro"], 1.0);

  // Trained weights give a structurally valid submission.
  const fs::path weights = tmp.path() / "w.tseg";
  ASSERT_EQ(cli("run-stages --plan preset:paper-6stage --scale 0.01 --data " + q(data) +
                " --out " + q(tmp.path() / "run"))
                .exit_code,
            0);
  const json manifest = json::parse(read_binary_file(tmp.path() / "run" / "manifest.json"));
  fs::copy_file(tmp.path() / "run" / manifest["stages"][5]["final_weights"].get<std::string>(),
                weights);
  r = cli("infer --weights " + q(weights) + " --images " + q(data) + " --annotations " +
          q(data / "annotations.json") + " --out " + q(tmp.path() / "sub.csv"));
  ASSERT_EQ(r.exit_code, 0);
  r = cli("submit-check " + q(tmp.path() / "sub.csv"));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.out)["rows"], 12);
  r = cli("evaluate --pred " + q(tmp.path() / "sub.csv") + " --truth " +
          q(data / "annotations.json"));
  ASSERT_EQ(r.exit_code, 0);

  // Inference from bare file names takes ids from trailing digits.
  r = cli("infer --weights " + q(weights) + " --images " + q(data / "images") + " --out " +
          q(tmp.path() / "sub2.csv"));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(read_binary_file(tmp.path() / "sub2.csv"),
            read_binary_file(tmp.path() / "sub.csv"));

  std::ofstream(tmp.path() / "bad.csv") << kSubmissionHeader << "\n1,table,2,2,3 2\n";
  EXPECT_EQ(cli("submit-check " + q(tmp.path() / "bad.csv")).exit_code, 2);
}

TEST(CliTest, RunStagesResumeAndAdapter) {
  ScopedTempDir tmp;
  const fs::path data = tmp.path() / "data";
  ASSERT_EQ(cli("synth --seed 9 --images 6 --size 16x16 --out-dir " + q(data)).exit_code, 0);
  Result r = cli("run-stages --plan preset:paper-6stage --scale 0.01 --data " + q(data) +
                 " --out " + q(tmp.path() / "run"));
  ASSERT_EQ(r.exit_code, 0);
  const json manifest = json::parse(r.out);
  ASSERT_EQ(manifest["stages"].size(), 6u);
  std::int64_t total = 0;
  for (const auto& stage : manifest["stages"]) {
    EXPECT_EQ(stage["status"], "completed");
    total += stage["iterations_run"].get<std::int64_t>();
  }
  EXPECT_EQ(total, 1150);

  r = cli("resume " + q(tmp.path() / "run"));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.out), manifest);

  // Corrupt a weights file: resume refuses.
  const fs::path w = tmp.path() / "run" / manifest["stages"][2]["final_weights"].get<std::string>();
  std::ofstream(w, std::ios::app) << "x";
  EXPECT_EQ(cli("resume " + q(tmp.path() / "run")).exit_code, 2);

  r = cli("run-stages --plan preset:paper-6stage --scale 0.01 --data " + q(data) +
          " --out " + q(tmp.path() / "mock") + " --adapter " + q(MOCK_ADAPTER));
  ASSERT_EQ(r.exit_code, 0);
  const json mocked = json::parse(r.out);
  EXPECT_EQ(mocked["stages"][5]["final_weights_digest"],
            mocked["stages"][0]["final_weights_digest"]);

  r = cli("run-stages --plan preset:paper-6stage --scale 0.01 --data " + q(data) +
          " --out " + q(tmp.path() / "fail") + " --adapter '" MOCK_ADAPTER " --fail'");
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_EQ(json::parse(r.out)["stages"][0]["status"], "failed");
}

}  // namespace
}  // namespace layoutkit
