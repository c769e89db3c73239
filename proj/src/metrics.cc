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

#include "layoutkit/metrics.h"

#include "layoutkit/errors.h"

namespace layoutkit {

double dice(const Overlap& o) {
  const std::uint64_t total = o.total_predicted + o.total_ground_truth;
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(o.intersection) / static_cast<double>(total);
}

MaskMap rasterize_truth(const Dataset& truth) {
  MaskMap masks;
  for (const auto& annotation : truth.annotations) {
    const ImageRecord* image = truth.find_image(annotation.image_id);
    const CategoryRecord* category = truth.find_category(annotation.category_id);
    if (image == nullptr || category == nullptr) {
      throw ValidationError("annotation " + std::to_string(annotation.id) +
                            " has dangling references");
    }
    BitMask mask =
        rasterize(annotation.segmentation, image->height, image->width);
    CellKey key{image->id, category->name};
    if (auto it = masks.find(key); it != masks.end()) {
      it->second |= mask;
    } else {
      masks.emplace(std::move(key), std::move(mask));
    }
  }
  return masks;
}

DiceReport evaluate(const MaskMap& predictions, const Dataset& truth) {
  for (const auto& [key, mask] : predictions) {
    const ImageRecord* image = truth.find_image(key.image_id);
    if (image == nullptr) {
      throw ValidationError("prediction for unknown image " +
                            std::to_string(key.image_id));
    }
    if (truth.find_category(key.category) == nullptr) {
      throw ValidationError("prediction for unknown category '" +
                            key.category + "'");
    }
    if (mask.height() != image->height || mask.width() != image->width) {
      throw ValidationError("prediction for image " +
                            std::to_string(key.image_id) + " is " +
                            std::to_string(mask.height()) + "x" +
                            std::to_string(mask.width()) + ", expected " +
                            std::to_string(image->height) + "x" +
                            std::to_string(image->width));
    }
  }

  const MaskMap truth_masks = rasterize_truth(truth);
  std::map<CellKey, Overlap> cells;
  for (const auto& [key, mask] : truth_masks) {
    auto predicted = predictions.find(key);
    cells[key] = predicted == predictions.end()
                     ? Overlap{0, 0, mask.count()}
                     : overlap(predicted->second, mask);
  }
  for (const auto& [key, mask] : predictions) {
    if (truth_masks.count(key) || mask.empty()) continue;
    cells[key] = Overlap{0, mask.count(), 0};
  }

  DiceReport report;
  std::map<std::string, std::pair<double, std::size_t>> class_sums;
  Overlap pooled;
  double sum = 0.0;
  for (const auto& [key, o] : cells) {
    const double score = dice(o);
    report.cells.push_back({key, o, score});
    sum += score;
    auto& [class_sum, class_count] = class_sums[key.category];
    class_sum += score;
    ++class_count;
    pooled.intersection += o.intersection;
    pooled.total_predicted += o.total_predicted;
    pooled.total_ground_truth += o.total_ground_truth;
  }
  for (const auto& [name, entry] : class_sums) {
    report.per_class[name] = entry.first / static_cast<double>(entry.second);
  }
  if (!report.cells.empty()) {
    report.macro = sum / static_cast<double>(report.cells.size());
  }
  report.micro = dice(pooled);
  return report;
}

nlohmann::json report_to_json(const DiceReport& report, bool include_micro) {
  nlohmann::json root;
  root["macro"] = report.macro;
  root["per_class"] = nlohmann::json::object();
  for (const auto& [name, value] : report.per_class) {
    root["per_class"][name] = value;
  }
  root["cells"] = nlohmann::json::array();
  for (const auto& cell : report.cells) {
    root["cells"].push_back(
        nlohmann::json::array({cell.key.image_id, cell.key.category, cell.dice}));
  }
  if (include_micro) root["micro"] = report.micro;
  return root;
}

}  // namespace layoutkit
