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

#ifndef LAYOUTKIT_METRICS_H_
#define LAYOUTKIT_METRICS_H_

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "layoutkit/coco.h"
#include "layoutkit/mask.h"

namespace layoutkit {

// 2 * I / (P + G). Both masks empty counts as perfect agreement (1.0).
double dice(const Overlap& o);

struct CellKey {
  std::int64_t image_id = 0;
  std::string category;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

using MaskMap = std::map<CellKey, BitMask>;

struct DiceCell {
  CellKey key;
  Overlap overlap;
  double dice = 0.0;
};

struct DiceReport {
  // Sorted by (image id, category name).
  std::vector<DiceCell> cells;
  // Mean cell dice per category; categories without cells are absent.
  std::map<std::string, double> per_class;
  // Mean over cells.
  double macro = 1.0;
  // Dice of the pixel counts pooled over every cell.
  double micro = 1.0;
};

// Union mask of every annotation per (image, category name) cell.
MaskMap rasterize_truth(const Dataset& truth);

// Scores every (image, category) cell where the truth has an annotation or
// the prediction has at least one set pixel. A missing prediction counts as
// an empty mask. Throws ValidationError for predictions naming an unknown
// image or category, or with dimensions differing from the image record.
DiceReport evaluate(const MaskMap& predictions, const Dataset& truth);

// {"macro": r, "per_class": {...}, "cells": [[image_id, class, dice], ...]},
// plus "micro" when requested.
nlohmann::json report_to_json(const DiceReport& report, bool include_micro);

}  // namespace layoutkit

#endif  // LAYOUTKIT_METRICS_H_
