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

#ifndef LAYOUTKIT_SCHEDULE_H_
#define LAYOUTKIT_SCHEDULE_H_

#include <cstdint>
#include <utility>
#include <vector>

#include "json.hpp"

namespace layoutkit {

// Linear warmup followed by multi-step gamma decay.
struct ScheduleConfig {
  double base_lr = 0.0;
  std::int64_t warmup_iters = 0;
  // Fraction of base_lr used at iteration 0 of the warmup.
  double warmup_factor = 0.001;
  double gamma = 1.0;
  // Strictly increasing, each in (warmup_iters, max_iter).
  std::vector<std::int64_t> milestones;
  std::int64_t max_iter = 1;

  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

// Throws ValidationError on the first violated constraint.
void validate_schedule(const ScheduleConfig& config);

// Learning rate for iteration t in [0, max_iter):
//   t < warmup_iters : base_lr * (warmup_factor * (1 - t/W) + t/W)
//   otherwise        : base_lr * gamma^(number of milestones <= t)
// Throws ValidationError for t out of range.
double lr_at(const ScheduleConfig& config, std::int64_t t);

// lr_at sampled every `stride` iterations, plus iteration 0, the warmup end,
// each milestone and max_iter - 1. Sorted by iteration, no duplicates.
std::vector<std::pair<std::int64_t, double>> schedule_table(
    const ScheduleConfig& config, std::int64_t stride);

// Multiplies max_iter and every milestone by `scale` (rounded, max_iter at
// least 1). Milestones that collapse onto each other or fall outside
// (warmup_iters, max_iter) are dropped. The warmup length is kept as is.
ScheduleConfig scale_schedule(const ScheduleConfig& config, double scale);

nlohmann::json schedule_to_json(const ScheduleConfig& config);
// Keys: base_lr, warmup_iters, warmup_factor, gamma, milestones, max_iter.
// Missing warmup_factor/gamma/milestones/warmup_iters take their defaults.
ScheduleConfig schedule_from_json(const nlohmann::json& json);

}  // namespace layoutkit

#endif  // LAYOUTKIT_SCHEDULE_H_
