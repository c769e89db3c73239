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

#include "layoutkit/schedule.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "layoutkit/errors.h"

namespace layoutkit {

void validate_schedule(const ScheduleConfig& config) {
  if (!(config.base_lr > 0.0) || !std::isfinite(config.base_lr)) {
    throw ValidationError("schedule: base_lr must be positive and finite");
  }
  if (config.max_iter <= 0) {
    throw ValidationError("schedule: max_iter must be positive");
  }
  if (config.warmup_iters < 0 || config.warmup_iters >= config.max_iter) {
    throw ValidationError("schedule: warmup_iters must be in [0, max_iter)");
  }
  if (!(config.warmup_factor > 0.0 && config.warmup_factor <= 1.0)) {
    throw ValidationError("schedule: warmup_factor must be in (0, 1]");
  }
  if (!(config.gamma > 0.0 && config.gamma <= 1.0)) {
    throw ValidationError("schedule: gamma must be in (0, 1]");
  }
  std::int64_t previous = config.warmup_iters;
  for (std::int64_t milestone : config.milestones) {
    if (milestone <= previous) {
      throw ValidationError(
          "schedule: milestones must be strictly increasing and after the "
          "warmup, got " + std::to_string(milestone));
    }
    if (milestone >= config.max_iter) {
      throw ValidationError("schedule: milestone " + std::to_string(milestone) +
                            " is not below max_iter");
    }
    previous = milestone;
  }
}

double lr_at(const ScheduleConfig& config, std::int64_t t) {
  if (t < 0 || t >= config.max_iter) {
    throw ValidationError("iteration " + std::to_string(t) +
                          " outside [0, " + std::to_string(config.max_iter) +
                          ")");
  }
  if (t < config.warmup_iters) {
    const double alpha =
        static_cast<double>(t) / static_cast<double>(config.warmup_iters);
    return config.base_lr *
           (config.warmup_factor * (1.0 - alpha) + alpha);
  }
  double lr = config.base_lr;
  for (std::int64_t milestone : config.milestones) {
    if (milestone > t) break;
    lr *= config.gamma;
  }
  return lr;
}

std::vector<std::pair<std::int64_t, double>> schedule_table(
    const ScheduleConfig& config, std::int64_t stride) {
  if (stride < 1) throw ValidationError("stride must be at least 1");
  std::set<std::int64_t> iterations;
  for (std::int64_t t = 0; t < config.max_iter; t += stride) iterations.insert(t);
  if (config.warmup_iters < config.max_iter) {
    iterations.insert(config.warmup_iters);
  }
  for (std::int64_t milestone : config.milestones) {
    if (milestone < config.max_iter) iterations.insert(milestone);
  }
  iterations.insert(config.max_iter - 1);

  std::vector<std::pair<std::int64_t, double>> table;
  table.reserve(iterations.size());
  for (std::int64_t t : iterations) table.emplace_back(t, lr_at(config, t));
  return table;
}

ScheduleConfig scale_schedule(const ScheduleConfig& config, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) {
    throw ValidationError("scale must be in (0, 1]");
  }
  ScheduleConfig scaled = config;
  scaled.max_iter = std::max<std::int64_t>(
      1, std::llround(scale * static_cast<double>(config.max_iter)));
  scaled.milestones.clear();
  for (std::int64_t milestone : config.milestones) {
    const std::int64_t m = std::llround(scale * static_cast<double>(milestone));
    const std::int64_t floor_m =
        scaled.milestones.empty() ? scaled.warmup_iters : scaled.milestones.back();
    if (m > floor_m && m < scaled.max_iter) scaled.milestones.push_back(m);
  }
  return scaled;
}

nlohmann::json schedule_to_json(const ScheduleConfig& config) {
  return {{"base_lr", config.base_lr},
          {"warmup_iters", config.warmup_iters},
          {"warmup_factor", config.warmup_factor},
          {"gamma", config.gamma},
          {"milestones", config.milestones},
          {"max_iter", config.max_iter}};
}

ScheduleConfig schedule_from_json(const nlohmann::json& json) {
  if (!json.is_object()) {
    throw ValidationError("schedule config must be a JSON object");
  }
  ScheduleConfig config;
  try {
    config.base_lr = json.at("base_lr").get<double>();
    config.max_iter = json.at("max_iter").get<std::int64_t>();
    config.warmup_iters = json.value("warmup_iters", config.warmup_iters);
    config.warmup_factor = json.value("warmup_factor", config.warmup_factor);
    config.gamma = json.value("gamma", config.gamma);
    if (json.contains("milestones")) {
      config.milestones =
          json.at("milestones").get<std::vector<std::int64_t>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("schedule config: ") + e.what());
  }
  validate_schedule(config);
  return config;
}

}  // namespace layoutkit
