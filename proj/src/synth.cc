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

#include "layoutkit/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "layoutkit/errors.h"
#include "layoutkit/random.h"

namespace layoutkit {
namespace {

constexpr int kPlacementAttempts = 500;

struct Rect {
  int x0, y0, x1, y1;  // half-open pixel ranges [x0, x1) x [y0, y1)

  // Touching is allowed only with at least one background pixel between.
  bool clear_of(const Rect& o) const {
    return x1 < o.x0 || o.x1 < x0 || y1 < o.y0 || o.y1 < y0;
  }
};

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(
                  rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

int pick_class(Rng& rng, const std::array<double, kNumLayoutClasses>& weights) {
  double total = 0;
  for (double w : weights) total += w;
  const double u = uniform_unit(rng) * total;
  double acc = 0;
  int last = 0;
  for (int k = 0; k < kNumLayoutClasses; ++k) {
    if (weights[k] <= 0) continue;
    acc += weights[k];
    last = k;
    if (u < acc) return k;
  }
  return last;
}

std::uint8_t jittered(Rng& rng, double mean, int jitter) {
  const int level = static_cast<int>(std::lround(mean * 255.0)) +
                    uniform_int(rng, -jitter, jitter);
  return static_cast<std::uint8_t>(std::clamp(level, 0, 255));
}

}  // namespace

void validate_synth_spec(const SynthSpec& spec) {
  if (spec.num_images < 1) throw ValidationError("synth: need at least one image");
  if (spec.height < 1 || spec.width < 1) {
    throw ValidationError("synth: image size must be positive");
  }
  if (spec.min_regions < 0 || spec.max_regions < spec.min_regions) {
    throw ValidationError("synth: invalid region count range");
  }
  if (spec.min_region_side < 1) {
    throw ValidationError("synth: min_region_side must be positive");
  }
  if (spec.jitter < 0 || spec.jitter > 255) {
    throw ValidationError("synth: jitter must be in [0, 255]");
  }
  double total = 0;
  for (double w : spec.class_weights) {
    if (!(w >= 0) || !std::isfinite(w)) {
      throw ValidationError("synth: class weights must be non-negative");
    }
    total += w;
  }
  if (total <= 0) throw ValidationError("synth: class weights are all zero");
}

SynthOutput generate(const SynthSpec& spec) {
  validate_synth_spec(spec);
  if (spec.max_regions > 0 && (spec.min_region_side > spec.width ||
                               spec.min_region_side > spec.height)) {
    throw ValidationError("synth: canvas too small for a single region");
  }

  SynthOutput out;
  for (int k = 0; k < kNumLayoutClasses; ++k) {
    out.dataset.categories.push_back({k + 1, std::string(kLayoutClassNames[k])});
  }
  const int max_w = std::max(spec.min_region_side, spec.width / 2);
  const int max_h = std::max(spec.min_region_side, spec.height / 2);
  std::int64_t next_annotation = 1;

  for (int i = 0; i < spec.num_images; ++i) {
    const std::int64_t image_id = i + 1;
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
    char name[32];
    std::snprintf(name, sizeof(name), "images/%06lld.pgm",
                  static_cast<long long>(image_id));
    out.dataset.images.push_back({image_id, name, spec.width, spec.height});

    GrayImage raster;
    raster.pixels.resize(spec.height, spec.width);
    for (Eigen::Index p = 0; p < raster.pixels.size(); ++p) {
      raster.pixels.data()[p] =
          jittered(rng, kSynthBandMeans.back(), spec.jitter);
    }

    const int regions = uniform_int(rng, spec.min_regions, spec.max_regions);
    std::vector<Rect> placed;
    for (int n = 0; n < regions; ++n) {
      const int category = pick_class(rng, spec.class_weights);
      bool ok = false;
      Rect rect{};
      for (int attempt = 0; attempt < kPlacementAttempts && !ok; ++attempt) {
        const int w = uniform_int(rng, spec.min_region_side,
                                  std::min(max_w, spec.width));
        const int h = uniform_int(rng, spec.min_region_side,
                                  std::min(max_h, spec.height));
        rect.x0 = uniform_int(rng, 0, spec.width - w);
        rect.y0 = uniform_int(rng, 0, spec.height - h);
        rect.x1 = rect.x0 + w;
        rect.y1 = rect.y0 + h;
        ok = std::all_of(placed.begin(), placed.end(),
                         [&](const Rect& other) { return rect.clear_of(other); });
      }
      if (!ok) {
        throw ValidationError("synth: canvas too small to place " +
                              std::to_string(regions) + " regions in image " +
                              std::to_string(image_id));
      }
      placed.push_back(rect);
      for (int r = rect.y0; r < rect.y1; ++r) {
        for (int c = rect.x0; c < rect.x1; ++c) {
          raster.pixels(r, c) = jittered(rng, kSynthBandMeans[category], spec.jitter);
        }
      }
      Polygon polygon(2, 4);
      polygon << rect.x0, rect.x1, rect.x1, rect.x0,
                 rect.y0, rect.y0, rect.y1, rect.y1;
      out.dataset.annotations.push_back(
          {next_annotation++, image_id, category + 1, {polygon}});
    }
    out.rasters.push_back(std::move(raster));
  }
  return out;
}

void write_synth(const std::filesystem::path& dir, const SynthOutput& output) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "images", ec);
  if (ec) throw IoError("cannot create " + (dir / "images").string());
  for (std::size_t i = 0; i < output.rasters.size(); ++i) {
    write_pgm(dir / output.dataset.images[i].file_name, output.rasters[i]);
  }
  save_dataset(dir / "annotations.json", output.dataset);
}

}  // namespace layoutkit
