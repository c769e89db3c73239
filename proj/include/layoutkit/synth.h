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

#ifndef LAYOUTKIT_SYNTH_H_
#define LAYOUTKIT_SYNTH_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "layoutkit/coco.h"
#include "layoutkit/image.h"

namespace layoutkit {

// Mean gray level of each layout class (kLayoutClassNames order) and, last,
// of the page background. Adjacent bands are at least kSynthBandSeparation
// apart.
inline constexpr std::array<double, kNumLayoutClasses + 1> kSynthBandMeans = {
    0.15, 0.35, 0.55, 0.75, 0.95};
inline constexpr double kSynthBandSeparation = 0.15;

struct SynthSpec {
  std::uint64_t seed = 0;
  int num_images = 1;
  int height = 64;
  int width = 64;
  int min_regions = 1;
  int max_regions = 4;
  // Relative frequency of each layout class.
  std::array<double, kNumLayoutClasses> class_weights = {1.0, 1.0, 1.0, 1.0};
  int min_region_side = 4;
  // Half-width of the uniform per-pixel jitter, in gray levels.
  int jitter = 12;
};

void validate_synth_spec(const SynthSpec& spec);

struct SynthOutput {
  // Aligned with dataset.images.
  std::vector<GrayImage> rasters;
  Dataset dataset;
};

// Pages with non-overlapping axis-aligned rectangles, one annotation each,
// painted with their class band plus jitter. Image ids run 1..num_images and
// file names are "images/<id>.pgm". Throws ValidationError when the canvas
// cannot hold the requested regions.
SynthOutput generate(const SynthSpec& spec);

// Writes <dir>/annotations.json and <dir>/images/*.pgm.
void write_synth(const std::filesystem::path& dir, const SynthOutput& output);

}  // namespace layoutkit

#endif  // LAYOUTKIT_SYNTH_H_
