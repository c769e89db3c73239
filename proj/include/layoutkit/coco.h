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

#ifndef LAYOUTKIT_COCO_H_
#define LAYOUTKIT_COCO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace layoutkit {

// The four layout unit types. Their position in this list is the class index
// used by models; the background class comes after them.
inline constexpr std::array<std::string_view, 4> kLayoutClassNames = {
    "paragraph", "text_box", "image", "table"};
inline constexpr int kNumLayoutClasses = 4;

// Index of `name` in kLayoutClassNames, or nullopt.
std::optional<int> layout_class_index(std::string_view name);

// Polygon vertices stored column-wise: column i is (x_i, y_i) in pixels,
// origin top-left, x rightward, y downward.
using Polygon = Eigen::Matrix2Xd;

struct ImageRecord {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
};

struct CategoryRecord {
  std::int64_t id = 0;
  std::string name;
};

struct AnnotationRecord {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  std::vector<Polygon> segmentation;
};

// A COCO-subset annotation set. Treated as an immutable value once built.
struct Dataset {
  std::vector<ImageRecord> images;
  std::vector<CategoryRecord> categories;
  std::vector<AnnotationRecord> annotations;

  const ImageRecord* find_image(std::int64_t id) const;
  const CategoryRecord* find_category(std::int64_t id) const;
  const CategoryRecord* find_category(std::string_view name) const;

  friend bool operator==(const Dataset& a, const Dataset& b);
};

enum class ValidationMode {
  // Reject unknown category names and out-of-bounds vertices.
  kStrict,
  // Accept any category name and clamp vertices to the image rectangle.
  kLenient,
};

struct ParseOptions {
  ValidationMode mode = ValidationMode::kStrict;
  // Category names rewritten before validation, e.g. {"text-box": "text_box"}.
  std::map<std::string, std::string> category_remap;
};

// Parses COCO-subset JSON. Unknown fields are ignored. Throws ParseError for
// malformed JSON (with byte offset) and ValidationError naming the offending
// id for invariant violations.
Dataset parse_dataset(std::string_view raw, const ParseOptions& options = {});
Dataset load_dataset(const std::filesystem::path& path,
                     const ParseOptions& options = {});

// Throws ValidationError describing the first violated invariant.
void validate_dataset(const Dataset& dataset,
                      ValidationMode mode = ValidationMode::kStrict);

// Clamps every vertex into [0, width] x [0, height] of its image.
void clamp_to_images(Dataset& dataset);

std::string serialize_dataset(const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

// Reads a {"from": "to", ...} category rename table.
std::map<std::string, std::string> load_category_remap(
    const std::filesystem::path& path);

struct SplitSpec {
  double train_fraction = 0.75;
  std::uint64_t seed = 0;
};

struct DatasetSplit {
  Dataset train;
  Dataset val;
};

// Number of images that land in the train half for `num_images` images.
std::size_t train_split_size(std::size_t num_images, double train_fraction);

// Image-level partition: images are ordered by id, shuffled with a seeded
// Fisher-Yates permutation and the prefix becomes the train half.
// Annotations follow their image; categories are copied to both halves.
DatasetSplit split_dataset(const Dataset& dataset, const SplitSpec& spec);

// Annotation count per category name. The four layout classes are always
// present, with zero counts when unused.
std::map<std::string, std::size_t> class_histogram(const Dataset& dataset);

}  // namespace layoutkit

#endif  // LAYOUTKIT_COCO_H_
