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

#include "layoutkit/coco.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "layoutkit/errors.h"
#include "layoutkit/random.h"

namespace layoutkit {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const json& require(const json& object, const char* key,
                    const std::string& where) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw ValidationError(where + ": missing field '" + key + "'");
  }
  return *it;
}

std::int64_t require_int(const json& object, const char* key,
                         const std::string& where) {
  const json& value = require(object, key, where);
  if (!value.is_number_integer()) {
    throw ValidationError(where + ": field '" + key + "' must be an integer");
  }
  return value.get<std::int64_t>();
}

Polygon parse_polygon(const json& flat, const std::string& where) {
  if (!flat.is_array()) {
    throw ValidationError(where + ": segmentation entries must be arrays");
  }
  if (flat.size() % 2 != 0) {
    throw ValidationError(where + ": polygon has an odd coordinate count");
  }
  Polygon polygon(2, static_cast<Eigen::Index>(flat.size() / 2));
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (!flat[i].is_number()) {
      throw ValidationError(where + ": polygon coordinates must be numbers");
    }
    polygon(static_cast<Eigen::Index>(i % 2),
            static_cast<Eigen::Index>(i / 2)) = flat[i].get<double>();
  }
  return polygon;
}

}  // namespace

std::optional<int> layout_class_index(std::string_view name) {
  for (int i = 0; i < kNumLayoutClasses; ++i) {
    if (kLayoutClassNames[i] == name) return i;
  }
  return std::nullopt;
}

const ImageRecord* Dataset::find_image(std::int64_t id) const {
  for (const auto& image : images) {
    if (image.id == id) return &image;
  }
  return nullptr;
}

const CategoryRecord* Dataset::find_category(std::int64_t id) const {
  for (const auto& category : categories) {
    if (category.id == id) return &category;
  }
  return nullptr;
}

const CategoryRecord* Dataset::find_category(std::string_view name) const {
  for (const auto& category : categories) {
    if (category.name == name) return &category;
  }
  return nullptr;
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.images.size() != b.images.size() ||
      a.categories.size() != b.categories.size() ||
      a.annotations.size() != b.annotations.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    const auto& x = a.images[i];
    const auto& y = b.images[i];
    if (x.id != y.id || x.file_name != y.file_name || x.width != y.width ||
        x.height != y.height) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.categories.size(); ++i) {
    if (a.categories[i].id != b.categories[i].id ||
        a.categories[i].name != b.categories[i].name) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.annotations.size(); ++i) {
    const auto& x = a.annotations[i];
    const auto& y = b.annotations[i];
    if (x.id != y.id || x.image_id != y.image_id ||
        x.category_id != y.category_id ||
        x.segmentation.size() != y.segmentation.size()) {
      return false;
    }
    for (std::size_t p = 0; p < x.segmentation.size(); ++p) {
      if (x.segmentation[p].cols() != y.segmentation[p].cols() ||
          x.segmentation[p] != y.segmentation[p]) {
        return false;
      }
    }
  }
  return true;
}

Dataset parse_dataset(std::string_view raw, const ParseOptions& options) {
  json root;
  try {
    root = json::parse(raw.begin(), raw.end());
  } catch (const json::parse_error& e) {
    const std::size_t offset = json_error_offset(e.byte);
    throw ParseError("malformed JSON at byte " + std::to_string(offset) +
                         ": " + e.what(),
                     offset);
  }
  if (!root.is_object()) {
    throw ParseError("top-level JSON value must be an object", 0);
  }

  Dataset dataset;
  auto array_field = [&](const char* key) -> const json& {
    const json& value = require(root, key, "dataset");
    if (!value.is_array()) {
      throw ValidationError(std::string("dataset: '") + key +
                            "' must be an array");
    }
    return value;
  };

  for (const json& entry : array_field("images")) {
    ImageRecord image;
    image.id = require_int(entry, "id", "image");
    const std::string where = "image " + std::to_string(image.id);
    const json& name = require(entry, "file_name", where);
    if (!name.is_string()) {
      throw ValidationError(where + ": file_name must be a string");
    }
    image.file_name = name.get<std::string>();
    image.width = static_cast<int>(require_int(entry, "width", where));
    image.height = static_cast<int>(require_int(entry, "height", where));
    dataset.images.push_back(std::move(image));
  }

  for (const json& entry : array_field("categories")) {
    CategoryRecord category;
    category.id = require_int(entry, "id", "category");
    const std::string where = "category " + std::to_string(category.id);
    const json& name = require(entry, "name", where);
    if (!name.is_string()) {
      throw ValidationError(where + ": name must be a string");
    }
    category.name = name.get<std::string>();
    if (auto it = options.category_remap.find(category.name);
        it != options.category_remap.end()) {
      category.name = it->second;
    }
    dataset.categories.push_back(std::move(category));
  }

  for (const json& entry : array_field("annotations")) {
    AnnotationRecord annotation;
    annotation.id = require_int(entry, "id", "annotation");
    const std::string where = "annotation " + std::to_string(annotation.id);
    annotation.image_id = require_int(entry, "image_id", where);
    annotation.category_id = require_int(entry, "category_id", where);
    const json& segmentation = require(entry, "segmentation", where);
    if (!segmentation.is_array()) {
      throw ValidationError(where +
                            ": segmentation must be a list of polygons");
    }
    for (const json& flat : segmentation) {
      annotation.segmentation.push_back(parse_polygon(flat, where));
    }
    dataset.annotations.push_back(std::move(annotation));
  }

  if (options.mode == ValidationMode::kLenient) {
    // Clamping needs the image table, so referential checks run first.
    validate_dataset(dataset, ValidationMode::kLenient);
    clamp_to_images(dataset);
  }
  validate_dataset(dataset, options.mode);
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& path,
                     const ParseOptions& options) {
  return parse_dataset(read_file(path), options);
}

void validate_dataset(const Dataset& dataset, ValidationMode mode) {
  std::map<std::int64_t, const ImageRecord*> images;
  for (const auto& image : dataset.images) {
    const std::string where = "image " + std::to_string(image.id);
    if (!images.emplace(image.id, &image).second) {
      throw ValidationError(where + ": duplicate image id");
    }
    if (image.width <= 0 || image.height <= 0) {
      throw ValidationError(where + ": width and height must be positive");
    }
  }

  std::set<std::int64_t> category_ids;
  std::set<std::string> category_names;
  for (const auto& category : dataset.categories) {
    const std::string where = "category " + std::to_string(category.id);
    if (!category_ids.insert(category.id).second) {
      throw ValidationError(where + ": duplicate category id");
    }
    if (!category_names.insert(category.name).second) {
      throw ValidationError(where + ": duplicate category name '" +
                            category.name + "'");
    }
    if (mode == ValidationMode::kStrict &&
        !layout_class_index(category.name)) {
      throw ValidationError(where + ": unknown category name '" +
                            category.name + "'");
    }
  }

  std::set<std::int64_t> annotation_ids;
  for (const auto& annotation : dataset.annotations) {
    const std::string where = "annotation " + std::to_string(annotation.id);
    if (!annotation_ids.insert(annotation.id).second) {
      throw ValidationError(where + ": duplicate annotation id");
    }
    auto image = images.find(annotation.image_id);
    if (image == images.end()) {
      throw ValidationError(where + ": references unknown image " +
                            std::to_string(annotation.image_id));
    }
    if (!category_ids.count(annotation.category_id)) {
      throw ValidationError(where + ": references unknown category " +
                            std::to_string(annotation.category_id));
    }
    if (annotation.segmentation.empty()) {
      throw ValidationError(where + ": needs at least one polygon");
    }
    for (const Polygon& polygon : annotation.segmentation) {
      if (polygon.cols() < 3) {
        throw ValidationError(where + ": polygon needs ≥3 vertices");
      }
      if (!polygon.allFinite()) {
        throw ValidationError(where + ": polygon has non-finite coordinates");
      }
      if (mode == ValidationMode::kStrict) {
        const double width = image->second->width;
        const double height = image->second->height;
        const bool inside = (polygon.row(0).array() >= 0.0).all() &&
                            (polygon.row(0).array() <= width).all() &&
                            (polygon.row(1).array() >= 0.0).all() &&
                            (polygon.row(1).array() <= height).all();
        if (!inside) {
          throw ValidationError(where + ": vertex outside image " +
                                std::to_string(image->first));
        }
      }
    }
  }
}

void clamp_to_images(Dataset& dataset) {
  for (auto& annotation : dataset.annotations) {
    const ImageRecord* image = dataset.find_image(annotation.image_id);
    if (image == nullptr) continue;
    for (Polygon& polygon : annotation.segmentation) {
      polygon.row(0) = polygon.row(0).cwiseMax(0.0).cwiseMin(image->width);
      polygon.row(1) = polygon.row(1).cwiseMax(0.0).cwiseMin(image->height);
    }
  }
}

std::string serialize_dataset(const Dataset& dataset) {
  json root = json::object();
  root["images"] = json::array();
  for (const auto& image : dataset.images) {
    root["images"].push_back({{"id", image.id},
                              {"file_name", image.file_name},
                              {"width", image.width},
                              {"height", image.height}});
  }
  root["categories"] = json::array();
  for (const auto& category : dataset.categories) {
    root["categories"].push_back(
        {{"id", category.id}, {"name", category.name}});
  }
  root["annotations"] = json::array();
  for (const auto& annotation : dataset.annotations) {
    json segmentation = json::array();
    for (const Polygon& polygon : annotation.segmentation) {
      json flat = json::array();
      for (Eigen::Index i = 0; i < polygon.cols(); ++i) {
        flat.push_back(polygon(0, i));
        flat.push_back(polygon(1, i));
      }
      segmentation.push_back(std::move(flat));
    }
    root["annotations"].push_back({{"id", annotation.id},
                                   {"image_id", annotation.image_id},
                                   {"category_id", annotation.category_id},
                                   {"segmentation", std::move(segmentation)}});
  }
  return root.dump();
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_dataset(dataset) << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

std::map<std::string, std::string> load_category_remap(
    const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  json root;
  try {
    root = json::parse(raw);
  } catch (const json::parse_error& e) {
    const std::size_t offset = json_error_offset(e.byte);
    throw ParseError("malformed JSON at byte " + std::to_string(offset) +
                         " in " + path.string(),
                     offset);
  }
  if (!root.is_object()) {
    throw ValidationError(path.string() + ": remap must be a JSON object");
  }
  std::map<std::string, std::string> remap;
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (!it.value().is_string()) {
      throw ValidationError(path.string() + ": remap values must be strings");
    }
    remap[it.key()] = it.value().get<std::string>();
  }
  return remap;
}

std::size_t train_split_size(std::size_t num_images, double train_fraction) {
  if (num_images == 0) return 0;
  auto count = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(num_images)));
  count = std::clamp<std::size_t>(count, 1, num_images);
  // A fraction below one always leaves at least one held-out image.
  if (train_fraction < 1.0 && num_images >= 2) {
    count = std::min(count, num_images - 1);
  }
  return count;
}

DatasetSplit split_dataset(const Dataset& dataset, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0)) {
    throw ValidationError("train fraction must be in (0, 1]");
  }
  if (dataset.images.empty()) {
    throw ValidationError("cannot split a dataset without images");
  }

  std::vector<std::size_t> order(dataset.images.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dataset.images[a].id < dataset.images[b].id;
  });
  Rng rng(spec.seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[uniform_index(rng, i + 1)]);
  }

  const std::size_t train_count =
      train_split_size(order.size(), spec.train_fraction);
  DatasetSplit split;
  split.train.categories = dataset.categories;
  split.val.categories = dataset.categories;
  std::set<std::int64_t> train_ids;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const ImageRecord& image = dataset.images[order[i]];
    if (i < train_count) {
      split.train.images.push_back(image);
      train_ids.insert(image.id);
    } else {
      split.val.images.push_back(image);
    }
  }
  for (const auto& annotation : dataset.annotations) {
    (train_ids.count(annotation.image_id) ? split.train : split.val)
        .annotations.push_back(annotation);
  }
  return split;
}

std::map<std::string, std::size_t> class_histogram(const Dataset& dataset) {
  std::map<std::string, std::size_t> histogram;
  for (std::string_view name : kLayoutClassNames) {
    histogram[std::string(name)] = 0;
  }
  for (const auto& annotation : dataset.annotations) {
    const CategoryRecord* category =
        dataset.find_category(annotation.category_id);
    if (category != nullptr) ++histogram[category->name];
  }
  return histogram;
}

}  // namespace layoutkit
