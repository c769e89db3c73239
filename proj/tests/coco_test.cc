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

#include <set>

#include <gtest/gtest.h>

#include "json.hpp"
#include "layoutkit/errors.h"
#include "layoutkit/synth.h"

namespace layoutkit {
namespace {

using nlohmann::json;

json minimal_json() {
  return json::parse(R"({
    "images": [{"id": 1, "file_name": "a.pgm", "width": 10, "height": 8}],
    "categories": [{"id": 1, "name": "paragraph"}, {"id": 2, "name": "text_box"},
                   {"id": 3, "name": "image"}, {"id": 4, "name": "table"}],
    "annotations": [{"id": 5, "image_id": 1, "category_id": 1,
                     "segmentation": [[0, 0, 4, 0, 4, 4, 0, 4]]}]
  })");
}

std::string error_of(const json& j, ValidationMode mode = ValidationMode::kStrict) {
  try {
    parse_dataset(j.dump(), {mode, {}});
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseDatasetTest, MinimalFile) {
  const Dataset d = parse_dataset(minimal_json().dump());
  EXPECT_EQ(d.images.size(), 1u);
  EXPECT_EQ(d.categories.size(), 4u);
  EXPECT_EQ(d.annotations.size(), 1u);
  EXPECT_EQ(d.annotations[0].segmentation[0].cols(), 4);
  EXPECT_DOUBLE_EQ(d.annotations[0].segmentation[0](0, 1), 4.0);
}

TEST(ParseDatasetTest, IgnoresUnknownFields) {
  json j = minimal_json();
  j["info"] = {{"year", 2023}};
  j["annotations"][0]["bbox"] = {0, 0, 4, 4};
  j["annotations"][0]["area"] = 16;
  j["images"][0]["license"] = 3;
  EXPECT_EQ(parse_dataset(j.dump()), parse_dataset(minimal_json().dump()));
}

TEST(ParseDatasetTest, UnknownImageIsNamed) {
  json j = minimal_json();
  j["annotations"][0]["image_id"] = 99;
  EXPECT_NE(error_of(j).find("image 99"), std::string::npos) << error_of(j);
}

TEST(ParseDatasetTest, TwoVertexPolygonRejected) {
  json j = minimal_json();
  j["annotations"][0]["segmentation"] = {{0, 0, 4, 4}};
  EXPECT_NE(error_of(j).find("polygon needs ≥3 vertices"), std::string::npos);
}

TEST(ParseDatasetTest, MalformedJsonReportsByteOffset) {
  const std::string raw = R"({"images": [}, )";
  try {
    parse_dataset(raw);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.byte_offset(), 12u);
    EXPECT_NE(std::string(e.what()).find("byte 12"), std::string::npos);
  }
}

// Every invariant can be broken on its own and is caught by strict mode.
TEST(ParseDatasetTest, EachInvariantIndividuallyCaught) {
  struct Mutation {
    const char* name;
    void (*apply)(json&);
    const char* expected;
  };
  const Mutation mutations[] = {
      {"duplicate image id",
       [](json& j) { j["images"].push_back(j["images"][0]); }, "duplicate image id"},
      {"zero width", [](json& j) { j["images"][0]["width"] = 0; }, "positive"},
      {"negative height", [](json& j) { j["images"][0]["height"] = -3; }, "positive"},
      {"duplicate category id",
       [](json& j) { j["categories"][1]["id"] = 1; }, "duplicate category id"},
      {"unknown category name",
       [](json& j) { j["categories"][0]["name"] = "figure"; }, "unknown category name"},
      {"duplicate annotation id",
       [](json& j) {
         json a = j["annotations"][0];
         j["annotations"].push_back(a);
       },
       "duplicate annotation id"},
      {"dangling image", [](json& j) { j["annotations"][0]["image_id"] = 2; }, "image 2"},
      {"dangling category",
       [](json& j) { j["annotations"][0]["category_id"] = 9; }, "category 9"},
      {"no polygons",
       [](json& j) { j["annotations"][0]["segmentation"] = json::array(); },
       "at least one polygon"},
      {"vertex outside",
       [](json& j) { j["annotations"][0]["segmentation"][0][2] = 10.5; },
       "outside image"},
      {"odd coordinates",
       [](json& j) { j["annotations"][0]["segmentation"][0].push_back(1); }, "odd"},
      {"non-integer id", [](json& j) { j["images"][0]["id"] = 1.5; }, "integer"},
  };
  for (const Mutation& m : mutations) {
    json j = minimal_json();
    m.apply(j);
    const std::string message = error_of(j);
    EXPECT_NE(message.find(m.expected), std::string::npos)
        << m.name << ": got '" << message << "'";
  }
}

TEST(ParseDatasetTest, LenientModeClampsAndAcceptsOtherNames) {
  json j = minimal_json();
  j["annotations"][0]["segmentation"] = {{-2.0, -1.0, 14.0, 0.0, 14.0, 9.5, 0.0, 9.5}};
  j["categories"][0]["name"] = "figure";
  const Dataset d = parse_dataset(j.dump(), {ValidationMode::kLenient, {}});
  const Polygon& p = d.annotations[0].segmentation[0];
  EXPECT_DOUBLE_EQ(p.row(0).minCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(p.row(0).maxCoeff(), 10.0);
  EXPECT_DOUBLE_EQ(p.row(1).maxCoeff(), 8.0);
  EXPECT_EQ(d.categories[0].name, "figure");
}

TEST(ParseDatasetTest, CategoryRemapAppliesBeforeValidation) {
  json j = minimal_json();
  j["categories"][1]["name"] = "text-box";
  EXPECT_FALSE(error_of(j).empty());
  const Dataset d =
      parse_dataset(j.dump(), {ValidationMode::kStrict, {{"text-box", "text_box"}}});
  EXPECT_EQ(d.categories[1].name, "text_box");
}

TEST(ParseDatasetTest, SerializeRoundTrip) {
  SynthSpec spec;
  spec.seed = 3;
  spec.num_images = 6;
  const Dataset original = generate(spec).dataset;
  EXPECT_EQ(parse_dataset(serialize_dataset(original)), original);
  const Dataset minimal = parse_dataset(minimal_json().dump());
  EXPECT_EQ(parse_dataset(serialize_dataset(minimal)), minimal);
}

Dataset numbered_dataset(int images) {
  Dataset d;
  d.categories = {{1, "paragraph"}, {2, "text_box"}, {3, "image"}, {4, "table"}};
  for (int i = 0; i < images; ++i) {
    d.images.push_back({100 + i, "x.pgm", 8, 8});
    Polygon p(2, 3);
    p << 0, 4, 0, 0, 0, 4;
    d.annotations.push_back({i + 1, 100 + i, 1 + i % 4, {p}});
    d.annotations.push_back({1000 + i, 100 + i, 2, {p}});
  }
  return d;
}

TEST(SplitDatasetTest, StagedFractions) {
  const Dataset d = numbered_dataset(100);
  const DatasetSplit s75 = split_dataset(d, {0.75, 7});
  EXPECT_EQ(s75.train.images.size(), 75u);
  EXPECT_EQ(s75.val.images.size(), 25u);
  const DatasetSplit s99 = split_dataset(d, {0.99, 7});
  EXPECT_EQ(s99.train.images.size(), 99u);
  EXPECT_EQ(s99.val.images.size(), 1u);
}

TEST(SplitDatasetTest, Deterministic) {
  const Dataset d = numbered_dataset(37);
  EXPECT_EQ(split_dataset(d, {0.6, 11}).train, split_dataset(d, {0.6, 11}).train);
  EXPECT_EQ(split_dataset(d, {0.6, 11}).val, split_dataset(d, {0.6, 11}).val);
  EXPECT_FALSE(split_dataset(d, {0.6, 11}).train == split_dataset(d, {0.6, 12}).train);
}

TEST(SplitDatasetTest, IsPartitionForAllFractionsAndSeeds) {
  for (int n : {1, 2, 5, 20, 100}) {
    const Dataset d = numbered_dataset(n);
    for (double fraction : {0.01, 0.25, 0.5, 0.75, 0.99, 1.0}) {
      for (std::uint64_t seed : {0u, 1u, 7u, 12345u}) {
        const DatasetSplit s = split_dataset(d, {fraction, seed});
        std::set<std::int64_t> train_ids, val_ids;
        for (const auto& im : s.train.images) train_ids.insert(im.id);
        for (const auto& im : s.val.images) val_ids.insert(im.id);
        ASSERT_EQ(train_ids.size() + val_ids.size(), static_cast<std::size_t>(n));
        for (std::int64_t id : train_ids) ASSERT_FALSE(val_ids.count(id));
        ASSERT_EQ(s.train.images.size(), train_split_size(n, fraction));
        for (const auto& a : s.train.annotations) ASSERT_TRUE(train_ids.count(a.image_id));
        for (const auto& a : s.val.annotations) ASSERT_TRUE(val_ids.count(a.image_id));
        ASSERT_EQ(s.train.annotations.size() + s.val.annotations.size(),
                  d.annotations.size());
        validate_dataset(s.train);
        validate_dataset(s.val);
      }
    }
  }
}

TEST(SplitDatasetTest, HeldOutImageKeptBelowFullFraction) {
  // round(0.99 * 20) = 20, but a fraction below one keeps one image out.
  EXPECT_EQ(train_split_size(20, 0.99), 19u);
  EXPECT_EQ(train_split_size(20, 0.75), 15u);
  EXPECT_EQ(train_split_size(20, 1.0), 20u);
  EXPECT_EQ(train_split_size(3, 0.01), 1u);
}

TEST(SplitDatasetTest, Errors) {
  EXPECT_THROW(split_dataset(Dataset{}, {0.75, 1}), ValidationError);
  EXPECT_THROW(split_dataset(numbered_dataset(3), {0.0, 1}), ValidationError);
  EXPECT_THROW(split_dataset(numbered_dataset(3), {1.5, 1}), ValidationError);
}

TEST(ClassHistogramTest, Counts) {
  Dataset d = parse_dataset(minimal_json().dump());
  const AnnotationRecord base = d.annotations[0];
  d.annotations.clear();
  for (int i = 0; i < 3; ++i) {
    AnnotationRecord a = base;
    a.id = i;
    a.category_id = 1;
    d.annotations.push_back(a);
  }
  AnnotationRecord table = base;
  table.id = 10;
  table.category_id = 4;
  d.annotations.push_back(table);
  const std::map<std::string, std::size_t> expected = {
      {"paragraph", 3}, {"table", 1}, {"text_box", 0}, {"image", 0}};
  EXPECT_EQ(class_histogram(d), expected);
}

TEST(ClassHistogramTest, EmptyIsAllZero) {
  Dataset d = parse_dataset(minimal_json().dump());
  d.annotations.clear();
  for (const auto& [name, count] : class_histogram(d)) EXPECT_EQ(count, 0u) << name;
  EXPECT_EQ(class_histogram(d).size(), 4u);
}

TEST(ClassHistogramTest, SumsToAnnotationCountOnSynthFixtures) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec spec;
    spec.seed = seed;
    spec.num_images = 8;
    spec.class_weights = {1.0, 0.5, 2.0, 0.25};
    const Dataset d = generate(spec).dataset;
    std::size_t total = 0;
    for (const auto& [name, count] : class_histogram(d)) total += count;
    EXPECT_EQ(total, d.annotations.size());
  }
}

}  // namespace
}  // namespace layoutkit
