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

#include "layoutkit/mask.h"

#include <vector>

#include <gtest/gtest.h>

#include "layoutkit/errors.h"
#include "test_util.h"

namespace layoutkit {
namespace {

using testing::naive_counts;
using testing::oracle_rasterize;
using testing::random_mask;
using testing::random_polygon;
using testing::rect_polygon;

BitMask mask_from_rows(const std::vector<std::vector<int>>& rows) {
  BitMask m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (rows[r][c]) m.set(static_cast<int>(r), static_cast<int>(c));
    }
  }
  return m;
}

TEST(BitMaskTest, SetAndCount) {
  BitMask m(3, 70);
  EXPECT_TRUE(m.empty());
  m.set(2, 69);
  m.set(0, 0);
  m.set(1, 5);
  m.set(1, 5, false);
  EXPECT_EQ(m.count(), 2u);
  EXPECT_TRUE(m(2, 69));
  EXPECT_FALSE(m(1, 5));
  EXPECT_EQ(m.words().size(), 4u);
}

TEST(BitMaskTest, RejectsEmptyCanvas) {
  EXPECT_THROW(BitMask(0, 4), ValidationError);
  EXPECT_THROW(BitMask(4, 0), ValidationError);
  EXPECT_THROW(rasterize({}, 0, 3), ValidationError);
}

TEST(BitMaskTest, DenseRoundTrip) {
  Rng rng(5);
  const BitMask m = random_mask(rng, 9, 13, 0.4);
  EXPECT_EQ(BitMask::from_dense(m.to_dense()), m);
}

TEST(RleTest, HandTracedEncode) {
  const RleMask rle = rle_encode(mask_from_rows({{1, 1}, {0, 1}}));
  EXPECT_EQ(rle.counts, (std::vector<std::uint32_t>{0, 1, 1, 2}));
  EXPECT_EQ(rle_encode(BitMask(3, 3)).counts, std::vector<std::uint32_t>{9});
}

TEST(RleTest, HandTracedDecode) {
  EXPECT_EQ(rle_decode({2, 2, {0, 4}}), mask_from_rows({{1, 1}, {1, 1}}));
  EXPECT_EQ(rle_decode({2, 2, {2, 2}}), mask_from_rows({{0, 1}, {0, 1}}));
  EXPECT_THROW(rle_decode({2, 2, {3, 2}}), ValidationError);
}

TEST(RleTest, RejectsInteriorZeroRuns) {
  EXPECT_THROW(rle_decode({2, 2, {1, 0, 3}}), ValidationError);
  EXPECT_THROW(rle_decode({2, 2, {}}), ValidationError);
  EXPECT_NO_THROW(rle_decode({2, 2, {0, 1, 3}}));
}

TEST(RleTest, RoundTripRandomMasks) {
  Rng rng(2024);
  for (int i = 0; i < 500; ++i) {
    const int h = 1 + static_cast<int>(uniform_index(rng, 40));
    const int w = 1 + static_cast<int>(uniform_index(rng, 40));
    const double density = uniform_unit(rng);
    const BitMask m = random_mask(rng, h, w, density);
    const RleMask rle = rle_encode(m);
    ASSERT_NO_THROW(validate_rle(rle));
    ASSERT_EQ(rle_decode(rle), m) << "mask " << i;
  }
}

TEST(RleTest, TextForm) {
  const std::vector<std::uint32_t> counts = {0, 1, 1, 2};
  EXPECT_EQ(format_rle_counts(counts), "0 1 1 2");
  EXPECT_EQ(parse_rle_counts("0 1 1 2"), counts);
  EXPECT_THROW(parse_rle_counts("0  1"), ParseError);
  EXPECT_THROW(parse_rle_counts("0 -1"), ParseError);
  EXPECT_THROW(parse_rle_counts(""), ParseError);
  EXPECT_THROW(parse_rle_counts("1 2 "), ParseError);
}

TEST(RasterizeTest, SquareCoversCanvas) {
  const std::vector<Polygon> square = {rect_polygon(0, 0, 2, 2)};
  EXPECT_EQ(rasterize(square, 2, 2).count(), 4u);
}

TEST(RasterizeTest, SquareOnLargerCanvas) {
  const std::vector<Polygon> square = {rect_polygon(0, 0, 2, 2)};
  EXPECT_EQ(rasterize(square, 4, 4),
            mask_from_rows({{1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}));
}

TEST(RasterizeTest, MatchesPointInPolygonOracle) {
  Rng rng(99);
  for (int i = 0; i < 50; ++i) {
    const int h = 1 + static_cast<int>(uniform_index(rng, 32));
    const int w = 1 + static_cast<int>(uniform_index(rng, 32));
    const std::vector<Polygon> polygons = {random_polygon(rng, h, w)};
    const BitMask got = rasterize(polygons, h, w);
    const auto want = oracle_rasterize(polygons, h, w);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        ASSERT_EQ(got(r, c), want[r][c] == 1)
            << "polygon " << i << " pixel (" << r << "," << c << ")";
      }
    }
  }
}

TEST(RasterizeTest, MultiplePolygonsAreUnioned) {
  Rng rng(3);
  for (int i = 0; i < 30; ++i) {
    const std::vector<Polygon> polygons = {random_polygon(rng, 20, 24),
                                           random_polygon(rng, 20, 24),
                                           random_polygon(rng, 20, 24)};
    const BitMask got = rasterize(polygons, 20, 24);
    const auto want = oracle_rasterize(polygons, 20, 24);
    for (int r = 0; r < 20; ++r) {
      for (int c = 0; c < 24; ++c) ASSERT_EQ(got(r, c), want[r][c] == 1);
    }
  }
}

TEST(RasterizeTest, OverlappingPolygonsDoNotCancel) {
  const std::vector<Polygon> twice = {rect_polygon(0, 0, 3, 3),
                                      rect_polygon(0, 0, 3, 3)};
  EXPECT_EQ(rasterize(twice, 3, 3).count(), 9u);
}

TEST(RasterizeTest, InvariantUnderVertexRotation) {
  Rng rng(17);
  for (int i = 0; i < 40; ++i) {
    const Polygon p = random_polygon(rng, 24, 24);
    const BitMask base = rasterize(std::vector<Polygon>{p}, 24, 24);
    for (Eigen::Index shift = 1; shift < p.cols(); ++shift) {
      Polygon rotated(2, p.cols());
      for (Eigen::Index k = 0; k < p.cols(); ++k) {
        rotated.col(k) = p.col((k + shift) % p.cols());
      }
      ASSERT_EQ(rasterize(std::vector<Polygon>{rotated}, 24, 24), base);
    }
  }
}

TEST(RasterizeTest, InvariantUnderPolygonOrder) {
  const std::vector<Polygon> ab = {rect_polygon(1, 1, 5, 4),
                                   rect_polygon(7.5, 2, 11, 9.5)};
  const std::vector<Polygon> ba = {ab[1], ab[0]};
  EXPECT_EQ(rasterize(ab, 12, 12), rasterize(ba, 12, 12));
  // 4x3 pixels, plus columns 7..10 by rows 2..8 (edges on a center count
  // on the left and top only).
  EXPECT_EQ(rasterize(ab, 12, 12).count(), 12u + 28u);
}

TEST(RasterizeTest, VerticesOutsideCanvasAreClipped) {
  const std::vector<Polygon> big = {rect_polygon(-5, -5, 50, 50)};
  EXPECT_EQ(rasterize(big, 4, 6).count(), 24u);
}

TEST(OverlapTest, Examples) {
  const BitMask a = mask_from_rows({{1, 1}, {1, 1}});
  EXPECT_EQ(overlap(a, a), (Overlap{4, 4, 4}));
  const BitMask three = mask_from_rows({{1, 1, 1, 0}, {0, 0, 0, 0}});
  const BitMask five = mask_from_rows({{0, 0, 0, 1}, {1, 1, 1, 1}});
  EXPECT_EQ(overlap(three, five), (Overlap{0, 3, 5}));
}

TEST(OverlapTest, DimensionMismatch) {
  EXPECT_THROW(overlap(BitMask(2, 3), BitMask(3, 2)), ValidationError);
}

TEST(OverlapTest, MatchesNaiveCounts) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const BitMask a = random_mask(rng, 64, 64, uniform_unit(rng));
    const BitMask b = random_mask(rng, 64, 64, uniform_unit(rng));
    const Overlap fast = overlap(a, b);
    const testing::NaiveCounts slow = naive_counts(a, b);
    ASSERT_EQ(fast.intersection, slow.intersection);
    ASSERT_EQ(fast.total_predicted, slow.predicted);
    ASSERT_EQ(fast.total_ground_truth, slow.truth);
    ASSERT_EQ(overlap(b, a).intersection, fast.intersection);
    ASSERT_LE(fast.intersection,
              std::min(fast.total_predicted, fast.total_ground_truth));
  }
}

TEST(OverlapTest, OddSizesIgnorePaddingBits) {
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const int h = 1 + static_cast<int>(uniform_index(rng, 9));
    const int w = 1 + static_cast<int>(uniform_index(rng, 9));
    const BitMask a = random_mask(rng, h, w, 0.5);
    BitMask full(h, w);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) full.set(r, c);
    }
    EXPECT_EQ(overlap(a, full).total_ground_truth,
              static_cast<std::uint64_t>(h * w));
    EXPECT_EQ(overlap(a, full).intersection, a.count());
  }
}

}  // namespace
}  // namespace layoutkit
