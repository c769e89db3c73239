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

#ifndef LAYOUTKIT_MASK_H_
#define LAYOUTKIT_MASK_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "layoutkit/coco.h"

namespace layoutkit {

// Dense binary mask, bit-packed row-major: bit r * width + c of the word
// array holds pixel (r, c). Padding bits past height * width are always 0.
class BitMask {
 public:
  // Throws ValidationError unless height and width are positive.
  BitMask(int height, int width);

  // Any nonzero coefficient becomes a set pixel.
  template <typename Derived>
  static BitMask from_dense(const Eigen::DenseBase<Derived>& dense) {
    BitMask mask(static_cast<int>(dense.rows()), static_cast<int>(dense.cols()));
    for (Eigen::Index r = 0; r < dense.rows(); ++r) {
      for (Eigen::Index c = 0; c < dense.cols(); ++c) {
        if (dense(r, c) != 0) mask.set(static_cast<int>(r), static_cast<int>(c));
      }
    }
    return mask;
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }

  bool operator()(int row, int col) const {
    const std::size_t bit = index(row, col);
    return (words_[bit >> 6] >> (bit & 63)) & 1u;
  }
  void set(int row, int col, bool value = true) {
    const std::size_t bit = index(row, col);
    const std::uint64_t flag = std::uint64_t{1} << (bit & 63);
    if (value) {
      words_[bit >> 6] |= flag;
    } else {
      words_[bit >> 6] &= ~flag;
    }
  }

  // Number of set pixels.
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  std::span<const std::uint64_t> words() const { return words_; }

  BitMask& operator|=(const BitMask& other);

  Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> to_dense() const;

  friend bool operator==(const BitMask&, const BitMask&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int height_;
  int width_;
  std::vector<std::uint64_t> words_;
};

// Column-major run lengths, alternating zero-runs and one-runs, starting with
// a (possibly empty) zero-run.
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

// Throws ValidationError if the counts do not describe a height x width mask
// or contain an interior zero run.
void validate_rle(const RleMask& rle);

RleMask rle_encode(const BitMask& mask);
BitMask rle_decode(const RleMask& rle);

// Text form: counts joined by single spaces, e.g. "0 1 1 2".
std::string format_rle_counts(std::span<const std::uint32_t> counts);
std::vector<std::uint32_t> parse_rle_counts(std::string_view text);

// Pixel-count terms of the Dice score.
struct Overlap {
  std::uint64_t intersection = 0;
  std::uint64_t total_predicted = 0;
  std::uint64_t total_ground_truth = 0;

  friend bool operator==(const Overlap&, const Overlap&) = default;
};

// Word-parallel popcounts. Throws ValidationError on a dimension mismatch.
Overlap overlap(const BitMask& predicted, const BitMask& ground_truth);

// Pixel (r, c) is set iff its center (c + 0.5, r + 0.5) lies inside at least
// one polygon under the even-odd rule. Polygons are OR-ed together.
BitMask rasterize(std::span<const Polygon> polygons, int height, int width);

}  // namespace layoutkit

#endif  // LAYOUTKIT_MASK_H_
