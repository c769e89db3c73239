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

#include <algorithm>
#include <bit>
#include <charconv>
#include <numeric>

#include "layoutkit/errors.h"

namespace layoutkit {

BitMask::BitMask(int height, int width) : height_(height), width_(width) {
  if (height <= 0 || width <= 0) {
    throw ValidationError("mask dimensions must be positive, got " +
                          std::to_string(height) + "x" + std::to_string(width));
  }
  words_.assign((size() + 63) / 64, 0);
}

std::size_t BitMask::count() const {
  std::size_t total = 0;
  for (std::uint64_t word : words_) total += std::popcount(word);
  return total;
}

BitMask& BitMask::operator|=(const BitMask& other) {
  if (height_ != other.height_ || width_ != other.width_) {
    throw ValidationError("mask dimension mismatch");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> BitMask::to_dense()
    const {
  Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> dense(height_,
                                                                    width_);
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) dense(r, c) = (*this)(r, c) ? 1 : 0;
  }
  return dense;
}

void validate_rle(const RleMask& rle) {
  if (rle.height <= 0 || rle.width <= 0) {
    throw ValidationError("RLE dimensions must be positive");
  }
  if (rle.counts.empty()) {
    throw ValidationError("RLE has no counts");
  }
  for (std::size_t i = 1; i < rle.counts.size(); ++i) {
    if (rle.counts[i] == 0) {
      throw ValidationError("RLE count " + std::to_string(i) +
                            " is an interior zero run");
    }
  }
  const std::uint64_t sum = std::accumulate(
      rle.counts.begin(), rle.counts.end(), std::uint64_t{0});
  const std::uint64_t expected = static_cast<std::uint64_t>(rle.height) *
                                 static_cast<std::uint64_t>(rle.width);
  if (sum != expected) {
    throw ValidationError("RLE counts sum to " + std::to_string(sum) +
                          ", expected " + std::to_string(expected) + " (" +
                          std::to_string(rle.height) + "x" +
                          std::to_string(rle.width) + ")");
  }
}

RleMask rle_encode(const BitMask& mask) {
  RleMask rle{mask.height(), mask.width(), {}};
  bool current = false;
  std::uint32_t run = 0;
  for (int c = 0; c < mask.width(); ++c) {
    for (int r = 0; r < mask.height(); ++r) {
      if (mask(r, c) != current) {
        rle.counts.push_back(run);
        run = 0;
        current = !current;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BitMask rle_decode(const RleMask& rle) {
  validate_rle(rle);
  BitMask mask(rle.height, rle.width);
  std::uint64_t position = 0;
  const auto height = static_cast<std::uint64_t>(rle.height);
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    if (i % 2 == 1) {
      for (std::uint64_t k = position; k < position + rle.counts[i]; ++k) {
        mask.set(static_cast<int>(k % height), static_cast<int>(k / height));
      }
    }
    position += rle.counts[i];
  }
  return mask;
}

std::string format_rle_counts(std::span<const std::uint32_t> counts) {
  std::string text;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i > 0) text.push_back(' ');
    text += std::to_string(counts[i]);
  }
  return text;
}

std::vector<std::uint32_t> parse_rle_counts(std::string_view text) {
  std::vector<std::uint32_t> counts;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (!counts.empty()) {
      if (text[pos] != ' ') {
        throw ParseError("RLE counts must be separated by single spaces", pos);
      }
      ++pos;
    }
    std::uint32_t value = 0;
    auto [end, ec] =
        std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (ec != std::errc() || end == text.data() + pos) {
      throw ParseError("invalid RLE count at byte " + std::to_string(pos),
                       pos);
    }
    counts.push_back(value);
    pos = static_cast<std::size_t>(end - text.data());
  }
  if (counts.empty()) throw ParseError("empty RLE text", 0);
  return counts;
}

Overlap overlap(const BitMask& predicted, const BitMask& ground_truth) {
  if (predicted.height() != ground_truth.height() ||
      predicted.width() != ground_truth.width()) {
    throw ValidationError(
        "mask dimension mismatch: " + std::to_string(predicted.height()) + "x" +
        std::to_string(predicted.width()) + " vs " +
        std::to_string(ground_truth.height()) + "x" +
        std::to_string(ground_truth.width()));
  }
  Overlap result;
  const auto a = predicted.words();
  const auto b = ground_truth.words();
  for (std::size_t i = 0; i < a.size(); ++i) {
    result.intersection += std::popcount(a[i] & b[i]);
    result.total_predicted += std::popcount(a[i]);
    result.total_ground_truth += std::popcount(b[i]);
  }
  return result;
}

BitMask rasterize(std::span<const Polygon> polygons, int height, int width) {
  if (height <= 0 || width <= 0) {
    throw ValidationError("cannot rasterize onto a zero-area canvas");
  }
  BitMask mask(height, width);
  std::vector<double> crossings;
  for (const Polygon& polygon : polygons) {
    const Eigen::Index n = polygon.cols();
    if (n < 3) throw ValidationError("polygon needs ≥3 vertices");
    for (int r = 0; r < height; ++r) {
      const double y = r + 0.5;
      crossings.clear();
      for (Eigen::Index i = 0, j = n - 1; i < n; j = i++) {
        const double xi = polygon(0, i), yi = polygon(1, i);
        const double xj = polygon(0, j), yj = polygon(1, j);
        if ((yi > y) != (yj > y)) {
          crossings.push_back((xj - xi) * (y - yi) / (yj - yi) + xi);
        }
      }
      if (crossings.empty()) continue;
      std::sort(crossings.begin(), crossings.end());
      // A center is inside iff an odd number of crossings lie strictly to
      // its right.
      auto right = crossings.begin();
      for (int c = 0; c < width; ++c) {
        const double x = c + 0.5;
        right = std::upper_bound(right, crossings.end(), x);
        if ((crossings.end() - right) % 2 == 1) mask.set(r, c);
      }
    }
  }
  return mask;
}

}  // namespace layoutkit
