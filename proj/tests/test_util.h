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

#ifndef LAYOUTKIT_TESTS_TEST_UTIL_H_
#define LAYOUTKIT_TESTS_TEST_UTIL_H_

#include <stdlib.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "layoutkit/coco.h"
#include "layoutkit/mask.h"
#include "layoutkit/metrics.h"
#include "layoutkit/random.h"

namespace layoutkit::testing {

// Directory removed on scope exit.
class ScopedTempDir {
 public:
  ScopedTempDir() {
    std::string pattern =
        (std::filesystem::temp_directory_path() / "layoutkit-XXXXXX").string();
    if (mkdtemp(pattern.data()) == nullptr) {
      throw std::runtime_error("mkdtemp failed");
    }
    path_ = pattern;
  }
  ~ScopedTempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScopedTempDir(const ScopedTempDir&) = delete;
  ScopedTempDir& operator=(const ScopedTempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Each pixel set with probability `density`.
inline BitMask random_mask(Rng& rng, int height, int width, double density) {
  BitMask mask(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (uniform_unit(rng) < density) mask.set(r, c);
    }
  }
  return mask;
}

// Oracles below are deliberately naive and share no code with the library.

// Classic even-odd ray cast toward +x.
inline bool point_in_polygon(const Polygon& polygon, double x, double y) {
  bool inside = false;
  const Eigen::Index n = polygon.cols();
  for (Eigen::Index i = 0, j = n - 1; i < n; j = i++) {
    const double xi = polygon(0, i), yi = polygon(1, i);
    const double xj = polygon(0, j), yj = polygon(1, j);
    if (((yi > y) != (yj > y)) && (x < (xj - xi) * (y - yi) / (yj - yi) + xi)) {
      inside = !inside;
    }
  }
  return inside;
}

inline std::vector<std::vector<int>> oracle_rasterize(
    const std::vector<Polygon>& polygons, int height, int width) {
  std::vector<std::vector<int>> grid(height, std::vector<int>(width, 0));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (const Polygon& p : polygons) {
        if (point_in_polygon(p, c + 0.5, r + 0.5)) grid[r][c] = 1;
      }
    }
  }
  return grid;
}

struct NaiveCounts {
  std::uint64_t intersection = 0, predicted = 0, truth = 0;
};

inline NaiveCounts naive_counts(const BitMask& a, const BitMask& b) {
  NaiveCounts counts;
  for (int r = 0; r < a.height(); ++r) {
    for (int c = 0; c < a.width(); ++c) {
      const bool pa = a(r, c), pb = b(r, c);
      if (pa && pb) ++counts.intersection;
      if (pa) ++counts.predicted;
      if (pb) ++counts.truth;
    }
  }
  return counts;
}

inline double naive_dice(const NaiveCounts& c) {
  if (c.predicted + c.truth == 0) return 1.0;
  return 2.0 * c.intersection / double(c.predicted + c.truth);
}

// Random simple-or-not polygon with vertices inside [0, w] x [0, h].
inline Polygon random_polygon(Rng& rng, int height, int width) {
  const int n = 3 + static_cast<int>(uniform_index(rng, 8));
  Polygon p(2, n);
  for (int i = 0; i < n; ++i) {
    p(0, i) = uniform_unit(rng) * width;
    p(1, i) = uniform_unit(rng) * height;
  }
  return p;
}

inline Polygon rect_polygon(double x0, double y0, double x1, double y1) {
  Polygon p(2, 4);
  p << x0, x1, x1, x0, y0, y0, y1, y1;
  return p;
}

}  // namespace layoutkit::testing

#endif  // LAYOUTKIT_TESTS_TEST_UTIL_H_
