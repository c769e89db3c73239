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

#ifndef LAYOUTKIT_SUBMISSION_H_
#define LAYOUTKIT_SUBMISSION_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layoutkit/mask.h"
#include "layoutkit/metrics.h"

namespace layoutkit {

inline constexpr std::string_view kSubmissionHeader =
    "image_id,class,height,width,rle";

struct SubmissionRow {
  std::int64_t image_id = 0;
  std::string category;
  int height = 0;
  int width = 0;
  // Space-joined column-major run lengths.
  std::string rle;

  friend bool operator==(const SubmissionRow&, const SubmissionRow&) = default;
};

SubmissionRow make_submission_row(std::int64_t image_id, std::string category,
                                  const BitMask& mask);

// Header line, then one line per row in the given order.
std::string format_submission(std::span<const SubmissionRow> rows);

// Throws ParseError (with the 1-based line number in the message) on a
// malformed header or row.
std::vector<SubmissionRow> parse_submission(std::string_view csv);

// Throws ValidationError naming the first row whose RLE does not decode to
// its (height, width), or that repeats an (image, class) pair.
void check_submission(std::span<const SubmissionRow> rows);

MaskMap submission_masks(std::span<const SubmissionRow> rows);

}  // namespace layoutkit

#endif  // LAYOUTKIT_SUBMISSION_H_
