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

#include "layoutkit/submission.h"

#include <charconv>
#include <set>
#include <sstream>

#include "layoutkit/errors.h"

namespace layoutkit {
namespace {

template <typename T>
T parse_field(std::string_view field, std::size_t line, const char* name) {
  T value{};
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size() || field.empty()) {
    throw ParseError("line " + std::to_string(line) + ": invalid " + name +
                     " '" + std::string(field) + "'");
  }
  return value;
}

BitMask decode_row(const SubmissionRow& row) {
  return rle_decode({row.height, row.width, parse_rle_counts(row.rle)});
}

}  // namespace

SubmissionRow make_submission_row(std::int64_t image_id, std::string category,
                                  const BitMask& mask) {
  return {image_id, std::move(category), mask.height(), mask.width(),
          format_rle_counts(rle_encode(mask).counts)};
}

std::string format_submission(std::span<const SubmissionRow> rows) {
  std::ostringstream out;
  out << kSubmissionHeader << '\n';
  for (const SubmissionRow& row : rows) {
    out << row.image_id << ',' << row.category << ',' << row.height << ','
        << row.width << ',' << row.rle << '\n';
  }
  return out.str();
}

std::vector<SubmissionRow> parse_submission(std::string_view csv) {
  std::vector<SubmissionRow> rows;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_number == 1) {
      if (line != kSubmissionHeader) {
        throw ParseError("line 1: expected header '" +
                         std::string(kSubmissionHeader) + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (fields.size() != 5) {
      throw ParseError("line " + std::to_string(line_number) + ": expected 5 fields, got " +
                       std::to_string(fields.size()));
    }
    SubmissionRow row;
    row.image_id = parse_field<std::int64_t>(fields[0], line_number, "image_id");
    row.category = std::string(fields[1]);
    row.height = parse_field<int>(fields[2], line_number, "height");
    row.width = parse_field<int>(fields[3], line_number, "width");
    row.rle = std::string(fields[4]);
    rows.push_back(std::move(row));
  }
  if (line_number == 0) throw ParseError("empty submission file");
  return rows;
}

void check_submission(std::span<const SubmissionRow> rows) {
  std::set<std::pair<std::int64_t, std::string>> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SubmissionRow& row = rows[i];
    const std::string where = "row " + std::to_string(i + 1) + " (image " +
                              std::to_string(row.image_id) + ", " + row.category + ")";
    if (row.category.empty()) throw ValidationError(where + ": empty class");
    if (!seen.emplace(row.image_id, row.category).second) {
      throw ValidationError(where + ": duplicate image/class pair");
    }
    try {
      decode_row(row);
    } catch (const Error& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
}

MaskMap submission_masks(std::span<const SubmissionRow> rows) {
  check_submission(rows);
  MaskMap masks;
  for (const SubmissionRow& row : rows) {
    masks.emplace(CellKey{row.image_id, row.category}, decode_row(row));
  }
  return masks;
}

}  // namespace layoutkit
