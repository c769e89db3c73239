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

#include "layoutkit/image.h"

#include <cctype>
#include <cstring>

#include "layoutkit/digest.h"
#include "layoutkit/errors.h"

namespace layoutkit {
namespace {

// Reads one whitespace-delimited header integer, skipping '#' comments.
int read_header_int(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  long value = 0;
  while (pos < bytes.size() &&
         std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1 << 20) throw ParseError("PGM header value too large", start);
    ++pos;
  }
  if (pos == start) throw ParseError("malformed PGM header", start);
  return static_cast<int>(value);
}

}  // namespace

std::string encode_pgm(const GrayImage& image) {
  std::string bytes = "P5\n" + std::to_string(image.width()) + " " +
                      std::to_string(image.height()) + "\n255\n";
  const std::size_t header = bytes.size();
  bytes.resize(header + static_cast<std::size_t>(image.pixels.size()));
  std::memcpy(bytes.data() + header, image.pixels.data(),
              static_cast<std::size_t>(image.pixels.size()));
  return bytes;
}

GrayImage decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw ParseError("not a binary PGM (P5) image", 0);
  }
  std::size_t pos = 2;
  const int width = read_header_int(bytes, pos);
  const int height = read_header_int(bytes, pos);
  const int maxval = read_header_int(bytes, pos);
  if (width <= 0 || height <= 0) {
    throw ParseError("PGM dimensions must be positive", pos);
  }
  if (maxval != 255) throw ParseError("only 8-bit PGM is supported", pos);
  if (pos >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw ParseError("malformed PGM header", pos);
  }
  ++pos;
  const std::size_t count =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos < count) {
    throw ParseError("truncated PGM pixel data", bytes.size());
  }
  GrayImage image;
  image.pixels.resize(height, width);
  std::memcpy(image.pixels.data(), bytes.data() + pos, count);
  return image;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  write_file_atomic(path, encode_pgm(image));
}

GrayImage read_pgm(const std::filesystem::path& path) {
  try {
    return decode_pgm(read_binary_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.byte_offset());
  }
}

}  // namespace layoutkit
