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

#ifndef LAYOUTKIT_ERRORS_H_
#define LAYOUTKIT_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace layoutkit {

// Root of every error the library raises on bad input or bad state.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSON, CSV, PGM). Carries the byte offset when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t byte_offset)
      : Error(message), byte_offset_(byte_offset) {}
  explicit ParseError(const std::string& message)
      : Error(message), byte_offset_(0) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// On-disk state disagrees with the digests recorded for it.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

// JSON parse errors report how many bytes were consumed; the offending byte
// is the last of those.
inline std::size_t json_error_offset(std::size_t bytes_read) {
  return bytes_read == 0 ? 0 : bytes_read - 1;
}

}  // namespace layoutkit

#endif  // LAYOUTKIT_ERRORS_H_
