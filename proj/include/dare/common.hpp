/*
 * Copyright 2026 The dare-forest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DARE_COMMON_HPP_
#define DARE_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dare {

// External, stable instance identifier. Assigned densely at load time and
// never reused after a deletion.
using InstanceId = std::int64_t;

// Internal row index into a Database. Slots never move; deleted rows are
// tombstoned until the database is compacted on save.
using Slot = std::uint32_t;

using Count = std::int64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed cell, bad header, non-numeric value in a numeric column.
class ParseError : public Error {
 public:
  using Error::Error;
};

// The label column does not have exactly two distinct values.
class LabelCardinalityError : public Error {
 public:
  using Error::Error;
};

class UnknownIdError : public Error {
 public:
  explicit UnknownIdError(InstanceId id)
      : Error("unknown instance id " + std::to_string(id)), id_(id) {}
  InstanceId id() const { return id_; }

 private:
  InstanceId id_;
};

// Model file with the wrong magic, version or checksum.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace dare

#endif  // DARE_COMMON_HPP_
