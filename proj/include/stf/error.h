// Copyright (c) 2026 The stfnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STF_ERROR_H_
#define STF_ERROR_H_

#include <stdexcept>
#include <string>

namespace stf {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can map it to a machine-readable category.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

// Input outside the mathematical domain of an operation (empty segment,
// utterance shorter than the receptive field, zero vector, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error("range", what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error("numeric", what) {}
};

// Malformed file content; messages name the file and the byte offset or field.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format", what) {}
};

// Inputs that are individually well-formed but inconsistent with each other.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error("validation", what) {}
};

}  // namespace stf

#endif  // STF_ERROR_H_
