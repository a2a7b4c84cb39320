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

#ifndef STF_BINARY_IO_H_
#define STF_BINARY_IO_H_

// Little-endian encoders/decoders shared by the feature and checkpoint
// formats. Values are assembled byte by byte so the on-disk layout does not
// depend on the host byte order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "stf/error.h"

namespace stf::binary {

inline void PutU16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

inline void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void PutF32(std::string& out, float v) {
  PutU32(out, std::bit_cast<uint32_t>(v));
}

// Sequential reader over an in-memory file. Errors carry the file name and
// the byte offset where decoding failed.
class Reader {
 public:
  Reader(const std::string& bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  size_t offset() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }

  void Need(size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(name_ + ": truncated at offset " + std::to_string(pos_) +
                        " while reading " + what + " (need " + std::to_string(n) +
                        " bytes, have " + std::to_string(remaining()) + ")");
    }
  }

  std::string Bytes(size_t n, const char* what) {
    Need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  uint8_t U8(const char* what) {
    Need(1, what);
    return static_cast<uint8_t>(bytes_[pos_++]);
  }

  uint16_t U16(const char* what) {
    Need(2, what);
    uint16_t v = static_cast<uint8_t>(bytes_[pos_]) |
                 (static_cast<uint16_t>(static_cast<uint8_t>(bytes_[pos_ + 1])) << 8);
    pos_ += 2;
    return v;
  }

  uint32_t U32(const char* what) {
    Need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<uint32_t>(static_cast<uint8_t>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  float F32(const char* what) { return std::bit_cast<float>(U32(what)); }

  [[noreturn]] void Fail(const std::string& msg) const {
    throw FormatError(name_ + ": " + msg + " at offset " + std::to_string(pos_));
  }

 private:
  const std::string& bytes_;
  std::string name_;
  size_t pos_ = 0;
};

std::string ReadFile(const std::string& path);
// Writes via a temporary file and rename so readers never see partial files.
void WriteFile(const std::string& path, const std::string& bytes);

}  // namespace stf::binary

#endif  // STF_BINARY_IO_H_
