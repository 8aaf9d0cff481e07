// Copyright 2026 The privtrain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVTRAIN_BINARY_IO_HPP_
#define PRIVTRAIN_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "privtrain/errors.hpp"

namespace privtrain::binary {

// Little-endian encoders appending to a byte string.
template <typename T>
void Put(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(value);
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xFF));
    u = static_cast<U>(u >> 8);
  }
}

inline void PutF32(std::string& out, float value) { Put(out, std::bit_cast<uint32_t>(value)); }

// Bounds-checked little-endian reader; running off the end is kTruncated.
class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    static_assert(std::is_integral_v<T>);
    Need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i));
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  float GetF32() { return std::bit_cast<float>(Get<uint32_t>()); }

  std::string_view Take(size_t n) {
    Need(n);
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  size_t remaining() const { return bytes_.size() - pos_; }

  void Need(size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::kTruncated, "unexpected end of data");
  }

 private:
  std::string_view bytes_;
  size_t pos_ = 0;
};

std::string ReadFile(const std::string& path);
// Writes via a temporary sibling and rename, so readers never see a partial file.
void WriteFileAtomic(const std::string& path, std::string_view bytes);

}  // namespace privtrain::binary

#endif  // PRIVTRAIN_BINARY_IO_HPP_
