// Copyright 2026 The cfattest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfattest {

using Addr = std::uint32_t;
using Word = std::int64_t;
using Bytes = std::vector<std::uint8_t>;

// Renders as "0x" followed by exactly eight lowercase hex digits.
std::string addr_hex(Addr a);

// Strict inverse of addr_hex; also accepts shorter digit runs ("0x104").
// Throws std::invalid_argument on anything else.
Addr parse_addr_hex(std::string_view s);

std::string to_hex(std::span<const std::uint8_t> bytes);

// Lowercase only. Uppercase digits are rejected so that every byte string
// has exactly one accepted spelling.
Bytes from_hex(std::string_view hex);

// Big-endian appenders used by every canonical encoding in the library.
void put_u8(Bytes& out, std::uint8_t v);
void put_u16(Bytes& out, std::uint16_t v);
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);

// Cursor over a byte string; throws DecodeError on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  std::span<const std::uint8_t> take(std::size_t n);

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cfattest
