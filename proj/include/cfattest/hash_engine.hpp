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

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "cfattest/common.hpp"

namespace cfattest {

using Digest512 = std::array<std::uint8_t, 64>;

// FIPS 202 SHA3-512 as an incremental sponge. The rate is 72 bytes, i.e. one
// 576-bit block holds nine 64-bit (Src, Dest) words.
class Sha3_512 {
 public:
  static constexpr std::size_t kRateBytes = 72;

  Sha3_512() = default;

  void update(std::span<const std::uint8_t> data);
  Digest512 finalize();

  // Number of Keccak-f[1600] permutations run so far.
  std::uint64_t permutations() const { return permutations_; }

  static Digest512 digest(std::span<const std::uint8_t> data);

 private:
  void absorb_block();

  std::array<std::uint64_t, 25> state_{};
  std::array<std::uint8_t, kRateBytes> block_{};
  std::size_t fill_ = 0;
  std::uint64_t permutations_ = 0;
  bool finalized_ = false;
};

// Keccak-f[1600] on a 5x5 lane state (lane index x + 5*y).
void keccak_f1600(std::array<std::uint64_t, 25>& state);

struct Authenticator {
  Digest512 bytes{};

  std::string hex() const { return to_hex(bytes); }
  friend bool operator==(const Authenticator&, const Authenticator&) = default;
};

// One measured control transfer as it enters the hash: src || dest, each a
// big-endian u32.
std::array<std::uint8_t, 8> pair_word(Addr src, Addr dest);

// Cumulative authenticator over a stream of (Src, Dest) pairs.
class HashEngine {
 public:
  // Throws std::logic_error after finalize().
  void absorb(Addr src, Addr dest);
  // Throws std::logic_error when called twice.
  Authenticator finalize();

  std::uint64_t words_absorbed() const { return words_; }
  bool finalized() const { return finalized_; }

 private:
  Sha3_512 sponge_;
  std::uint64_t words_ = 0;
  bool finalized_ = false;
};

// Timing model of the engine's input side: one word absorbed per free cycle,
// a 3-cycle busy window after every ninth word, and a FIFO in front of it.
inline constexpr std::size_t kWordsPerBlock = 9;
inline constexpr std::size_t kBusyCycles = 3;

struct AbsorbResult {
  std::size_t max_occupancy = 0;
  bool overflow = false;
  // Arrivals that found the FIFO already holding `buffer_depth` words. They
  // are still queued and absorbed in order; the model never drops.
  std::size_t overflowed_words = 0;
  // Cycle in which the last word was absorbed (0 for an empty stream).
  std::uint64_t completion_cycle = 0;
};

// `arrival_cycles` must be non-decreasing with at most one arrival per cycle;
// throws std::invalid_argument otherwise.
AbsorbResult simulate_absorb(std::span<const std::uint64_t> arrival_cycles, std::size_t buffer_depth);

}  // namespace cfattest
