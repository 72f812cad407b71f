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

#include "cfattest/hash_engine.hpp"

#include <bit>
#include <deque>
#include <stdexcept>

namespace cfattest {

namespace {

constexpr std::array<std::uint64_t, 24> kRoundConstants{
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

// Rotation offsets r[x][y], indexed x + 5*y.
constexpr std::array<int, 25> kRotations{
    0, 1, 62, 28, 27,
    36, 44, 6, 55, 20,
    3, 10, 43, 25, 39,
    41, 45, 15, 21, 8,
    18, 2, 61, 56, 14,
};

}  // namespace

void keccak_f1600(std::array<std::uint64_t, 25>& a) {
  for (auto rc : kRoundConstants) {
    // theta
    std::array<std::uint64_t, 5> c{};
    for (int x = 0; x < 5; ++x) c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
    for (int x = 0; x < 5; ++x) {
      std::uint64_t d = c[(x + 4) % 5] ^ std::rotl(c[(x + 1) % 5], 1);
      for (int y = 0; y < 25; y += 5) a[x + y] ^= d;
    }
    // rho + pi: B[y][2x+3y] = rot(A[x][y], r[x][y])
    std::array<std::uint64_t, 25> b{};
    for (int x = 0; x < 5; ++x) {
      for (int y = 0; y < 5; ++y) {
        b[y + 5 * ((2 * x + 3 * y) % 5)] = std::rotl(a[x + 5 * y], kRotations[x + 5 * y]);
      }
    }
    // chi
    for (int y = 0; y < 25; y += 5) {
      for (int x = 0; x < 5; ++x) a[x + y] = b[x + y] ^ (~b[(x + 1) % 5 + y] & b[(x + 2) % 5 + y]);
    }
    // iota
    a[0] ^= rc;
  }
}

void Sha3_512::absorb_block() {
  for (std::size_t lane = 0; lane < kRateBytes / 8; ++lane) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | block_[lane * 8 + i];
    state_[lane] ^= v;
  }
  keccak_f1600(state_);
  ++permutations_;
  fill_ = 0;
}

void Sha3_512::update(std::span<const std::uint8_t> data) {
  if (finalized_) throw std::logic_error("Sha3_512::update after finalize");
  for (auto byte : data) {
    block_[fill_++] = byte;
    if (fill_ == kRateBytes) absorb_block();
  }
}

Digest512 Sha3_512::finalize() {
  if (finalized_) throw std::logic_error("Sha3_512::finalize called twice");
  // SHA-3 domain separation bits 01, then pad10*1.
  std::fill(block_.begin() + static_cast<std::ptrdiff_t>(fill_), block_.end(), 0);
  block_[fill_] ^= 0x06;
  block_[kRateBytes - 1] ^= 0x80;
  absorb_block();
  finalized_ = true;

  Digest512 out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(state_[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

Digest512 Sha3_512::digest(std::span<const std::uint8_t> data) {
  Sha3_512 h;
  h.update(data);
  return h.finalize();
}

std::array<std::uint8_t, 8> pair_word(Addr src, Addr dest) {
  return {static_cast<std::uint8_t>(src >> 24),  static_cast<std::uint8_t>(src >> 16),
          static_cast<std::uint8_t>(src >> 8),   static_cast<std::uint8_t>(src),
          static_cast<std::uint8_t>(dest >> 24), static_cast<std::uint8_t>(dest >> 16),
          static_cast<std::uint8_t>(dest >> 8),  static_cast<std::uint8_t>(dest)};
}

void HashEngine::absorb(Addr src, Addr dest) {
  if (finalized_) throw std::logic_error("HashEngine::absorb after finalize");
  auto w = pair_word(src, dest);
  sponge_.update(w);
  ++words_;
}

Authenticator HashEngine::finalize() {
  if (finalized_) throw std::logic_error("HashEngine::finalize called twice");
  finalized_ = true;
  return Authenticator{sponge_.finalize()};
}

AbsorbResult simulate_absorb(std::span<const std::uint64_t> arrival_cycles, std::size_t buffer_depth) {
  for (std::size_t i = 1; i < arrival_cycles.size(); ++i) {
    if (arrival_cycles[i] <= arrival_cycles[i - 1]) {
      throw std::invalid_argument("arrival cycles must be strictly increasing (one word per cycle)");
    }
  }

  AbsorbResult result;
  std::deque<std::uint64_t> fifo;  // arrival cycle of each queued word
  std::size_t next_arrival = 0;
  std::size_t in_block = 0;
  std::uint64_t busy_until = 0;  // first cycle the padder accepts input again
  std::uint64_t cycle = arrival_cycles.empty() ? 0 : arrival_cycles.front();

  while (next_arrival < arrival_cycles.size() || !fifo.empty()) {
    bool arriving = next_arrival < arrival_cycles.size() && arrival_cycles[next_arrival] == cycle;
    bool free = cycle >= busy_until;

    if (free && (!fifo.empty() || arriving)) {
      // Oldest word first: the queue head if any, otherwise the new arrival.
      if (!fifo.empty()) {
        fifo.pop_front();
      } else {
        arriving = false;
        ++next_arrival;
      }
      result.completion_cycle = cycle;
      if (++in_block == kWordsPerBlock) {
        in_block = 0;
        busy_until = cycle + 1 + kBusyCycles;
      }
    }
    if (arriving) {
      if (fifo.size() >= buffer_depth) {
        result.overflow = true;
        ++result.overflowed_words;
      }
      fifo.push_back(cycle);
      ++next_arrival;
    }
    result.max_occupancy = std::max(result.max_occupancy, fifo.size());

    if (fifo.empty() && next_arrival < arrival_cycles.size()) {
      cycle = std::max(cycle + 1, arrival_cycles[next_arrival]);
    } else {
      ++cycle;
    }
  }
  return result;
}

}  // namespace cfattest
