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

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfattest/branch_filter.hpp"
#include "cfattest/common.hpp"

namespace cfattest {

struct MonitorConfig {
  std::uint32_t indirect_bits = 4;  // n
  std::uint32_t path_bits = 16;     // l
  std::uint32_t max_depth = 3;

  // Throws std::invalid_argument unless 1 <= n <= min(l, 8), l <= 64 and
  // 1 <= max_depth <= 255.
  void validate() const;
  // 2^n - 1; code 0 is the overflow code.
  std::uint32_t indirect_capacity() const { return (1u << indirect_bits) - 1; }

  friend bool operator==(const MonitorConfig&, const MonitorConfig&) = default;
};

// Bit string of explicit length; the first recorded outcome is the leftmost
// character of to_string(). "011" and "0011" are different ids.
class PathId {
 public:
  static constexpr std::uint32_t kMaxBits = 64;

  PathId() = default;
  static PathId from_string(std::string_view bits);

  void append_bit(bool bit);
  // Appends `width` bits of `code`, most significant first.
  void append_code(std::uint32_t code, std::uint32_t width);

  std::uint32_t length() const { return length_; }
  bool bit(std::uint32_t i) const { return (bits_ >> (length_ - 1 - i)) & 1u; }
  // Reads `width` bits starting at position `i` as an unsigned code.
  std::uint32_t code_at(std::uint32_t i, std::uint32_t width) const;
  std::string to_string() const;

  // ceil(length / 8) bytes, first bit in the MSB of the first byte, zero pad.
  Bytes packed() const;
  // Rejects non-zero padding bits so the packing stays injective.
  static PathId unpack(std::span<const std::uint8_t> bytes, std::uint32_t length);

  friend bool operator==(const PathId&, const PathId&) = default;
  friend auto operator<=>(const PathId&, const PathId&) = default;

 private:
  std::uint64_t bits_ = 0;  // right-aligned
  std::uint32_t length_ = 0;
};

// Per-depth iteration counters keyed by path id. A missing key reads as 0.
class LoopCounterTable {
 public:
  std::uint64_t count(const PathId& id) const;
  // Returns the count before incrementing.
  std::uint64_t increment(const PathId& id);
  std::size_t size() const { return counts_.size(); }
  void clear() { counts_.clear(); }

 private:
  std::map<PathId, std::uint64_t> counts_;
};

// Run-time re-encoding of indirect branch targets into n-bit codes, assigned
// 1, 2, ... in first-seen order. Targets past capacity get code 0 and are not
// stored.
class IndirectTargetTable {
 public:
  explicit IndirectTargetTable(std::uint32_t capacity = 15) : capacity_(capacity) {}

  std::uint32_t encode(Addr target);
  std::optional<Addr> decode(std::uint32_t code) const;
  const std::vector<Addr>& targets() const { return targets_; }
  void clear() { targets_.clear(); }

 private:
  std::uint32_t capacity_;
  std::vector<Addr> targets_;
};

struct PathCount {
  PathId id;
  std::uint64_t count = 0;

  friend bool operator==(const PathCount&, const PathCount&) = default;
};

// One Enter..Exit execution of a loop as reported in the metadata L. A
// session with depth 0 and no paths marks a faulted execution; its
// loop_entry holds the faulting pc.
struct LoopSession {
  Addr loop_entry = 0;
  std::uint32_t depth = 0;
  std::optional<std::uint32_t> parent;
  std::vector<PathCount> paths;  // first-occurrence order
  std::vector<Addr> indirect_targets;

  bool is_fault_marker() const { return depth == 0; }
  friend bool operator==(const LoopSession&, const LoopSession&) = default;
};

using Metadata = std::vector<LoopSession>;

inline constexpr std::uint32_t kNoParent = 0xFFFFFFFFu;

// Canonical big-endian encoding of L (this byte string is what gets signed).
void encode_metadata(const Metadata& l, Bytes& out);
Bytes encode_metadata(const Metadata& l);
// Throws DecodeError on malformed input.
Metadata decode_metadata(ByteReader& in);

// Counter memory needed to track `path_bits`-bit paths for `depth` nesting
// levels: 8 * 2^path_bits * depth.
std::uint64_t memory_bits(std::uint32_t path_bits, std::uint32_t depth);

// Monitor state for one active loop.
struct PathTracker {
  LoopContext ctx;
  std::size_t session_index = 0;
  std::optional<std::uint32_t> parent;
  PathId partial;
  bool overflowed = false;  // current traversal ran out of path bits
  std::vector<std::pair<Addr, Addr>> buffered;
  LoopCounterTable counters;
  IndirectTargetTable targets;
  std::vector<PathId> order;  // first-occurrence order
};

// What a branch inside a loop turned into.
enum class StepResult { Encoded, HashDirect };

StepResult encode_step(PathTracker& t, const BranchEvent& ev, const MonitorConfig& cfg);

struct NewPath {
  PathId id;
  std::vector<std::pair<Addr, Addr>> pairs;
};

// Closes the current traversal. Returns the path's buffered pairs when this
// is its first occurrence, nothing otherwise.
std::optional<NewPath> close_path(PathTracker& t);

// Builds the session record and resets the per-loop tables for reuse.
LoopSession finalize_session(PathTracker& t);

// Stream consumer behind the loop detector. Pairs outside tracked loops and
// first-occurrence loop paths go to `sink` in emission order.
class LoopMonitor {
 public:
  using PairSink = std::function<void(Addr, Addr)>;

  LoopMonitor(MonitorConfig cfg, PairSink sink);

  void consume(const AnnotatedEvent& ev);
  void mark_fault(Addr pc);
  const Metadata& metadata() const { return metadata_; }
  Metadata take_metadata() { return std::move(metadata_); }

 private:
  void on_branch(const BranchEvent& ev);
  void on_status(const LoopStatusEvent& ev);
  void emit_new_path(const std::optional<NewPath>& np);

  MonitorConfig cfg_;
  PairSink sink_;
  std::vector<PathTracker> active_;
  Metadata metadata_;
};

}  // namespace cfattest
