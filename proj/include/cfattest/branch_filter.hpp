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
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "cfattest/emulator.hpp"

namespace cfattest {

enum class BranchKind : std::uint8_t { CondTaken, CondNotTaken, DirectJump, IndirectJump, Call, Return };

std::string_view branch_kind_name(BranchKind k);

struct BranchEvent {
  Addr src = 0;
  Addr dest = 0;
  BranchKind kind = BranchKind::DirectJump;
  bool linking = false;
  // Destination came from a register (jr, jalr, ret).
  bool indirect = false;
  // 0 outside any tracked loop, else the depth of the innermost tracked loop
  // the branch executed in. Set by LoopDetector.
  std::uint32_t loop_depth = 0;
  std::uint64_t cycle = 0;

  friend bool operator==(const BranchEvent&, const BranchEvent&) = default;
};

// Maps one trace event to its control-flow record; nullopt for everything
// that is not a branch, jump, or return (including fault events).
std::optional<BranchEvent> filter_event(const TraceEvent& ev);

std::vector<BranchEvent> filter(std::span<const TraceEvent> events);

struct LoopContext {
  Addr entry_addr = 0;
  Addr backedge_addr = 0;
  Addr exit_addr = 0;
  std::uint32_t depth = 0;
  std::int64_t call_depth_at_entry = 0;
  // Opened by a directly recursive call rather than a backward branch.
  bool recursive = false;

  friend bool operator==(const LoopContext&, const LoopContext&) = default;
};

struct LoopStatusEvent {
  enum class Kind : std::uint8_t { Enter, IterationBoundary, Exit };
  Kind kind = Kind::Enter;
  LoopContext loop;
  std::uint64_t at_cycle = 0;

  friend bool operator==(const LoopStatusEvent&, const LoopStatusEvent&) = default;
};

std::string_view loop_status_name(LoopStatusEvent::Kind k);

using AnnotatedEvent = std::variant<BranchEvent, LoopStatusEvent>;

// Online loop detection over the filtered branch stream.
//
// A non-linking backward branch (dest < src; returns excluded) opens a loop
// whose body is [dest, src] and whose exit node is src + 4. Re-entering the
// entry node from inside the body at the loop's call depth is an iteration
// boundary; leaving the body at that call depth, or returning out of the
// function that owns the loop, is an exit. Branches executed in callees stay
// attributed to the loop. Loops nested deeper than max_depth are still
// tracked for exit detection but report loop_depth 0 and emit no status.
// A call whose target is the function currently executing opens a recursion
// context at the function entry; further calls to it and returns back to the
// recursive call site are its iteration boundaries.
class LoopDetector {
 public:
  explicit LoopDetector(std::uint32_t max_depth = 3) : max_depth_(max_depth) {}

  // Appends the annotated branch followed by any status events it caused.
  void process(const BranchEvent& ev, std::vector<AnnotatedEvent>& out);

  // Emits an Exit for every open loop, innermost first (end of trace).
  void finish(std::uint64_t at_cycle, std::vector<AnnotatedEvent>& out);

  // Opens a loop at the current call depth before its backedge has been
  // seen. The backedge then reads as an iteration boundary.
  void preopen(Addr entry, Addr backedge, std::uint64_t cycle, std::vector<AnnotatedEvent>& out);

  // The non-recursive loop opened by the last process() call, if any.
  const std::optional<LoopContext>& opened() const { return opened_; }

  std::uint32_t active_depth() const;
  std::int64_t call_depth() const { return call_depth_; }

 private:
  struct Active {
    LoopContext ctx;
    bool degraded = false;
  };

  std::uint32_t reported_depth() const;
  void emit_status(LoopStatusEvent::Kind kind, const Active& a, std::uint64_t cycle,
                   std::vector<AnnotatedEvent>& out) const;
  void open(Addr entry, Addr backedge, bool recursive, std::uint64_t cycle, std::vector<AnnotatedEvent>& out);

  std::uint32_t max_depth_;
  std::vector<Active> stack_;
  std::vector<Addr> call_targets_;
  std::int64_t call_depth_ = 0;
  std::optional<LoopContext> opened_;
};

// Where a loop session starts. The online heuristic only recognises a loop at
// its first backedge (event index `backedge_event`); the first iteration is
// the run of branches just before it that stay inside [entry, backedge] at
// the loop's call depth, together with any calls made from there. It starts
// at event index `first_event`.
struct LoopOpening {
  std::size_t first_event = 0;
  std::size_t backedge_event = 0;
  Addr entry = 0;
  Addr backedge = 0;

  friend bool operator==(const LoopOpening&, const LoopOpening&) = default;
};

std::vector<LoopOpening> find_loop_openings(std::span<const BranchEvent> events, std::uint32_t max_depth = 3);

// Two passes: find_loop_openings, then the online detector with every loop
// opened at its first_event. Each session therefore reads Enter,
// IterationBoundary per completed iteration, Exit.
std::vector<AnnotatedEvent> detect_loops(std::span<const BranchEvent> events, std::uint32_t max_depth = 3,
                                         std::uint64_t end_cycle = 0);

}  // namespace cfattest
