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
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfattest/isa.hpp"

namespace cfattest {

struct MachineState {
  Addr pc = kBaseAddress;
  std::array<Word, kRegisterFileSize> regs{};
  std::vector<Word> data_mem;
  std::uint64_t cycle = 0;

  friend bool operator==(const MachineState&, const MachineState&) = default;
};

enum class Fault : std::uint8_t { None, PcOutOfRange, DataOutOfRange };

std::string_view fault_name(Fault f);

// One retired instruction. A PcOutOfRange fault is recorded as its own event
// whose pc is the bad address and whose instruction is meaningless; a
// DataOutOfRange fault is recorded on the offending ld/st with next_pc == pc.
struct TraceEvent {
  std::uint64_t cycle = 0;
  Addr pc = 0;
  Instruction instr;
  bool taken = false;  // CondBranch only
  Addr next_pc = 0;
  Fault fault = Fault::None;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct Trace {
  std::string program_id;
  std::vector<Word> input;
  std::vector<TraceEvent> events;

  bool faulted() const { return !events.empty() && events.back().fault != Fault::None; }
  bool halted() const {
    return !events.empty() && events.back().fault == Fault::None && events.back().instr.op == Opcode::Halt;
  }

  friend bool operator==(const Trace&, const Trace&) = default;
};

enum class AttackKind : std::uint8_t { CorruptDecisionVar, CorruptLoopCounter, CorruptCodePointer };

std::string_view attack_kind_name(AttackKind k);
std::optional<AttackKind> attack_kind_from_name(std::string_view s);

struct AttackTrigger {
  enum class On : std::uint8_t { Cycle, Pc };
  On on = On::Pc;
  std::uint64_t value = 0;

  friend bool operator==(const AttackTrigger&, const AttackTrigger&) = default;
};

// The single location an attack overwrites. Code is representable only so
// that it can be refused.
struct AttackLocation {
  enum class Space : std::uint8_t { Register, DataMemory, CodeMemory };
  Space space = Space::Register;
  std::uint32_t index = 0;  // register index, data word index, or code address

  friend bool operator==(const AttackLocation&, const AttackLocation&) = default;
};

// Fires once, immediately before the instruction selected by `trigger`
// executes (the first time its pc is reached, or at that cycle).
struct AttackSpec {
  AttackKind kind = AttackKind::CorruptDecisionVar;
  AttackTrigger trigger;
  AttackLocation target;
  Word value = 0;

  friend bool operator==(const AttackSpec&, const AttackSpec&) = default;
};

class AttackRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RunawayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::uint64_t cycle_cap = 1'000'000;
  std::size_t data_words = 4096;
};

using TraceObserver = std::function<void(const TraceEvent&)>;

// Writes the attack's value into its target location. Code memory (and any
// out-of-range location) is refused with AttackRejected.
MachineState inject(MachineState state, const AttackSpec& attack);

// Executes `p` with `input` copied to data words [0, input.size()).
// `observer`, when set, sees every event as it is retired; it has no way to
// influence execution. Throws RunawayError once cycle_cap events have been
// retired without reaching halt or a fault, std::invalid_argument when the
// input does not fit in data memory, and AttackRejected for a code target.
Trace run(const Program& p, std::span<const Word> input, const std::optional<AttackSpec>& attack = std::nullopt,
          const RunOptions& options = {}, const TraceObserver& observer = {});

}  // namespace cfattest
