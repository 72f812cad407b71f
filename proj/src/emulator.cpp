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

#include "cfattest/emulator.hpp"

namespace cfattest {

namespace {

void check_attack_target(const AttackSpec& attack, std::size_t data_words) {
  switch (attack.target.space) {
    case AttackLocation::Space::CodeMemory:
      throw AttackRejected("code memory is not writable (" + addr_hex(attack.target.index) + ")");
    case AttackLocation::Space::Register:
      if (attack.target.index >= kRegisterFileSize) {
        throw AttackRejected("no such register: " + std::to_string(attack.target.index));
      }
      break;
    case AttackLocation::Space::DataMemory:
      if (attack.target.index >= data_words) {
        throw AttackRejected("data word " + std::to_string(attack.target.index) + " out of range");
      }
      break;
  }
}

bool trigger_matches(const AttackTrigger& t, const MachineState& s) {
  return t.on == AttackTrigger::On::Pc ? s.pc == t.value : s.cycle == t.value;
}

bool taken(const Instruction& ins, const MachineState& s) {
  Word a = s.regs[ins.rs1];
  Word b = s.regs[ins.rs2];
  switch (ins.op) {
    case Opcode::Beq: return a == b;
    case Opcode::Bne: return a != b;
    case Opcode::Blt: return a < b;
    default: return false;
  }
}

}  // namespace

std::string_view fault_name(Fault f) {
  switch (f) {
    case Fault::None: return "none";
    case Fault::PcOutOfRange: return "pc_out_of_range";
    case Fault::DataOutOfRange: return "data_out_of_range";
  }
  return "?";
}

std::string_view attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::CorruptDecisionVar: return "CorruptDecisionVar";
    case AttackKind::CorruptLoopCounter: return "CorruptLoopCounter";
    case AttackKind::CorruptCodePointer: return "CorruptCodePointer";
  }
  return "?";
}

std::optional<AttackKind> attack_kind_from_name(std::string_view s) {
  for (auto k : {AttackKind::CorruptDecisionVar, AttackKind::CorruptLoopCounter, AttackKind::CorruptCodePointer}) {
    if (attack_kind_name(k) == s) return k;
  }
  return std::nullopt;
}

MachineState inject(MachineState state, const AttackSpec& attack) {
  check_attack_target(attack, state.data_mem.size());
  if (attack.target.space == AttackLocation::Space::Register) {
    state.regs[attack.target.index] = attack.value;
  } else {
    state.data_mem[attack.target.index] = attack.value;
  }
  return state;
}

Trace run(const Program& p, std::span<const Word> input, const std::optional<AttackSpec>& attack,
          const RunOptions& options, const TraceObserver& observer) {
  validate_program(p);
  if (input.size() > options.data_words) {
    throw std::invalid_argument("input of " + std::to_string(input.size()) + " words exceeds data memory of " +
                                std::to_string(options.data_words));
  }
  if (attack) check_attack_target(*attack, options.data_words);

  Trace trace;
  trace.program_id = p.id;
  trace.input.assign(input.begin(), input.end());

  MachineState s;
  s.pc = p.entry_point;
  s.data_mem.assign(options.data_words, 0);
  std::copy(input.begin(), input.end(), s.data_mem.begin());
  bool attack_pending = attack.has_value();

  auto emit = [&](TraceEvent ev) {
    if (observer) observer(ev);
    trace.events.push_back(std::move(ev));
  };

  while (true) {
    if (s.cycle >= options.cycle_cap) {
      throw RunawayError("cycle cap of " + std::to_string(options.cycle_cap) + " exceeded");
    }
    if (!p.contains(s.pc)) {
      emit({s.cycle, s.pc, Instruction{}, false, s.pc, Fault::PcOutOfRange});
      break;
    }
    if (attack_pending && trigger_matches(attack->trigger, s)) {
      s = inject(std::move(s), *attack);
      attack_pending = false;
    }

    const Instruction& ins = p.at(s.pc);
    TraceEvent ev{s.cycle, s.pc, ins, false, s.pc + kWordSize, Fault::None};
    auto& r = s.regs;
    switch (ins.op) {
      case Opcode::Add: r[ins.rd] = r[ins.rs1] + r[ins.rs2]; break;
      case Opcode::Sub: r[ins.rd] = r[ins.rs1] - r[ins.rs2]; break;
      case Opcode::Addi: r[ins.rd] = r[ins.rs1] + ins.imm; break;
      case Opcode::Li: r[ins.rd] = ins.imm; break;
      case Opcode::Mv: r[ins.rd] = r[ins.rs1]; break;
      case Opcode::Ld:
      case Opcode::St: {
        Word index = r[ins.rs1] + ins.imm;
        if (index < 0 || static_cast<std::uint64_t>(index) >= s.data_mem.size()) {
          ev.next_pc = s.pc;
          ev.fault = Fault::DataOutOfRange;
          break;
        }
        auto& cell = s.data_mem[static_cast<std::size_t>(index)];
        if (ins.op == Opcode::Ld) {
          r[ins.rd] = cell;
        } else {
          cell = r[ins.rd];
        }
        break;
      }
      case Opcode::Beq:
      case Opcode::Bne:
      case Opcode::Blt:
        ev.taken = taken(ins, s);
        if (ev.taken) ev.next_pc = ins.target;
        break;
      case Opcode::J: ev.next_pc = ins.target; break;
      case Opcode::Jal:
        r[kLinkRegister] = static_cast<Word>(s.pc + kWordSize);
        ev.next_pc = ins.target;
        break;
      case Opcode::Jr: ev.next_pc = static_cast<Addr>(r[ins.rs1]); break;
      case Opcode::Jalr: {
        auto dest = static_cast<Addr>(r[ins.rs1]);
        r[kLinkRegister] = static_cast<Word>(s.pc + kWordSize);
        ev.next_pc = dest;
        break;
      }
      case Opcode::Ret: ev.next_pc = static_cast<Addr>(r[kLinkRegister]); break;
      case Opcode::Halt: ev.next_pc = s.pc; break;
    }

    bool stop = ins.op == Opcode::Halt || ev.fault != Fault::None;
    s.pc = ev.next_pc;
    ++s.cycle;
    emit(std::move(ev));
    if (stop) break;
  }
  return trace;
}

}  // namespace cfattest
