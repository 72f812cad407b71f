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
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cfattest/common.hpp"

namespace cfattest {

inline constexpr Addr kBaseAddress = 0x100;
inline constexpr Addr kWordSize = 4;
inline constexpr std::uint8_t kGeneralRegisters = 16;
// Index of the link register `ra` in the register file.
inline constexpr std::uint8_t kLinkRegister = 16;
inline constexpr std::size_t kRegisterFileSize = kGeneralRegisters + 1;

enum class Kind : std::uint8_t {
  Alu,
  Load,
  Store,
  CondBranch,
  DirectJump,
  LinkingJump,
  IndirectJump,
  LinkingIndirectJump,
  Return,
  Halt,
};

enum class Opcode : std::uint8_t {
  Add, Sub, Addi, Li, Mv,
  Ld, St,
  Beq, Bne, Blt,
  J, Jal, Jr, Jalr, Ret,
  Halt,
};

Kind kind_of(Opcode op);
std::string_view mnemonic_of(Opcode op);
std::optional<Opcode> opcode_from_mnemonic(std::string_view m);

constexpr bool is_control_flow(Kind k) {
  return k == Kind::CondBranch || k == Kind::DirectJump || k == Kind::LinkingJump ||
         k == Kind::IndirectJump || k == Kind::LinkingIndirectJump || k == Kind::Return;
}

constexpr bool writes_link(Kind k) { return k == Kind::LinkingJump || k == Kind::LinkingIndirectJump; }

// Control transfers whose destination is fixed in the instruction text.
constexpr bool has_static_target(Kind k) {
  return k == Kind::CondBranch || k == Kind::DirectJump || k == Kind::LinkingJump;
}

struct Instruction {
  Opcode op = Opcode::Halt;
  std::uint8_t rd = 0;
  std::uint8_t rs1 = 0;
  std::uint8_t rs2 = 0;
  Word imm = 0;
  Addr target = 0;  // resolved absolute target for beq/bne/blt/j/jal

  Kind kind() const { return kind_of(op); }
  std::string_view mnemonic() const { return mnemonic_of(op); }

  // Canonical assembly text; label targets are rendered as hex addresses so
  // the line re-parses without a symbol table.
  std::string to_string() const;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

std::string register_name(std::uint8_t index);

struct Program {
  std::string id;
  Addr base = kBaseAddress;
  Addr entry_point = kBaseAddress;
  std::vector<Instruction> code;
  std::map<std::string, Addr> labels;

  // One past the last instruction.
  Addr end() const { return base + static_cast<Addr>(code.size()) * kWordSize; }
  bool contains(Addr a) const { return a >= base && a < end() && (a - base) % kWordSize == 0; }
  const Instruction& at(Addr a) const { return code.at((a - base) / kWordSize); }
  Addr address_of(std::size_t index) const { return base + static_cast<Addr>(index) * kWordSize; }

  friend bool operator==(const Program&, const Program&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

class InvalidProgram : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LabelResolver = std::function<std::optional<Addr>(std::string_view)>;

// Parses one instruction (no label definition, no comment). Branch targets
// and `li` immediates may be labels (looked up through `resolve`) or numeric
// literals. Throws std::invalid_argument with a short message on failure.
Instruction parse_instruction(std::string_view text, const LabelResolver& resolve);

// Two-pass assembler. The entry point is the `_start` label when present,
// otherwise the base address.
Program parse_program(std::string_view text, std::string id = "program");

// Throws InvalidProgram unless: at least one instruction, exactly one halt,
// every static branch target is an in-range instruction address, and every
// register index is valid.
void validate_program(const Program& p);

// One canonical instruction per line. Stable across parse round-trips; this
// is the text the static program hash covers.
std::string program_listing(const Program& p);

}  // namespace cfattest
