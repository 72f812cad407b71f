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

#include "cfattest/isa.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <sstream>

namespace cfattest {

namespace {

struct OpInfo {
  Opcode op;
  std::string_view mnemonic;
  Kind kind;
};

constexpr std::array<OpInfo, 16> kOps{{
    {Opcode::Add, "add", Kind::Alu},
    {Opcode::Sub, "sub", Kind::Alu},
    {Opcode::Addi, "addi", Kind::Alu},
    {Opcode::Li, "li", Kind::Alu},
    {Opcode::Mv, "mv", Kind::Alu},
    {Opcode::Ld, "ld", Kind::Load},
    {Opcode::St, "st", Kind::Store},
    {Opcode::Beq, "beq", Kind::CondBranch},
    {Opcode::Bne, "bne", Kind::CondBranch},
    {Opcode::Blt, "blt", Kind::CondBranch},
    {Opcode::J, "j", Kind::DirectJump},
    {Opcode::Jal, "jal", Kind::LinkingJump},
    {Opcode::Jr, "jr", Kind::IndirectJump},
    {Opcode::Jalr, "jalr", Kind::LinkingIndirectJump},
    {Opcode::Ret, "ret", Kind::Return},
    {Opcode::Halt, "halt", Kind::Halt},
}};

const OpInfo& info(Opcode op) { return kOps[static_cast<std::size_t>(op)]; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_label_name(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_' || head == '.')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_' || u == '.';
  });
}

std::vector<std::string_view> split_operands(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  int bracket = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && s[i] == '[') ++bracket;
    if (i < s.size() && s[i] == ']') --bracket;
    if (i == s.size() || (s[i] == ',' && bracket == 0)) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::uint8_t parse_register(std::string_view s) {
  if (s == "ra") return kLinkRegister;
  if (s.size() >= 2 && s[0] == 'r') {
    unsigned v = 0;
    auto [p, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), v);
    if (ec == std::errc{} && p == s.data() + s.size() && v < kGeneralRegisters &&
        (s.size() == 2 || s[1] != '0')) {
      return static_cast<std::uint8_t>(v);
    }
  }
  throw std::invalid_argument("bad register '" + std::string(s) + "'");
}

std::optional<Word> parse_number(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) return std::nullopt;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  auto w = static_cast<Word>(v);
  return neg ? -w : w;
}

Word parse_immediate(std::string_view s, const LabelResolver* resolve) {
  if (auto n = parse_number(s)) return *n;
  if (resolve && is_label_name(s)) {
    if (auto a = (*resolve)(s)) return static_cast<Word>(*a);
    throw std::invalid_argument("unresolved label '" + std::string(s) + "'");
  }
  throw std::invalid_argument("bad immediate '" + std::string(s) + "'");
}

Addr parse_target(std::string_view s, const LabelResolver& resolve) {
  if (auto n = parse_number(s)) {
    if (*n < 0 || *n > 0xFFFFFFFFLL) throw std::invalid_argument("target out of range");
    return static_cast<Addr>(*n);
  }
  if (!is_label_name(s)) throw std::invalid_argument("bad branch target '" + std::string(s) + "'");
  if (auto a = resolve(s)) return *a;
  throw std::invalid_argument("unresolved label '" + std::string(s) + "'");
}

// "[rs1+imm]", "[rs1-imm]" or "[rs1]".
void parse_memory_operand(std::string_view s, Instruction& ins) {
  if (s.size() < 3 || s.front() != '[' || s.back() != ']') {
    throw std::invalid_argument("bad memory operand '" + std::string(s) + "'");
  }
  auto inner = trim(s.substr(1, s.size() - 2));
  auto pos = inner.find_first_of("+-");
  if (pos == std::string_view::npos) {
    ins.rs1 = parse_register(inner);
    ins.imm = 0;
    return;
  }
  ins.rs1 = parse_register(trim(inner.substr(0, pos)));
  auto off = parse_number(trim(inner.substr(pos + 1)));
  if (!off) throw std::invalid_argument("bad memory offset '" + std::string(s) + "'");
  ins.imm = inner[pos] == '-' ? -*off : *off;
}

void expect_operands(const std::vector<std::string_view>& ops, std::size_t n, std::string_view m) {
  if (ops.size() != n) {
    throw std::invalid_argument(std::string(m) + " expects " + std::to_string(n) + " operand(s), got " +
                                std::to_string(ops.size()));
  }
}

std::string strip_comment(std::string_view line) {
  auto hash = line.find('#');
  return std::string(trim(line.substr(0, hash)));
}

}  // namespace

Kind kind_of(Opcode op) { return info(op).kind; }

std::string_view mnemonic_of(Opcode op) { return info(op).mnemonic; }

std::optional<Opcode> opcode_from_mnemonic(std::string_view m) {
  for (const auto& i : kOps) {
    if (i.mnemonic == m) return i.op;
  }
  return std::nullopt;
}

std::string register_name(std::uint8_t index) {
  if (index == kLinkRegister) return "ra";
  return "r" + std::to_string(index);
}

std::string Instruction::to_string() const {
  std::ostringstream os;
  os << mnemonic();
  switch (op) {
    case Opcode::Add:
    case Opcode::Sub:
      os << ' ' << register_name(rd) << ", " << register_name(rs1) << ", " << register_name(rs2);
      break;
    case Opcode::Addi:
      os << ' ' << register_name(rd) << ", " << register_name(rs1) << ", " << imm;
      break;
    case Opcode::Li:
      os << ' ' << register_name(rd) << ", " << imm;
      break;
    case Opcode::Mv:
      os << ' ' << register_name(rd) << ", " << register_name(rs1);
      break;
    case Opcode::Ld:
    case Opcode::St:
      os << ' ' << register_name(rd) << ", [" << register_name(rs1) << (imm < 0 ? "-" : "+")
         << (imm < 0 ? -imm : imm) << ']';
      break;
    case Opcode::Beq:
    case Opcode::Bne:
    case Opcode::Blt:
      os << ' ' << register_name(rs1) << ", " << register_name(rs2) << ", " << addr_hex(target);
      break;
    case Opcode::J:
    case Opcode::Jal:
      os << ' ' << addr_hex(target);
      break;
    case Opcode::Jr:
    case Opcode::Jalr:
      os << ' ' << register_name(rs1);
      break;
    case Opcode::Ret:
    case Opcode::Halt:
      break;
  }
  return os.str();
}

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

Instruction parse_instruction(std::string_view text, const LabelResolver& resolve) {
  text = trim(text);
  auto space = text.find_first_of(" \t");
  auto mnem = text.substr(0, space);
  auto rest = space == std::string_view::npos ? std::string_view{} : text.substr(space + 1);
  auto op = opcode_from_mnemonic(mnem);
  if (!op) throw std::invalid_argument("unknown mnemonic '" + std::string(mnem) + "'");

  Instruction ins;
  ins.op = *op;
  auto ops = split_operands(rest);
  switch (*op) {
    case Opcode::Add:
    case Opcode::Sub:
      expect_operands(ops, 3, mnem);
      ins.rd = parse_register(ops[0]);
      ins.rs1 = parse_register(ops[1]);
      ins.rs2 = parse_register(ops[2]);
      break;
    case Opcode::Addi:
      expect_operands(ops, 3, mnem);
      ins.rd = parse_register(ops[0]);
      ins.rs1 = parse_register(ops[1]);
      ins.imm = parse_immediate(ops[2], nullptr);
      break;
    case Opcode::Li:
      expect_operands(ops, 2, mnem);
      ins.rd = parse_register(ops[0]);
      ins.imm = parse_immediate(ops[1], &resolve);
      break;
    case Opcode::Mv:
      expect_operands(ops, 2, mnem);
      ins.rd = parse_register(ops[0]);
      ins.rs1 = parse_register(ops[1]);
      break;
    case Opcode::Ld:
    case Opcode::St:
      expect_operands(ops, 2, mnem);
      ins.rd = parse_register(ops[0]);
      parse_memory_operand(ops[1], ins);
      break;
    case Opcode::Beq:
    case Opcode::Bne:
    case Opcode::Blt:
      expect_operands(ops, 3, mnem);
      ins.rs1 = parse_register(ops[0]);
      ins.rs2 = parse_register(ops[1]);
      ins.target = parse_target(ops[2], resolve);
      break;
    case Opcode::J:
    case Opcode::Jal:
      expect_operands(ops, 1, mnem);
      ins.target = parse_target(ops[0], resolve);
      break;
    case Opcode::Jr:
    case Opcode::Jalr:
      expect_operands(ops, 1, mnem);
      ins.rs1 = parse_register(ops[0]);
      break;
    case Opcode::Ret:
    case Opcode::Halt:
      expect_operands(ops, 0, mnem);
      break;
  }
  return ins;
}

Program parse_program(std::string_view text, std::string id) {
  struct Line {
    int number;
    std::string body;
  };
  std::vector<Line> lines;
  std::map<std::string, Addr> labels;

  // Pass 1: strip comments, collect labels, assign addresses.
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  Addr next = kBaseAddress;
  while (std::getline(in, raw)) {
    ++number;
    std::string body = strip_comment(raw);
    while (true) {
      auto colon = body.find(':');
      if (colon == std::string::npos) break;
      auto name = std::string(trim(std::string_view(body).substr(0, colon)));
      if (!is_label_name(name)) throw ParseError(number, "bad label '" + name + "'");
      if (opcode_from_mnemonic(name) || name == "ra") {
        throw ParseError(number, "label '" + name + "' shadows a reserved word");
      }
      if (!labels.emplace(name, next).second) throw ParseError(number, "duplicate label '" + name + "'");
      body = std::string(trim(std::string_view(body).substr(colon + 1)));
    }
    if (body.empty()) continue;
    lines.push_back({number, body});
    next += kWordSize;
  }

  Program p;
  p.id = std::move(id);
  p.labels = labels;
  LabelResolver resolve = [&labels](std::string_view name) -> std::optional<Addr> {
    auto it = labels.find(std::string(name));
    if (it == labels.end()) return std::nullopt;
    return it->second;
  };

  // Pass 2: decode.
  for (const auto& line : lines) {
    try {
      p.code.push_back(parse_instruction(line.body, resolve));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line.number, e.what());
    }
  }
  if (auto it = labels.find("_start"); it != labels.end()) p.entry_point = it->second;

  try {
    validate_program(p);
  } catch (const InvalidProgram& e) {
    throw ParseError(number, e.what());
  }
  return p;
}

void validate_program(const Program& p) {
  if (p.code.empty()) throw InvalidProgram("empty program");
  if (p.base % kWordSize != 0) throw InvalidProgram("misaligned base address");
  if (!p.contains(p.entry_point)) throw InvalidProgram("entry point outside program");
  auto halts = std::count_if(p.code.begin(), p.code.end(), [](const Instruction& i) { return i.op == Opcode::Halt; });
  if (halts != 1) throw InvalidProgram("program must contain exactly one halt, found " + std::to_string(halts));
  for (std::size_t i = 0; i < p.code.size(); ++i) {
    const auto& ins = p.code[i];
    if (ins.rd >= kRegisterFileSize || ins.rs1 >= kRegisterFileSize || ins.rs2 >= kRegisterFileSize) {
      throw InvalidProgram("bad register index at " + addr_hex(p.address_of(i)));
    }
    if (has_static_target(ins.kind()) && !p.contains(ins.target)) {
      throw InvalidProgram("branch target " + addr_hex(ins.target) + " outside program at " +
                           addr_hex(p.address_of(i)));
    }
  }
}

std::string program_listing(const Program& p) {
  std::string out;
  for (const auto& ins : p.code) {
    out += ins.to_string();
    out += '\n';
  }
  return out;
}

}  // namespace cfattest
