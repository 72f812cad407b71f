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

#include "program_gen.hpp"

#include <random>
#include <sstream>

namespace cfattest::testing {

namespace {

constexpr int kIndirectBits = 4;
constexpr int kInputWords = 16;

struct Function {
  std::string name;
  int bits = 0;  // worst-case bits of its own branches, ret excluded
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  GeneratedProgram run(std::uint32_t path_bits) {
    budget_ = static_cast<int>(path_bits);
    std::ostringstream funcs;
    int nfuncs = pick(0, 3);
    for (int i = 0; i < nfuncs; ++i) emit_function(funcs, i);

    out_ << "_start:\n";
    block(0, 1 << 20, 4);
    out_ << "        halt\n";
    out_ << funcs.str();

    GeneratedProgram g;
    g.source = out_.str();
    for (int i = 0; i < kInputWords; ++i) g.input.push_back(pick(0, 3));
    g.loops = loops_;
    return g;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::string label() { return "L" + std::to_string(next_label_++); }

  void emit_function(std::ostringstream& o, int i) {
    Function f{"f" + std::to_string(i), 0};
    o << f.name << ":\n";
    o << "        addi r13, r13, " << pick(1, 9) << "\n";
    if (pick(0, 1)) {
      auto skip = label();
      o << "        ld   r14, [r0+" << pick(0, kInputWords - 1) << "]\n";
      o << "        beq  r14, r0, " << skip << "\n";
      o << "        addi r13, r13, 1\n";
      o << skip << ":\n";
      f.bits = 1;
    }
    o << "        ret\n";
    functions_.push_back(f);
  }

  // Emits statements whose worst-case path bits stay within `room`; returns
  // the bits used.
  int block(int depth, int room, int max_stmts) {
    int used = 0;
    int n = pick(1, max_stmts);
    for (int i = 0; i < n; ++i) used += statement(depth, room - used);
    return used;
  }

  int statement(int depth, int room) {
    int choice = pick(0, 9);
    if (choice <= 2 && depth < 3 && room >= 4) return loop(depth, room);
    if (choice <= 5 && room >= 3) return branch(depth, room);
    if (choice <= 7 && !functions_.empty()) {
      const auto& f = functions_[pick(0, static_cast<int>(functions_.size()) - 1)];
      bool indirect = pick(0, 2) == 0;
      int cost = (indirect ? kIndirectBits : 1) + f.bits + kIndirectBits;
      if (cost <= room) {
        if (indirect) {
          out_ << "        li   r10, " << f.name << "\n";
          out_ << "        jalr r10\n";
        } else {
          out_ << "        jal  " << f.name << "\n";
        }
        return cost;
      }
    }
    out_ << "        addi r11, r11, " << pick(1, 5) << "\n";
    return 0;
  }

  // if/else on an input word, possibly indexed by the innermost counter.
  int branch(int depth, int room) {
    auto other = label();
    auto join = label();
    int reg = depth > 0 ? depth : 0;
    int base = depth > 0 ? pick(0, kInputWords - 5) : pick(0, kInputWords - 1);
    out_ << "        ld   r7, [r" << reg << "+" << base << "]\n";
    out_ << "        beq  r7, r0, " << other << "\n";
    int then_bits = block(depth, (room - 2) / 2, 2);
    out_ << "        j    " << join << "\n";
    out_ << other << ":\n";
    int else_bits = block(depth, (room - 2) / 2, 2);
    out_ << join << ":\n";
    return std::max(then_bits + 2, else_bits + 1);
  }

  int loop(int depth, int room) {
    ++loops_;
    const int counter = depth + 1;  // r1..r3
    const int bound = depth + 4;    // r4..r6
    auto head = label();
    auto exit = label();
    out_ << "        li   r" << counter << ", 0\n";
    if (pick(0, 1)) {
      out_ << "        ld   r" << bound << ", [r0+" << pick(0, kInputWords - 1) << "]\n";
    } else {
      out_ << "        li   r" << bound << ", " << pick(0, 4) << "\n";
    }
    // A loop that never takes its backedge leaves one pass of its body bits
    // in the enclosing path, so its cost there is the body plus control.
    int inner_room = std::min(room, budget_) - 3;
    bool top_tested = pick(0, 1);
    bool with_break = pick(0, 3) == 0 && inner_room >= 2;
    int body_bits = 0;
    out_ << head << ":\n";
    if (top_tested) out_ << "        beq  r" << counter << ", r" << bound << ", " << exit << "\n";
    if (with_break) {
      out_ << "        ld   r8, [r" << counter << "+" << pick(0, kInputWords - 5) << "]\n";
      out_ << "        beq  r8, r0, " << exit << "\n";
      body_bits += 1;
    }
    body_bits += block(depth + 1, inner_room - body_bits, 3);
    out_ << "        addi r" << counter << ", r" << counter << ", 1\n";
    if (top_tested) {
      out_ << "        j    " << head << "\n";
    } else {
      out_ << "        blt  r" << counter << ", r" << bound << ", " << head << "\n";
    }
    out_ << exit << ":\n";
    return body_bits + 2;
  }

  std::mt19937_64 rng_;
  std::ostringstream out_;
  std::vector<Function> functions_;
  int next_label_ = 0;
  int loops_ = 0;
  int budget_ = 16;
};

}  // namespace

GeneratedProgram generate_program(std::uint64_t seed, std::uint32_t path_bits) {
  return Generator(seed).run(path_bits);
}

}  // namespace cfattest::testing
