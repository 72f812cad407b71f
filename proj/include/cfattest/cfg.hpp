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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cfattest/isa.hpp"

namespace cfattest {

enum class EdgeKind : std::uint8_t { Fallthrough, Taken, Call, ReturnAny, IndirectAny };

std::string_view edge_kind_name(EdgeKind k);

struct BasicBlock {
  Addr start = 0;
  Addr end = 0;  // address of the last instruction, inclusive

  friend auto operator<=>(const BasicBlock&, const BasicBlock&) = default;
};

// `dest` is meaningless for ReturnAny/IndirectAny edges and is kept at zero.
struct Edge {
  Addr src = 0;
  Addr dest = 0;
  EdgeKind kind = EdgeKind::Fallthrough;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct StaticLoop {
  Addr entry = 0;
  Addr backedge = 0;

  friend auto operator<=>(const StaticLoop&, const StaticLoop&) = default;
};

struct Cfg {
  std::vector<BasicBlock> blocks;
  std::set<Edge> edges;
  std::vector<StaticLoop> static_loops;
  // Addresses immediately after a linking instruction.
  std::set<Addr> return_sites;
  // Labelled code addresses; the admissible targets of jr/jalr.
  std::set<Addr> address_taken;
  Addr code_begin = 0;
  Addr code_end = 0;

  // True when (src, dest) is a statically resolved edge of any kind.
  bool has_direct_edge(Addr src, Addr dest) const;
  const BasicBlock* block_containing(Addr a) const;
  std::vector<StaticLoop> loops_with_entry(Addr entry) const;

  friend bool operator==(const Cfg&, const Cfg&) = default;
};

// Throws InvalidProgram when a static branch target lies outside the program.
Cfg build_cfg(const Program& p);

}  // namespace cfattest
