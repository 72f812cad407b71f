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

#include "cfattest/cfg.hpp"

#include <algorithm>

namespace cfattest {

std::string_view edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::Fallthrough: return "fallthrough";
    case EdgeKind::Taken: return "taken";
    case EdgeKind::Call: return "call";
    case EdgeKind::ReturnAny: return "return-any";
    case EdgeKind::IndirectAny: return "indirect-any";
  }
  return "?";
}

bool Cfg::has_direct_edge(Addr src, Addr dest) const {
  for (auto kind : {EdgeKind::Fallthrough, EdgeKind::Taken, EdgeKind::Call}) {
    if (edges.contains(Edge{src, dest, kind})) return true;
  }
  return false;
}

const BasicBlock* Cfg::block_containing(Addr a) const {
  auto it = std::upper_bound(blocks.begin(), blocks.end(), a,
                             [](Addr v, const BasicBlock& b) { return v < b.start; });
  if (it == blocks.begin()) return nullptr;
  --it;
  return a <= it->end ? &*it : nullptr;
}

std::vector<StaticLoop> Cfg::loops_with_entry(Addr entry) const {
  std::vector<StaticLoop> out;
  for (const auto& l : static_loops) {
    if (l.entry == entry) out.push_back(l);
  }
  return out;
}

Cfg build_cfg(const Program& p) {
  validate_program(p);

  Cfg cfg;
  cfg.code_begin = p.base;
  cfg.code_end = p.end();

  std::set<Addr> leaders{p.base, p.entry_point};
  for (std::size_t i = 0; i < p.code.size(); ++i) {
    const auto& ins = p.code[i];
    Addr a = p.address_of(i);
    auto k = ins.kind();
    if (has_static_target(k)) leaders.insert(ins.target);
    if ((is_control_flow(k) || k == Kind::Halt) && p.contains(a + kWordSize)) leaders.insert(a + kWordSize);
    if (writes_link(k) && p.contains(a + kWordSize)) cfg.return_sites.insert(a + kWordSize);
  }
  for (const auto& [name, addr] : p.labels) {
    if (p.contains(addr)) cfg.address_taken.insert(addr);
  }

  for (auto it = leaders.begin(); it != leaders.end(); ++it) {
    auto next = std::next(it);
    Addr end = (next == leaders.end() ? p.end() : *next) - kWordSize;
    cfg.blocks.push_back({*it, end});
  }

  for (const auto& block : cfg.blocks) {
    Addr a = block.end;
    const auto& ins = p.at(a);
    Addr fall = a + kWordSize;
    switch (ins.kind()) {
      case Kind::CondBranch:
        cfg.edges.insert({a, ins.target, EdgeKind::Taken});
        if (p.contains(fall)) cfg.edges.insert({a, fall, EdgeKind::Fallthrough});
        break;
      case Kind::DirectJump:
        cfg.edges.insert({a, ins.target, EdgeKind::Taken});
        break;
      case Kind::LinkingJump:
        cfg.edges.insert({a, ins.target, EdgeKind::Call});
        break;
      case Kind::IndirectJump:
      case Kind::LinkingIndirectJump:
        cfg.edges.insert({a, 0, EdgeKind::IndirectAny});
        break;
      case Kind::Return:
        cfg.edges.insert({a, 0, EdgeKind::ReturnAny});
        break;
      case Kind::Halt:
        break;
      case Kind::Alu:
      case Kind::Load:
      case Kind::Store:
        if (p.contains(fall)) cfg.edges.insert({a, fall, EdgeKind::Fallthrough});
        break;
    }
    if ((ins.kind() == Kind::CondBranch || ins.kind() == Kind::DirectJump) && ins.target < a) {
      cfg.static_loops.push_back({ins.target, a});
    }
  }
  return cfg;
}

}  // namespace cfattest
