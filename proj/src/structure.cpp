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

#include "cfattest/structure.hpp"

#include <algorithm>
#include <map>

namespace cfattest {

std::string_view path_verdict_name(PathVerdict v) {
  switch (v) {
    case PathVerdict::Valid: return "valid";
    case PathVerdict::Unverifiable: return "unverifiable";
    case PathVerdict::Invalid: return "invalid";
  }
  return "?";
}

bool StructuralReport::has_invalid() const {
  return std::any_of(findings.begin(), findings.end(),
                     [](const PathFinding& f) { return f.verdict == PathVerdict::Invalid; });
}

bool StructuralReport::has_unverifiable() const {
  return std::any_of(findings.begin(), findings.end(),
                     [](const PathFinding& f) { return f.verdict == PathVerdict::Unverifiable; });
}

namespace {

// Where a decoded path handed control back: the landing address of its last
// transfer, and whether that transfer was a return out of the loop's frame.
struct Terminal {
  Addr landing = 0;
  bool via_return = false;

  friend auto operator<=>(const Terminal&, const Terminal&) = default;
};

struct Outcome {
  bool valid = false;
  bool unverifiable = false;
  std::string reason;
  std::vector<Terminal> terminals;

  void accept(std::optional<Terminal> t) {
    valid = true;
    if (t && std::find(terminals.begin(), terminals.end(), *t) == terminals.end()) terminals.push_back(*t);
  }
  void flag(std::string why) {
    unverifiable = true;
    if (reason.empty()) reason = std::move(why);
  }
  void fail(std::string why) {
    if (reason.empty()) reason = std::move(why);
  }
  PathVerdict verdict() const {
    if (valid) return PathVerdict::Valid;
    return unverifiable ? PathVerdict::Unverifiable : PathVerdict::Invalid;
  }
};

struct Walk {
  Addr pc = 0;
  std::uint32_t pos = 0;
  std::vector<Addr> stack;  // return addresses of calls made inside the path
};

class Decoder {
 public:
  Decoder(const Metadata& l, const Program& p, const Cfg& cfg, const MonitorConfig& config)
      : l_(l), p_(p), cfg_(cfg), config_(config) {}

  Outcome decode(std::size_t session, const PathId& id) {
    const auto& s = l_[session];
    Ctx c{session, s, id};
    auto loops = cfg_.loops_with_entry(s.loop_entry);
    c.strict = !loops.empty();
    for (const auto& loop : loops) {
      c.backedge_min = std::min(c.backedge_min, loop.backedge);
      c.backedge_max = std::max(c.backedge_max, loop.backedge);
    }

    Outcome out;
    if (!p_.contains(s.loop_entry)) {
      out.fail("loop entry " + addr_hex(s.loop_entry) + " is not an instruction address");
      return out;
    }
    std::vector<Addr> starts{s.loop_entry};
    if (!c.strict) {
      bool called = std::any_of(p_.code.begin(), p_.code.end(), [&](const Instruction& ins) {
        return ins.op == Opcode::Jal && ins.target == s.loop_entry;
      });
      if (!called) {
        out.fail("loop entry " + addr_hex(s.loop_entry) + " is neither a loop header nor a call target");
        return out;
      }
      // Recursion contexts also resume at the return site of the recursive call.
      for (std::size_t i = 0; i < p_.code.size(); ++i) {
        const auto& ins = p_.code[i];
        if (ins.op == Opcode::Jal && ins.target == s.loop_entry && p_.contains(p_.address_of(i + 1))) {
          starts.push_back(p_.address_of(i + 1));
        }
      }
    }
    for (Addr start : starts) step(Walk{start, 0, {}}, c, out);
    return out;
  }

 private:
  struct Ctx {
    std::size_t session;
    const LoopSession& s;
    const PathId& id;
    bool strict = false;
    Addr backedge_min = 0xFFFFFFFFu;
    Addr backedge_max = 0;
  };

  const std::vector<Terminal>& exit_terminals(std::size_t child) {
    if (auto it = exits_.find(child); it != exits_.end()) return it->second;
    std::vector<Terminal> exits;
    const auto& s = l_[child];
    for (const auto& path : s.paths) {
      auto o = decode(child, path.id);
      for (const auto& t : o.terminals) {
        bool iteration = !t.via_return && t.landing == s.loop_entry;
        if (!iteration && std::find(exits.begin(), exits.end(), t) == exits.end()) exits.push_back(t);
      }
    }
    return exits_.emplace(child, std::move(exits)).first->second;
  }

  std::vector<std::size_t> children(std::size_t session, Addr entry) const {
    std::vector<std::size_t> out;
    for (std::size_t i = session + 1; i < l_.size(); ++i) {
      if (l_[i].parent == session && l_[i].loop_entry == entry) out.push_back(i);
    }
    return out;
  }

  // Control has just reached a nested loop's entry node with bits left over.
  void suspend(const Walk& w, Addr entry, const Ctx& c, Outcome& out) {
    auto kids = children(c.session, entry);
    if (kids.empty()) {
      if (c.s.depth >= config_.max_depth) {
        out.flag("nested loop at " + addr_hex(entry) + " is deeper than the tracked depth");
      } else {
        out.fail("no session reported for nested loop at " + addr_hex(entry));
      }
      return;
    }
    for (auto kid : kids) {
      for (const auto& t : exit_terminals(kid)) {
        Walk resumed = w;
        if (t.via_return) {
          if (resumed.stack.empty() || resumed.stack.back() != t.landing) continue;
          resumed.stack.pop_back();
        }
        resumed.pc = t.landing;
        step(std::move(resumed), c, out);
      }
    }
  }

  void step(Walk w, const Ctx& c, Outcome& out) {
    const auto len = c.id.length();
    for (std::size_t guard = 0; guard < (1u << 20); ++guard) {
      if (!p_.contains(w.pc)) {
        out.fail("walk leaves the program at " + addr_hex(w.pc));
        return;
      }
      // A nested loop that ran reports its own session; one that exited at
      // once left its header bits here. Try both.
      if (w.pc != c.s.loop_entry && w.pos < len && !children(c.session, w.pc).empty()) {
        suspend(w, w.pc, c, out);
      }
      const auto& ins = p_.at(w.pc);
      const auto k = ins.kind();
      if (k == Kind::Halt) {
        if (w.pos == len) {
          out.accept(std::nullopt);
        } else {
          out.fail("bits remain when the walk reaches halt");
        }
        return;
      }
      if (!is_control_flow(k)) {
        w.pc += kWordSize;
        continue;
      }

      const bool indirect = k == Kind::IndirectJump || k == Kind::LinkingIndirectJump || k == Kind::Return;
      const std::uint32_t width = indirect ? config_.indirect_bits : 1;
      if (w.pos + width > len) {
        if (w.pos == len && len + width > config_.path_bits) {
          out.flag("path truncated at the width limit before " + addr_hex(w.pc));
        } else {
          out.fail("path ends inside the loop body at " + addr_hex(w.pc));
        }
        return;
      }

      Addr dest = 0;
      bool leaves_frame = false;
      if (indirect) {
        auto code = c.id.code_at(w.pos, width);
        if (code == 0) {
          out.flag("overflow code for indirect target at " + addr_hex(w.pc));
          return;
        }
        if (code > c.s.indirect_targets.size()) {
          out.fail("indirect code " + std::to_string(code) + " outside the target table");
          return;
        }
        dest = c.s.indirect_targets[code - 1];
        if (k == Kind::Return) {
          if (!w.stack.empty()) {
            if (w.stack.back() != dest) {
              out.fail("return at " + addr_hex(w.pc) + " to " + addr_hex(dest) + " does not match its call");
              return;
            }
            w.stack.pop_back();
          } else {
            if (!cfg_.return_sites.contains(dest)) {
              out.fail("return at " + addr_hex(w.pc) + " to " + addr_hex(dest) + " is not a return site");
              return;
            }
            leaves_frame = true;
          }
        } else if (!cfg_.address_taken.contains(dest)) {
          out.fail("indirect transfer at " + addr_hex(w.pc) + " to non-address-taken " + addr_hex(dest));
          return;
        }
      } else {
        bool bit = c.id.bit(w.pos);
        if (k == Kind::CondBranch) {
          dest = bit ? ins.target : w.pc + kWordSize;
        } else if (!bit) {
          out.fail("unconditional transfer at " + addr_hex(w.pc) + " encoded as 0");
          return;
        } else {
          dest = ins.target;
        }
      }
      w.pos += width;

      if (writes_link(k)) {
        if (!children(c.session, dest).empty()) {
          if (w.pos == len) {
            out.accept(std::nullopt);
          } else {
            suspend_call(w, dest, c, out);
          }
        }
        w.stack.push_back(w.pc + kWordSize);
      }

      if (leaves_frame) {
        if (w.pos == len) {
          out.accept(Terminal{dest, true});
        } else {
          out.fail("bits remain after returning out of the loop's function");
        }
        return;
      }

      if (!c.strict && w.pos == len) {
        out.accept(Terminal{dest, false});
        return;
      }

      const bool base = w.stack.empty();
      if (!writes_link(k) && k != Kind::Return) {
        if (base && c.strict) {
          if (dest == c.s.loop_entry) {
            if (w.pos == len) {
              out.accept(Terminal{dest, false});
            } else {
              out.fail("walk re-enters the loop entry before the path ends");
            }
            return;
          }
          if (dest < c.s.loop_entry || dest > c.backedge_max) {
            if (w.pos == len) {
              out.accept(Terminal{dest, false});
            } else {
              out.fail("walk leaves the loop body at " + addr_hex(w.pc) + " before the path ends");
            }
            return;
          }
          // Past the nearest backedge but before the farthest: either reading holds.
          if (dest > c.backedge_min && w.pos == len) out.accept(Terminal{dest, false});
        }
        if (dest < w.pc && !(base && dest == c.s.loop_entry)) {
          if (w.pos == len) {
            out.accept(std::nullopt);
            return;
          }
          suspend(w, dest, c, out);
          return;
        }
      }
      w.pc = dest;
    }
    out.fail("walk did not terminate");
  }

  // A call opened a recursion context; it returns out of the caller's frame.
  void suspend_call(const Walk& w, Addr entry, const Ctx& c, Outcome& out) {
    for (auto kid : children(c.session, entry)) {
      for (const auto& t : exit_terminals(kid)) {
        if (!t.via_return) continue;
        Walk resumed = w;
        resumed.pc = t.landing;
        if (resumed.stack.empty()) {
          // Leaving the frame that owns this loop ends the path as well.
          if (resumed.pos == c.id.length()) out.accept(Terminal{t.landing, true});
          continue;
        }
        if (resumed.stack.back() != t.landing) continue;
        resumed.stack.pop_back();
        step(std::move(resumed), c, out);
      }
    }
  }

  const Metadata& l_;
  const Program& p_;
  const Cfg& cfg_;
  const MonitorConfig& config_;
  std::map<std::size_t, std::vector<Terminal>> exits_;
};

}  // namespace

StructuralReport check_structure(const Metadata& l, const Program& p, const Cfg& cfg, const MonitorConfig& config) {
  StructuralReport report;
  Decoder d(l, p, cfg, config);
  for (std::size_t i = 0; i < l.size(); ++i) {
    const auto& s = l[i];
    if (s.is_fault_marker()) continue;
    for (const auto& path : s.paths) {
      auto o = d.decode(i, path.id);
      report.findings.push_back({i, path.id, o.verdict(), o.verdict() == PathVerdict::Valid ? "" : o.reason});
    }
  }
  return report;
}

}  // namespace cfattest
