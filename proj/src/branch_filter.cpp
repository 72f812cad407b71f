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

#include "cfattest/branch_filter.hpp"

#include <algorithm>

namespace cfattest {

std::string_view branch_kind_name(BranchKind k) {
  switch (k) {
    case BranchKind::CondTaken: return "CondTaken";
    case BranchKind::CondNotTaken: return "CondNotTaken";
    case BranchKind::DirectJump: return "DirectJump";
    case BranchKind::IndirectJump: return "IndirectJump";
    case BranchKind::Call: return "Call";
    case BranchKind::Return: return "Return";
  }
  return "?";
}

std::string_view loop_status_name(LoopStatusEvent::Kind k) {
  switch (k) {
    case LoopStatusEvent::Kind::Enter: return "Enter";
    case LoopStatusEvent::Kind::IterationBoundary: return "IterationBoundary";
    case LoopStatusEvent::Kind::Exit: return "Exit";
  }
  return "?";
}

std::optional<BranchEvent> filter_event(const TraceEvent& ev) {
  if (ev.fault == Fault::PcOutOfRange) return std::nullopt;
  BranchEvent b;
  b.src = ev.pc;
  b.dest = ev.next_pc;
  b.cycle = ev.cycle;
  switch (ev.instr.kind()) {
    case Kind::CondBranch:
      b.kind = ev.taken ? BranchKind::CondTaken : BranchKind::CondNotTaken;
      b.dest = ev.taken ? ev.next_pc : ev.pc + kWordSize;
      break;
    case Kind::DirectJump:
      b.kind = BranchKind::DirectJump;
      break;
    case Kind::LinkingJump:
      b.kind = BranchKind::Call;
      b.linking = true;
      break;
    case Kind::IndirectJump:
      b.kind = BranchKind::IndirectJump;
      b.indirect = true;
      break;
    case Kind::LinkingIndirectJump:
      b.kind = BranchKind::Call;
      b.linking = true;
      b.indirect = true;
      break;
    case Kind::Return:
      b.kind = BranchKind::Return;
      b.indirect = true;
      break;
    default:
      return std::nullopt;
  }
  return b;
}

std::vector<BranchEvent> filter(std::span<const TraceEvent> events) {
  std::vector<BranchEvent> out;
  for (const auto& ev : events) {
    if (auto b = filter_event(ev)) out.push_back(*b);
  }
  return out;
}

std::uint32_t LoopDetector::active_depth() const { return stack_.empty() ? 0 : stack_.back().ctx.depth; }

std::uint32_t LoopDetector::reported_depth() const {
  if (stack_.empty() || stack_.back().degraded) return 0;
  return stack_.back().ctx.depth;
}

void LoopDetector::emit_status(LoopStatusEvent::Kind kind, const Active& a, std::uint64_t cycle,
                               std::vector<AnnotatedEvent>& out) const {
  if (a.degraded) return;
  out.emplace_back(LoopStatusEvent{kind, a.ctx, cycle});
}

void LoopDetector::open(Addr entry, Addr backedge, bool recursive, std::uint64_t cycle,
                        std::vector<AnnotatedEvent>& out) {
  Active a;
  a.ctx.entry_addr = entry;
  a.ctx.backedge_addr = backedge;
  a.ctx.exit_addr = backedge + kWordSize;
  a.ctx.depth = active_depth() + 1;
  a.ctx.call_depth_at_entry = call_depth_;
  a.ctx.recursive = recursive;
  a.degraded = a.ctx.depth > max_depth_;
  emit_status(LoopStatusEvent::Kind::Enter, a, cycle, out);
  stack_.push_back(a);
  if (!recursive) opened_ = a.ctx;
}

void LoopDetector::preopen(Addr entry, Addr backedge, std::uint64_t cycle, std::vector<AnnotatedEvent>& out) {
  open(entry, backedge, false, cycle, out);
  opened_.reset();
}

void LoopDetector::process(const BranchEvent& ev, std::vector<AnnotatedEvent>& out) {
  BranchEvent annotated = ev;
  annotated.loop_depth = reported_depth();
  out.emplace_back(annotated);
  opened_.reset();

  const std::int64_t cd = call_depth_;

  if (ev.kind == BranchKind::Call) {
    bool recursion_active = std::any_of(stack_.begin(), stack_.end(), [&](const Active& a) {
      return a.ctx.recursive && a.ctx.entry_addr == ev.dest;
    });
    if (!stack_.empty() && stack_.back().ctx.recursive && stack_.back().ctx.entry_addr == ev.dest) {
      emit_status(LoopStatusEvent::Kind::IterationBoundary, stack_.back(), ev.cycle, out);
    } else if (!recursion_active && !call_targets_.empty() && call_targets_.back() == ev.dest) {
      open(ev.dest, ev.src, true, ev.cycle, out);
    }
    ++call_depth_;
    call_targets_.push_back(ev.dest);
    return;
  }

  if (ev.kind == BranchKind::Return) {
    while (!stack_.empty() && stack_.back().ctx.call_depth_at_entry >= cd) {
      emit_status(LoopStatusEvent::Kind::Exit, stack_.back(), ev.cycle, out);
      stack_.pop_back();
    }
    if (!stack_.empty()) {
      const auto& top = stack_.back();
      if (top.ctx.recursive && cd > top.ctx.call_depth_at_entry && ev.dest == top.ctx.exit_addr) {
        emit_status(LoopStatusEvent::Kind::IterationBoundary, top, ev.cycle, out);
      }
    }
    --call_depth_;
    if (!call_targets_.empty()) call_targets_.pop_back();
    return;
  }

  bool boundary = false;
  while (!stack_.empty()) {
    const auto& top = stack_.back();
    if (top.ctx.recursive || top.ctx.call_depth_at_entry != cd) break;
    if (ev.dest == top.ctx.entry_addr) {
      emit_status(LoopStatusEvent::Kind::IterationBoundary, top, ev.cycle, out);
      boundary = true;
      break;
    }
    if (ev.dest < top.ctx.entry_addr || ev.dest > top.ctx.backedge_addr) {
      emit_status(LoopStatusEvent::Kind::Exit, top, ev.cycle, out);
      stack_.pop_back();
      continue;
    }
    break;
  }
  if (!boundary && ev.dest < ev.src) open(ev.dest, ev.src, false, ev.cycle, out);
}

void LoopDetector::finish(std::uint64_t at_cycle, std::vector<AnnotatedEvent>& out) {
  while (!stack_.empty()) {
    emit_status(LoopStatusEvent::Kind::Exit, stack_.back(), at_cycle, out);
    stack_.pop_back();
  }
}

std::vector<LoopOpening> find_loop_openings(std::span<const BranchEvent> events, std::uint32_t max_depth) {
  LoopDetector det(max_depth);
  std::vector<AnnotatedEvent> scratch;
  std::vector<std::int64_t> depth_at(events.size());
  std::vector<LoopOpening> openings;
  for (std::size_t j = 0; j < events.size(); ++j) {
    depth_at[j] = det.call_depth();
    scratch.clear();
    det.process(events[j], scratch);
    const auto& ctx = det.opened();
    if (!ctx) continue;

    const auto in_body = [&](Addr a) { return a >= ctx->entry_addr && a <= ctx->backedge_addr; };
    std::size_t s = j;
    while (s > 0) {
      const auto& ev = events[s - 1];
      const auto cd = depth_at[s - 1];
      if (cd < ctx->call_depth_at_entry) break;
      // Returns landing at the loop's call depth must land in the body.
      if (cd == ctx->call_depth_at_entry + 1 && ev.kind == BranchKind::Return && !in_body(ev.dest)) break;
      if (cd == ctx->call_depth_at_entry) {
        if (!in_body(ev.src) || ev.kind == BranchKind::Return || ev.dest == ctx->entry_addr) break;
        if (!ev.linking && !in_body(ev.dest)) break;
      }
      --s;
    }
    openings.push_back({s, j, ctx->entry_addr, ctx->backedge_addr});
  }
  // Outer loops open first when several start at the same event.
  std::stable_sort(openings.begin(), openings.end(), [](const LoopOpening& a, const LoopOpening& b) {
    return a.first_event != b.first_event ? a.first_event < b.first_event : a.backedge_event > b.backedge_event;
  });
  return openings;
}

std::vector<AnnotatedEvent> detect_loops(std::span<const BranchEvent> events, std::uint32_t max_depth,
                                         std::uint64_t end_cycle) {
  auto openings = find_loop_openings(events, max_depth);
  LoopDetector det(max_depth);
  std::vector<AnnotatedEvent> out;
  auto next = openings.begin();
  for (std::size_t k = 0; k < events.size(); ++k) {
    for (; next != openings.end() && next->first_event == k; ++next) {
      det.preopen(next->entry, next->backedge, events[k].cycle, out);
    }
    det.process(events[k], out);
  }
  det.finish(end_cycle, out);
  return out;
}

}  // namespace cfattest
