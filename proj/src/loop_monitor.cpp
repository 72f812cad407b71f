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

#include "cfattest/loop_monitor.hpp"

#include <stdexcept>

namespace cfattest {

void MonitorConfig::validate() const {
  if (path_bits < 1 || path_bits > PathId::kMaxBits) {
    throw std::invalid_argument("path width must be in [1, 64], got " + std::to_string(path_bits));
  }
  if (indirect_bits < 1 || indirect_bits > 8 || indirect_bits > path_bits) {
    throw std::invalid_argument("indirect code width must be in [1, min(8, path width)], got " +
                                std::to_string(indirect_bits));
  }
  if (max_depth < 1 || max_depth > 255) {
    throw std::invalid_argument("max depth must be in [1, 255], got " + std::to_string(max_depth));
  }
}

PathId PathId::from_string(std::string_view bits) {
  if (bits.size() > kMaxBits) throw std::invalid_argument("path id longer than 64 bits");
  PathId id;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("path id must be a 0/1 string");
    id.append_bit(c == '1');
  }
  return id;
}

void PathId::append_bit(bool bit) {
  if (length_ >= kMaxBits) throw std::length_error("path id full");
  bits_ = (bits_ << 1) | (bit ? 1u : 0u);
  ++length_;
}

void PathId::append_code(std::uint32_t code, std::uint32_t width) {
  for (std::uint32_t i = width; i-- > 0;) append_bit((code >> i) & 1u);
}

std::uint32_t PathId::code_at(std::uint32_t i, std::uint32_t width) const {
  std::uint32_t v = 0;
  for (std::uint32_t k = 0; k < width; ++k) v = (v << 1) | (bit(i + k) ? 1u : 0u);
  return v;
}

std::string PathId::to_string() const {
  std::string s;
  s.reserve(length_);
  for (std::uint32_t i = 0; i < length_; ++i) s.push_back(bit(i) ? '1' : '0');
  return s;
}

Bytes PathId::packed() const {
  Bytes out((length_ + 7) / 8, 0);
  for (std::uint32_t i = 0; i < length_; ++i) {
    if (bit(i)) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

PathId PathId::unpack(std::span<const std::uint8_t> bytes, std::uint32_t length) {
  if (length > kMaxBits) throw DecodeError("path id longer than 64 bits");
  if (bytes.size() != (length + 7) / 8) throw DecodeError("path id byte count mismatch");
  PathId id;
  for (std::uint32_t i = 0; i < length; ++i) id.append_bit(bytes[i / 8] & (0x80u >> (i % 8)));
  for (std::uint32_t i = length; i < bytes.size() * 8; ++i) {
    if (bytes[i / 8] & (0x80u >> (i % 8))) throw DecodeError("non-zero padding in path id");
  }
  return id;
}

std::uint64_t LoopCounterTable::count(const PathId& id) const {
  auto it = counts_.find(id);
  return it == counts_.end() ? 0 : it->second;
}

std::uint64_t LoopCounterTable::increment(const PathId& id) { return counts_[id]++; }

std::uint32_t IndirectTargetTable::encode(Addr target) {
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    if (targets_[i] == target) return static_cast<std::uint32_t>(i + 1);
  }
  if (targets_.size() >= capacity_) return 0;
  targets_.push_back(target);
  return static_cast<std::uint32_t>(targets_.size());
}

std::optional<Addr> IndirectTargetTable::decode(std::uint32_t code) const {
  if (code == 0 || code > targets_.size()) return std::nullopt;
  return targets_[code - 1];
}

void encode_metadata(const Metadata& l, Bytes& out) {
  put_u32(out, static_cast<std::uint32_t>(l.size()));
  for (const auto& s : l) {
    if (s.depth > 0xFF || s.paths.size() > 0xFFFF || s.indirect_targets.size() > 0xFF) {
      throw std::length_error("loop session exceeds encodable limits");
    }
    put_u32(out, s.loop_entry);
    put_u8(out, static_cast<std::uint8_t>(s.depth));
    put_u32(out, s.parent.value_or(kNoParent));
    put_u16(out, static_cast<std::uint16_t>(s.paths.size()));
    for (const auto& p : s.paths) {
      put_u8(out, static_cast<std::uint8_t>(p.id.length()));
      auto packed = p.id.packed();
      out.insert(out.end(), packed.begin(), packed.end());
      put_u64(out, p.count);
    }
    put_u8(out, static_cast<std::uint8_t>(s.indirect_targets.size()));
    for (auto t : s.indirect_targets) put_u32(out, t);
  }
}

Bytes encode_metadata(const Metadata& l) {
  Bytes out;
  encode_metadata(l, out);
  return out;
}

Metadata decode_metadata(ByteReader& in) {
  auto count = in.u32();
  // Every session occupies at least 12 bytes.
  if (count > in.remaining() / 12) throw DecodeError("session count exceeds input");
  Metadata l(count);
  for (auto& s : l) {
    s.loop_entry = in.u32();
    s.depth = in.u8();
    auto parent = in.u32();
    if (parent != kNoParent) s.parent = parent;
    s.paths.resize(in.u16());
    for (auto& p : s.paths) {
      auto len = in.u8();
      p.id = PathId::unpack(in.take((len + 7u) / 8u), len);
      p.count = in.u64();
    }
    s.indirect_targets.resize(in.u8());
    for (auto& t : s.indirect_targets) t = in.u32();
  }
  return l;
}

std::uint64_t memory_bits(std::uint32_t path_bits, std::uint32_t depth) {
  if (path_bits < 1 || depth < 1) throw std::invalid_argument("path width and depth must be >= 1");
  if (path_bits > 48) throw std::overflow_error("path width too large for a 64-bit bit count");
  return 8ULL * (1ULL << path_bits) * depth;
}

StepResult encode_step(PathTracker& t, const BranchEvent& ev, const MonitorConfig& cfg) {
  if (t.overflowed) return StepResult::HashDirect;
  std::uint32_t width = ev.indirect ? cfg.indirect_bits : 1;
  if (t.partial.length() + width > cfg.path_bits) {
    t.overflowed = true;
    return StepResult::HashDirect;
  }
  if (ev.indirect) {
    t.partial.append_code(t.targets.encode(ev.dest), width);
  } else {
    t.partial.append_bit(ev.kind != BranchKind::CondNotTaken);
  }
  t.buffered.emplace_back(ev.src, ev.dest);
  return StepResult::Encoded;
}

std::optional<NewPath> close_path(PathTracker& t) {
  PathId id = t.partial;
  auto pairs = std::move(t.buffered);
  t.partial = PathId{};
  t.buffered.clear();
  t.overflowed = false;
  if (t.counters.increment(id) != 0) return std::nullopt;
  t.order.push_back(id);
  return NewPath{id, std::move(pairs)};
}

LoopSession finalize_session(PathTracker& t) {
  LoopSession s;
  s.loop_entry = t.ctx.entry_addr;
  s.depth = t.ctx.depth;
  s.parent = t.parent;
  for (const auto& id : t.order) s.paths.push_back({id, t.counters.count(id)});
  s.indirect_targets = t.targets.targets();
  t.counters.clear();
  t.targets.clear();
  t.order.clear();
  t.partial = PathId{};
  t.buffered.clear();
  t.overflowed = false;
  return s;
}

LoopMonitor::LoopMonitor(MonitorConfig cfg, PairSink sink) : cfg_(cfg), sink_(std::move(sink)) { cfg_.validate(); }

void LoopMonitor::consume(const AnnotatedEvent& ev) {
  if (const auto* b = std::get_if<BranchEvent>(&ev)) {
    on_branch(*b);
  } else {
    on_status(std::get<LoopStatusEvent>(ev));
  }
}

void LoopMonitor::on_branch(const BranchEvent& ev) {
  if (ev.loop_depth == 0) {
    sink_(ev.src, ev.dest);
    return;
  }
  if (ev.loop_depth != active_.size()) throw std::logic_error("branch depth does not match active loops");
  if (encode_step(active_.back(), ev, cfg_) == StepResult::HashDirect) sink_(ev.src, ev.dest);
}

void LoopMonitor::on_status(const LoopStatusEvent& ev) {
  using K = LoopStatusEvent::Kind;
  if (ev.kind == K::Enter) {
    if (ev.loop.depth != active_.size() + 1) throw std::logic_error("loop entered at unexpected depth");
    PathTracker t;
    t.ctx = ev.loop;
    t.session_index = metadata_.size();
    if (!active_.empty()) t.parent = static_cast<std::uint32_t>(active_.back().session_index);
    t.targets = IndirectTargetTable(cfg_.indirect_capacity());
    metadata_.push_back(LoopSession{ev.loop.entry_addr, ev.loop.depth, t.parent, {}, {}});
    active_.push_back(std::move(t));
    return;
  }
  if (active_.empty() || active_.back().ctx.depth != ev.loop.depth) {
    throw std::logic_error("loop status for an inactive loop");
  }
  auto& top = active_.back();
  emit_new_path(close_path(top));
  if (ev.kind == K::Exit) {
    metadata_[top.session_index] = finalize_session(top);
    active_.pop_back();
  }
}

void LoopMonitor::emit_new_path(const std::optional<NewPath>& np) {
  if (!np) return;
  for (const auto& [src, dest] : np->pairs) sink_(src, dest);
}

void LoopMonitor::mark_fault(Addr pc) { metadata_.push_back(LoopSession{pc, 0, std::nullopt, {}, {}}); }

}  // namespace cfattest
