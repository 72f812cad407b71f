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

#include "cfattest/serialize.hpp"

#include <istream>
#include <ostream>
#include <set>

namespace cfattest {

namespace {

const Json& field(const Json& j, std::string_view key) {
  if (!j.is_object()) throw DecodeError("expected an object holding '" + std::string(key) + "'");
  auto it = j.find(key);
  if (it == j.end()) throw DecodeError("missing field '" + std::string(key) + "'");
  return *it;
}

// Rejects keys outside `allowed` so every accepted document has one meaning.
void only_keys(const Json& j, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw DecodeError("expected an object");
  for (const auto& [k, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) throw DecodeError("unknown field '" + k + "'");
  }
}

std::string str(const Json& j, std::string_view key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw DecodeError("field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

bool boolean(const Json& j, std::string_view key) {
  const auto& v = field(j, key);
  if (!v.is_boolean()) throw DecodeError("field '" + std::string(key) + "' must be a boolean");
  return v.get<bool>();
}

std::uint64_t unsigned_int(const Json& v, std::string_view what) {
  if (!v.is_number_unsigned()) throw DecodeError(std::string(what) + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::uint64_t unsigned_int(const Json& j, std::string_view key, std::uint64_t max) {
  auto v = unsigned_int(field(j, key), "field '" + std::string(key) + "'");
  if (v > max) throw DecodeError("field '" + std::string(key) + "' out of range");
  return v;
}

Word word(const Json& v) {
  if (!v.is_number_integer()) throw DecodeError("expected an integer word");
  return v.get<Word>();
}

Addr addr(const Json& v, std::string_view what) {
  if (!v.is_string()) throw DecodeError(std::string(what) + " must be a hex address string");
  try {
    return parse_addr_hex(v.get<std::string>());
  } catch (const std::invalid_argument&) {
    throw DecodeError(std::string(what) + ": bad address '" + v.get<std::string>() + "'");
  }
}

Addr addr_field(const Json& j, std::string_view key) { return addr(field(j, key), key); }

const Json& array(const Json& j, std::string_view key) {
  const auto& v = field(j, key);
  if (!v.is_array()) throw DecodeError("field '" + std::string(key) + "' must be an array");
  return v;
}

Instruction instruction_from_text(const std::string& text) {
  try {
    return parse_instruction(text, [](std::string_view) { return std::nullopt; });
  } catch (const std::invalid_argument& e) {
    throw DecodeError("instruction '" + text + "': " + e.what());
  }
}

Json words_to_json(std::span<const Word> ws) {
  Json a = Json::array();
  for (auto w : ws) a.push_back(w);
  return a;
}

std::vector<Word> words_from_json(const Json& a) {
  std::vector<Word> out;
  for (const auto& v : a) out.push_back(word(v));
  return out;
}

}  // namespace

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DecodeError(std::string("invalid JSON: ") + e.what());
  }
}

Json program_to_json(const Program& p) {
  Json labels = Json::object();
  for (const auto& [name, a] : p.labels) labels[name] = addr_hex(a);
  Json code = Json::array();
  for (const auto& ins : p.code) code.push_back(ins.to_string());
  return Json{{"id", p.id},
              {"base", addr_hex(p.base)},
              {"entry_point", addr_hex(p.entry_point)},
              {"labels", labels},
              {"code", code}};
}

Program program_from_json(const Json& j) {
  only_keys(j, {"id", "base", "entry_point", "labels", "code"});
  Program p;
  p.id = str(j, "id");
  p.base = addr_field(j, "base");
  p.entry_point = addr_field(j, "entry_point");
  const auto& labels = field(j, "labels");
  if (!labels.is_object()) throw DecodeError("field 'labels' must be an object");
  for (const auto& [name, a] : labels.items()) p.labels[name] = addr(a, "label " + name);
  for (const auto& line : array(j, "code")) {
    if (!line.is_string()) throw DecodeError("code entries must be strings");
    p.code.push_back(instruction_from_text(line.get<std::string>()));
  }
  try {
    validate_program(p);
  } catch (const InvalidProgram& e) {
    throw DecodeError(e.what());
  }
  if (!p.contains(p.entry_point)) throw DecodeError("entry point outside the program");
  return p;
}

Json cfg_to_json(const Cfg& cfg) {
  Json blocks = Json::array();
  for (const auto& b : cfg.blocks) blocks.push_back({{"start", addr_hex(b.start)}, {"end", addr_hex(b.end)}});
  Json edges = Json::array();
  for (const auto& e : cfg.edges) {
    bool any = e.kind == EdgeKind::ReturnAny || e.kind == EdgeKind::IndirectAny;
    edges.push_back({{"src", addr_hex(e.src)}, {"dest", any ? "*" : addr_hex(e.dest)}, {"kind", edge_kind_name(e.kind)}});
  }
  Json loops = Json::array();
  for (const auto& l : cfg.static_loops) loops.push_back({{"entry", addr_hex(l.entry)}, {"backedge", addr_hex(l.backedge)}});
  return Json{{"blocks", blocks}, {"edges", edges}, {"static_loops", loops}};
}

Json trace_event_to_json(const TraceEvent& ev) {
  Json j{{"cycle", ev.cycle},
         {"pc", addr_hex(ev.pc)},
         {"mnemonic", ev.instr.mnemonic()},
         {"taken", ev.taken},
         {"next_pc", addr_hex(ev.next_pc)},
         {"asm", ev.instr.to_string()}};
  if (ev.fault != Fault::None) j["fault"] = fault_name(ev.fault);
  return j;
}

TraceEvent trace_event_from_json(const Json& j) {
  only_keys(j, {"cycle", "pc", "mnemonic", "taken", "next_pc", "asm", "fault"});
  TraceEvent ev;
  ev.cycle = unsigned_int(field(j, "cycle"), "cycle");
  ev.pc = addr_field(j, "pc");
  ev.taken = boolean(j, "taken");
  ev.next_pc = addr_field(j, "next_pc");
  ev.instr = instruction_from_text(str(j, "asm"));
  if (str(j, "mnemonic") != ev.instr.mnemonic()) throw DecodeError("mnemonic does not match asm");
  if (j.contains("fault")) {
    auto f = str(j, "fault");
    if (f == fault_name(Fault::PcOutOfRange)) {
      ev.fault = Fault::PcOutOfRange;
    } else if (f == fault_name(Fault::DataOutOfRange)) {
      ev.fault = Fault::DataOutOfRange;
    } else {
      throw DecodeError("unknown fault '" + f + "'");
    }
  }
  return ev;
}

void write_trace_jsonl(std::ostream& out, const Trace& t) {
  out << Json{{"program_id", t.program_id}, {"input", words_to_json(t.input)}}.dump() << '\n';
  for (const auto& ev : t.events) out << trace_event_to_json(ev).dump() << '\n';
}

Trace read_trace_jsonl(std::istream& in) {
  Trace t;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = parse_json(line);
    if (!header) {
      only_keys(j, {"program_id", "input"});
      t.program_id = str(j, "program_id");
      t.input = words_from_json(array(j, "input"));
      header = true;
      continue;
    }
    t.events.push_back(trace_event_from_json(j));
  }
  if (!header) throw DecodeError("empty trace file");
  return t;
}

Json attack_to_json(const AttackSpec& a) {
  auto space = [&] {
    switch (a.target.space) {
      case AttackLocation::Space::Register: return "register";
      case AttackLocation::Space::DataMemory: return "data";
      case AttackLocation::Space::CodeMemory: return "code";
    }
    return "?";
  }();
  return Json{{"kind", attack_kind_name(a.kind)},
              {"trigger",
               {{"on", a.trigger.on == AttackTrigger::On::Pc ? "pc" : "cycle"},
                {"value", a.trigger.on == AttackTrigger::On::Pc ? Json(addr_hex(static_cast<Addr>(a.trigger.value)))
                                                                : Json(a.trigger.value)}}},
              {"payload", {{"space", space}, {"index", a.target.index}, {"value", a.value}}}};
}

AttackSpec attack_from_json(const Json& j) {
  only_keys(j, {"kind", "trigger", "payload"});
  AttackSpec a;
  auto kind = attack_kind_from_name(str(j, "kind"));
  if (!kind) throw DecodeError("unknown attack kind '" + str(j, "kind") + "'");
  a.kind = *kind;

  const auto& trig = field(j, "trigger");
  only_keys(trig, {"on", "value"});
  auto on = str(trig, "on");
  if (on == "pc") {
    a.trigger.on = AttackTrigger::On::Pc;
    a.trigger.value = addr_field(trig, "value");
  } else if (on == "cycle") {
    a.trigger.on = AttackTrigger::On::Cycle;
    a.trigger.value = unsigned_int(field(trig, "value"), "trigger value");
  } else {
    throw DecodeError("trigger 'on' must be pc or cycle");
  }

  const auto& pay = field(j, "payload");
  only_keys(pay, {"space", "index", "value"});
  auto space = str(pay, "space");
  if (space == "register") {
    a.target.space = AttackLocation::Space::Register;
  } else if (space == "data") {
    a.target.space = AttackLocation::Space::DataMemory;
  } else if (space == "code") {
    a.target.space = AttackLocation::Space::CodeMemory;
  } else {
    throw DecodeError("payload space must be register, data or code");
  }
  a.target.index = static_cast<std::uint32_t>(unsigned_int(pay, "index", 0xFFFFFFFFu));
  a.value = word(field(pay, "value"));
  return a;
}

Json metadata_to_json(const Metadata& l) {
  Json out = Json::array();
  for (const auto& s : l) {
    Json paths = Json::array();
    for (const auto& p : s.paths) paths.push_back({{"id", p.id.to_string()}, {"count", p.count}});
    Json targets = Json::array();
    for (auto t : s.indirect_targets) targets.push_back(addr_hex(t));
    out.push_back({{"loop_entry", addr_hex(s.loop_entry)},
                   {"depth", s.depth},
                   {"parent", s.parent ? Json(*s.parent) : Json(nullptr)},
                   {"paths", paths},
                   {"indirect_targets", targets}});
  }
  return out;
}

Metadata metadata_from_json(const Json& j) {
  if (!j.is_array()) throw DecodeError("L must be an array");
  Metadata l;
  for (const auto& s : j) {
    only_keys(s, {"loop_entry", "depth", "parent", "paths", "indirect_targets"});
    LoopSession session;
    session.loop_entry = addr_field(s, "loop_entry");
    session.depth = static_cast<std::uint32_t>(unsigned_int(s, "depth", 0xFF));
    const auto& parent = field(s, "parent");
    if (!parent.is_null()) {
      auto v = unsigned_int(parent, "parent");
      if (v >= kNoParent) throw DecodeError("parent out of range");
      session.parent = static_cast<std::uint32_t>(v);
    }
    for (const auto& p : array(s, "paths")) {
      only_keys(p, {"id", "count"});
      PathCount pc;
      try {
        pc.id = PathId::from_string(str(p, "id"));
      } catch (const std::invalid_argument& e) {
        throw DecodeError(std::string("path id: ") + e.what());
      }
      pc.count = unsigned_int(field(p, "count"), "count");
      session.paths.push_back(pc);
    }
    for (const auto& t : array(s, "indirect_targets")) session.indirect_targets.push_back(addr(t, "indirect target"));
    l.push_back(std::move(session));
  }
  // Anything the canonical encoding cannot carry is rejected here too.
  auto bytes = encode_metadata(l);
  ByteReader in(bytes);
  if (decode_metadata(in) != l) throw DecodeError("L is not canonically encodable");
  return l;
}

Json program_path_to_json(const ProgramPath& p) { return Json{{"A_hex", p.a.hex()}, {"L", metadata_to_json(p.l)}}; }

ProgramPath program_path_from_json(const Json& j) {
  only_keys(j, {"A_hex", "L"});
  ProgramPath p;
  p.a.bytes = fixed_from_hex<64>(str(j, "A_hex"), "A_hex");
  p.l = metadata_from_json(field(j, "L"));
  return p;
}

Json challenge_to_json(const Challenge& c) {
  return Json{{"program_id", c.program_id}, {"input", words_to_json(c.input)}, {"nonce_hex", to_hex(c.nonce)}};
}

Challenge challenge_from_json(const Json& j) {
  only_keys(j, {"program_id", "input", "nonce_hex"});
  Challenge c;
  c.program_id = str(j, "program_id");
  c.input = words_from_json(array(j, "input"));
  c.nonce = fixed_from_hex<32>(str(j, "nonce_hex"), "nonce_hex");
  return c;
}

Json report_to_json(const Report& r) {
  return Json{{"program_id", r.program_id},
              {"program_hash_hex", to_hex(r.program_hash)},
              {"nonce_hex", to_hex(r.nonce)},
              {"A_hex", r.path.a.hex()},
              {"L", metadata_to_json(r.path.l)},
              {"sig_hex", to_hex(r.signature)}};
}

Report report_from_json(const Json& j) {
  only_keys(j, {"program_id", "program_hash_hex", "nonce_hex", "A_hex", "L", "sig_hex"});
  Report r;
  r.program_id = str(j, "program_id");
  r.program_hash = fixed_from_hex<64>(str(j, "program_hash_hex"), "program_hash_hex");
  r.nonce = fixed_from_hex<32>(str(j, "nonce_hex"), "nonce_hex");
  r.path.a.bytes = fixed_from_hex<64>(str(j, "A_hex"), "A_hex");
  r.path.l = metadata_from_json(field(j, "L"));
  r.signature = fixed_from_hex<64>(str(j, "sig_hex"), "sig_hex");
  return r;
}

Json annotated_to_json(const AnnotatedEvent& ev) {
  if (const auto* b = std::get_if<BranchEvent>(&ev)) {
    return Json{{"type", "branch"},
                {"cycle", b->cycle},
                {"src", addr_hex(b->src)},
                {"dest", addr_hex(b->dest)},
                {"kind", branch_kind_name(b->kind)},
                {"linking", b->linking},
                {"loop_depth", b->loop_depth}};
  }
  const auto& s = std::get<LoopStatusEvent>(ev);
  return Json{{"type", "loop"},
              {"cycle", s.at_cycle},
              {"status", loop_status_name(s.kind)},
              {"entry", addr_hex(s.loop.entry_addr)},
              {"backedge", addr_hex(s.loop.backedge_addr)},
              {"exit", addr_hex(s.loop.exit_addr)},
              {"depth", s.loop.depth},
              {"recursive", s.loop.recursive}};
}

Json absorb_result_to_json(const AbsorbResult& r) {
  return Json{{"max_occupancy", r.max_occupancy},
              {"overflow", r.overflow},
              {"overflowed_words", r.overflowed_words},
              {"completion_cycle", r.completion_cycle}};
}

}  // namespace cfattest
