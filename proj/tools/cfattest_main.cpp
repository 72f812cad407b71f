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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cfattest/serialize.hpp"

namespace fs = std::filesystem;
using namespace cfattest;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kSignature = 2,
  kMetadata = 3,
  kAuthenticator = 4,
  kInvalidPath = 5,
  kInternal = 6,
};

// Input files that do not parse are the caller's mistake.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + out_path);
  out << text;
}

Json load_json(const std::string& path) {
  try {
    return parse_json(slurp(path));
  } catch (const DecodeError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// `.s` files are assembled with the file stem as program id unless --id is
// given; anything else is read as program JSON.
Program load_program(const std::string& path, const std::string& id) {
  if (fs::path(path).extension() == ".s") {
    try {
      return parse_program(slurp(path), id.empty() ? fs::path(path).stem().string() : id);
    } catch (const ParseError& e) {
      throw UsageError(path + ": " + e.what());
    }
  }
  try {
    auto p = program_from_json(load_json(path));
    if (!id.empty()) p.id = id;
    return p;
  } catch (const DecodeError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

std::vector<Word> parse_input(const std::string& csv) {
  std::vector<Word> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(tok, &used, 0));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("bad input word '" + tok + "'");
    }
  }
  return out;
}

struct Config {
  std::uint32_t n = 4;
  std::uint32_t l = 16;
  std::uint32_t max_depth = 3;
  std::uint64_t cycle_cap = 1'000'000;
  std::size_t data_words = 4096;

  MonitorConfig monitor() const {
    MonitorConfig m{n, l, max_depth};
    try {
      m.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return m;
  }
  RunOptions run() const { return RunOptions{cycle_cap, data_words}; }
};

void add_monitor_flags(CLI::App* sub, Config& c) {
  sub->add_option("-n,--indirect-bits", c.n, "bits per indirect target code")->capture_default_str();
  sub->add_option("-l,--path-bits", c.l, "path id width")->capture_default_str();
  sub->add_option("--max-depth", c.max_depth, "tracked loop nesting")->capture_default_str();
}

void add_run_flags(CLI::App* sub, Config& c) {
  sub->add_option("--cycle-cap", c.cycle_cap, "runaway limit")->capture_default_str();
  sub->add_option("--data-words", c.data_words, "data memory size")->capture_default_str();
}

template <std::size_t N>
std::array<std::uint8_t, N> load_key(const std::string& path) {
  auto text = slurp(path);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  try {
    return fixed_from_hex<N>(text, path);
  } catch (const DecodeError& e) {
    throw UsageError(e.what());
  }
}

int exit_for(RejectReason r) {
  switch (r) {
    case RejectReason::MetadataMismatch: return kMetadata;
    case RejectReason::AuthenticatorMismatch: return kAuthenticator;
    case RejectReason::InvalidLoopPath: return kInvalidPath;
    default: return kSignature;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"control-flow attestation toolkit"};
  app.require_subcommand(1);
  Config cfg;

  std::string program_path, id, out_path, input_csv, attack_path, dump_path, trace_path;
  std::string challenge_path, report_path, key_path, pk_path, store_path, arrivals_path;
  bool json_out = false;

  auto* asm_cmd = app.add_subcommand("asm", "assemble a source file into program JSON");
  asm_cmd->add_option("source", program_path)->required();
  asm_cmd->add_option("--id", id, "program id (default: file stem)");
  asm_cmd->add_option("-o,--out", out_path);

  auto* cfg_cmd = app.add_subcommand("cfg", "static control-flow graph as JSON");
  cfg_cmd->add_option("program", program_path)->required();
  cfg_cmd->add_option("-o,--out", out_path);

  auto* run_cmd = app.add_subcommand("run", "execute and write the trace as JSON lines");
  run_cmd->add_option("program", program_path)->required();
  run_cmd->add_option("--id", id);
  run_cmd->add_option("-i,--input", input_csv, "comma-separated input words");
  run_cmd->add_option("--attack", attack_path, "attack spec JSON");
  run_cmd->add_option("--dump-branches", dump_path, "write annotated branch/loop events here");
  run_cmd->add_option("-o,--out", out_path);
  add_run_flags(run_cmd, cfg);
  add_monitor_flags(run_cmd, cfg);

  auto* measure_cmd = app.add_subcommand("measure", "compute (A, L) from a trace");
  measure_cmd->add_option("trace", trace_path)->required();
  measure_cmd->add_option("-o,--out", out_path);
  add_monitor_flags(measure_cmd, cfg);

  auto* challenge_cmd = app.add_subcommand("challenge", "issue a challenge with a fresh nonce");
  challenge_cmd->add_option("program", program_path)->required();
  challenge_cmd->add_option("--id", id);
  challenge_cmd->add_option("-i,--input", input_csv);
  challenge_cmd->add_option("--nonce-store", store_path, "verifier nonce store");
  challenge_cmd->add_option("-o,--out", out_path);

  auto* attest_cmd = app.add_subcommand("attest", "prover: run, measure and sign");
  attest_cmd->add_option("program", program_path)->required();
  attest_cmd->add_option("challenge", challenge_path)->required();
  attest_cmd->add_option("--id", id);
  attest_cmd->add_option("--sk", key_path, "hex seed file")->required();
  attest_cmd->add_option("--attack", attack_path);
  attest_cmd->add_option("-o,--out", out_path);
  add_run_flags(attest_cmd, cfg);
  add_monitor_flags(attest_cmd, cfg);

  auto* verify_cmd = app.add_subcommand("verify", "verifier: check a report");
  verify_cmd->add_option("report", report_path)->required();
  verify_cmd->add_option("challenge", challenge_path)->required();
  verify_cmd->add_option("--program", program_path)->required();
  verify_cmd->add_option("--id", id);
  verify_cmd->add_option("--pk", pk_path, "hex public key file")->required();
  verify_cmd->add_option("--nonce-store", store_path);
  verify_cmd->add_flag("--json", json_out, "print the verdict as JSON on stdout");
  add_run_flags(verify_cmd, cfg);
  add_monitor_flags(verify_cmd, cfg);

  std::string attack_class, trigger_pc, space = "data";
  std::uint64_t trigger_cycle = 0;
  std::uint32_t index = 0;
  std::string value_text;
  auto* inject_cmd = app.add_subcommand("inject", "write an attack spec");
  inject_cmd->add_option("--class", attack_class, "1|decision, 2|counter, 3|pointer")->required();
  auto* pc_opt = inject_cmd->add_option("--at-pc", trigger_pc, "fire before this pc executes");
  auto* cyc_opt = inject_cmd->add_option("--at-cycle", trigger_cycle, "fire at this cycle");
  pc_opt->excludes(cyc_opt);
  inject_cmd->add_option("--space", space, "register | data")->check(CLI::IsMember({"register", "data", "code"}));
  inject_cmd->add_option("--index", index, "register index (ra = 16) or data word")->required();
  inject_cmd->add_option("--value", value_text, "value or code address to write")->required();
  inject_cmd->add_option("-o,--out", out_path);

  std::size_t buffer_depth = 3;
  auto* timing_cmd = app.add_subcommand("timing", "absorb-cadence model over arrival cycles");
  timing_cmd->add_option("arrivals", arrivals_path, "JSON array of arrival cycles")->required();
  timing_cmd->add_option("-B,--buffer", buffer_depth)->capture_default_str();

  auto* keygen_cmd = app.add_subcommand("keygen", "generate an Ed25519 key pair");
  keygen_cmd->add_option("--sk", key_path, "seed output file")->required();
  keygen_cmd->add_option("--pk", pk_path, "public key output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (asm_cmd->parsed()) {
      emit(out_path, program_to_json(load_program(program_path, id)).dump(2) + "\n");
    } else if (cfg_cmd->parsed()) {
      emit(out_path, cfg_to_json(build_cfg(load_program(program_path, id))).dump(2) + "\n");
    } else if (run_cmd->parsed()) {
      auto p = load_program(program_path, id);
      std::optional<AttackSpec> attack;
      if (!attack_path.empty()) attack = attack_from_json(load_json(attack_path));
      auto trace = run(p, parse_input(input_csv), attack, cfg.run());
      std::ostringstream ss;
      write_trace_jsonl(ss, trace);
      emit(out_path, ss.str());
      if (!dump_path.empty()) {
        Measurer m(cfg.monitor(), true);
        for (const auto& ev : trace.events) m.on_event(ev);
        m.finish();
        std::ostringstream d;
        for (const auto& a : m.annotated()) d << annotated_to_json(a).dump() << '\n';
        emit(dump_path, d.str());
      }
    } else if (measure_cmd->parsed()) {
      std::ifstream in(trace_path);
      if (!in) throw UsageError("cannot open " + trace_path);
      auto trace = read_trace_jsonl(in);
      emit(out_path, program_path_to_json(measure(trace, cfg.monitor())).dump(2) + "\n");
    } else if (challenge_cmd->parsed()) {
      auto p = load_program(program_path, id);
      auto c = make_challenge(p.id, parse_input(input_csv));
      if (!store_path.empty()) NonceStore(store_path).issue(c.nonce);
      emit(out_path, challenge_to_json(c).dump(2) + "\n");
    } else if (attest_cmd->parsed()) {
      auto p = load_program(program_path, id);
      auto c = challenge_from_json(load_json(challenge_path));
      auto sk = SigningKey::from_seed(load_key<32>(key_path));
      AttestOptions opts{cfg.monitor(), cfg.run(), std::nullopt};
      if (!attack_path.empty()) opts.attack = attack_from_json(load_json(attack_path));
      emit(out_path, report_to_json(prover_attest(p, c, sk, opts)).dump(2) + "\n");
    } else if (verify_cmd->parsed()) {
      auto p = load_program(program_path, id);
      auto c = challenge_from_json(load_json(challenge_path));
      VerifyKey pk(load_key<32>(pk_path));
      auto report_text = slurp(report_path);
      Verdict v;
      try {
        auto r = report_from_json(parse_json(report_text));
        std::optional<NonceStore> store;
        if (!store_path.empty()) store.emplace(store_path);
        v = verify(r, c, pk, p, build_cfg(p), VerifyOptions{cfg.monitor(), cfg.run()}, store ? &*store : nullptr);
      } catch (const DecodeError& e) {
        v.reason = RejectReason::Malformed;
        v.findings = {RejectReason::Malformed};
        v.detail = e.what();
      }
      if (json_out) {
        Json findings = Json::array();
        for (auto f : v.findings) findings.push_back(reject_reason_name(f));
        Json paths = Json::array();
        for (const auto& f : v.structure.findings) {
          paths.push_back({{"session", f.session},
                           {"path", f.id.to_string()},
                           {"verdict", path_verdict_name(f.verdict)},
                           {"reason", f.reason}});
        }
        std::cout << Json{{"accepted", v.accepted},
                          {"reason", v.reason ? Json(reject_reason_name(*v.reason)) : Json(nullptr)},
                          {"findings", findings},
                          {"detail", v.detail},
                          {"paths", paths}}
                         .dump(2)
                  << '\n';
      }
      if (v.accepted) {
        if (!json_out) std::cout << "ACCEPT\n";
        return kOk;
      }
      std::cerr << "REJECT " << reject_reason_name(*v.reason) << ": " << v.detail << '\n';
      return exit_for(*v.reason);
    } else if (inject_cmd->parsed()) {
      AttackSpec a;
      if (attack_class == "1" || attack_class == "decision") {
        a.kind = AttackKind::CorruptDecisionVar;
      } else if (attack_class == "2" || attack_class == "counter") {
        a.kind = AttackKind::CorruptLoopCounter;
      } else if (attack_class == "3" || attack_class == "pointer") {
        a.kind = AttackKind::CorruptCodePointer;
      } else {
        throw UsageError("unknown attack class '" + attack_class + "'");
      }
      if (*pc_opt) {
        a.trigger = {AttackTrigger::On::Pc, parse_addr_hex(trigger_pc)};
      } else if (*cyc_opt) {
        a.trigger = {AttackTrigger::On::Cycle, trigger_cycle};
      } else {
        throw UsageError("one of --at-pc or --at-cycle is required");
      }
      a.target.space = space == "register"   ? AttackLocation::Space::Register
                       : space == "data"     ? AttackLocation::Space::DataMemory
                                             : AttackLocation::Space::CodeMemory;
      a.target.index = index;
      if (value_text.rfind("0x", 0) == 0) {
        a.value = parse_addr_hex(value_text);
      } else {
        auto words = parse_input(value_text);
        if (words.size() != 1) throw UsageError("--value takes one word");
        a.value = words[0];
      }
      emit(out_path, attack_to_json(a).dump(2) + "\n");
    } else if (timing_cmd->parsed()) {
      auto j = load_json(arrivals_path);
      if (!j.is_array()) throw UsageError("arrivals must be a JSON array");
      std::vector<std::uint64_t> arrivals;
      for (const auto& v : j) {
        if (!v.is_number_unsigned()) throw UsageError("arrival cycles must be non-negative integers");
        arrivals.push_back(v.get<std::uint64_t>());
      }
      try {
        std::cout << absorb_result_to_json(simulate_absorb(arrivals, buffer_depth)).dump(2) << '\n';
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    } else if (keygen_cmd->parsed()) {
      auto sk = SigningKey::generate();
      emit(key_path, to_hex(sk.seed()) + "\n");
      fs::permissions(key_path, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
      emit(pk_path, to_hex(sk.verify_key().bytes()) + "\n");
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DecodeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const AttackRejected& e) {
    std::cerr << "error: attack rejected: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
