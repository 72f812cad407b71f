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

#include <gtest/gtest.h>

#include "cfattest/cfg.hpp"
#include "cfattest/emulator.hpp"
#include "cfattest/serialize.hpp"
#include "corpus.hpp"
#include "program_gen.hpp"

namespace cfattest {
namespace {

TEST(BuildCfg, StraightLineIsOneBlockNoEdges) {
  auto cfg = build_cfg(parse_program("li r1, 1\naddi r1, r1, 2\nhalt\n"));
  ASSERT_EQ(cfg.blocks.size(), 1u);
  EXPECT_EQ(cfg.blocks[0].start, 0x100u);
  EXPECT_EQ(cfg.blocks[0].end, 0x108u);
  EXPECT_TRUE(cfg.edges.empty());
  EXPECT_TRUE(cfg.static_loops.empty());
}

bool has_edge(const Cfg& cfg, Addr src, Addr dest) {
  return std::any_of(cfg.edges.begin(), cfg.edges.end(), [&](const Edge& e) { return e.src == src && e.dest == dest; });
}

TEST(BuildCfg, DiamondBlocksLoopAndBothPaths) {
  auto cfg = build_cfg(testing::load_corpus_program("diamond"));
  std::vector<Addr> starts;
  for (const auto& b : cfg.blocks) starts.push_back(b.start);
  EXPECT_EQ(starts, (std::vector<Addr>{0x100, 0x110, 0x114, 0x11c, 0x124, 0x128, 0x130}));

  ASSERT_EQ(cfg.static_loops.size(), 1u);
  EXPECT_EQ(cfg.static_loops[0], (StaticLoop{0x110, 0x12c}));

  // Block-end edges along N2 N3 N4 N6 N2 (bold) and N2 N3 N5 N6 N2 (dashed).
  std::vector<std::pair<Addr, Addr>> bold{{0x110, 0x114}, {0x118, 0x11c}, {0x120, 0x128}, {0x12c, 0x110}};
  std::vector<std::pair<Addr, Addr>> dashed{{0x110, 0x114}, {0x118, 0x124}, {0x124, 0x128}, {0x12c, 0x110}};
  for (auto [s, d] : bold) EXPECT_TRUE(has_edge(cfg, s, d)) << addr_hex(s);
  for (auto [s, d] : dashed) EXPECT_TRUE(has_edge(cfg, s, d)) << addr_hex(s);
}

TEST(BuildCfg, CondBranchBlocksHaveTakenAndFallthrough) {
  for (const char* stem : {"diamond", "pump", "dispatch", "nested", "recursion"}) {
    auto p = testing::load_corpus_program(stem);
    auto cfg = build_cfg(p);
    for (const auto& b : cfg.blocks) {
      if (p.at(b.end).kind() != Kind::CondBranch) continue;
      int taken = 0, fall = 0;
      for (const auto& e : cfg.edges) {
        if (e.src != b.end) continue;
        taken += e.kind == EdgeKind::Taken;
        fall += e.kind == EdgeKind::Fallthrough;
      }
      EXPECT_EQ(taken, 1);
      EXPECT_EQ(fall, 1);
    }
  }
}

TEST(BuildCfg, LinkingBackwardJumpIsNotALoop) {
  auto cfg = build_cfg(parse_program("j main\nf:\n ret\nmain:\n jal f\n halt\n"));
  EXPECT_TRUE(cfg.static_loops.empty());
  EXPECT_TRUE(cfg.edges.contains({0x108, 0x104, EdgeKind::Call}));
  EXPECT_TRUE(cfg.edges.contains({0x104, 0, EdgeKind::ReturnAny}));
}

TEST(BuildCfg, IndirectEdgesAreMarked) {
  auto cfg = build_cfg(parse_program("li r1, t\njr r1\nt:\nhalt\n"));
  EXPECT_TRUE(cfg.edges.contains({0x104, 0, EdgeKind::IndirectAny}));
  EXPECT_TRUE(cfg.address_taken.contains(0x108));
}

TEST(BuildCfg, StaticLoopsAreExactlyNonLinkingBackwardTargets) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto p = parse_program(testing::generate_program(seed).source);
    auto cfg = build_cfg(p);
    std::vector<StaticLoop> want;
    for (std::size_t i = 0; i < p.code.size(); ++i) {
      const auto& ins = p.code[i];
      auto k = ins.kind();
      if ((k == Kind::CondBranch || k == Kind::DirectJump) && ins.target < p.address_of(i)) {
        want.push_back({ins.target, p.address_of(i)});
      }
    }
    auto got = cfg.static_loops;
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    EXPECT_EQ(got, want) << "seed " << seed;
  }
}

TEST(BuildCfg, TargetOutsideProgramIsInvalid) {
  Program p;
  p.code.push_back(Instruction{Opcode::J, 0, 0, 0, 0, 0x400});
  p.code.push_back(Instruction{Opcode::Halt});
  EXPECT_THROW(build_cfg(p), InvalidProgram);
}

TEST(BuildCfg, Deterministic) {
  for (const char* stem : {"diamond", "pump", "dispatch", "nested", "recursion"}) {
    auto text = testing::read_file(std::string(CFATTEST_PROGRAMS_DIR) + "/" + stem + ".s");
    auto a = cfg_to_json(build_cfg(parse_program(text))).dump();
    auto b = cfg_to_json(build_cfg(parse_program(text))).dump();
    EXPECT_EQ(a, b);
  }
}

// Attack-free direct transfers are CFG edges.
TEST(BuildCfg, SoundOverCorpusAndGeneratedPrograms) {
  auto check = [](const Program& p, const std::vector<Word>& input) {
    auto cfg = build_cfg(p);
    for (const auto& ev : run(p, input).events) {
      auto k = ev.instr.kind();
      if (!has_static_target(k)) continue;
      EXPECT_TRUE(cfg.has_direct_edge(ev.pc, ev.next_pc)) << p.id << " " << addr_hex(ev.pc);
    }
  };
  for (const auto& c : testing::corpus_cases()) check(testing::load_corpus_program(c.program), c.input);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto g = testing::generate_program(seed);
    check(parse_program(g.source), g.input);
  }
}

}  // namespace
}  // namespace cfattest
