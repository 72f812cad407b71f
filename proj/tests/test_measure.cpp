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

#include "cfattest/measure.hpp"
#include "corpus.hpp"
#include "oracles.hpp"
#include "program_gen.hpp"

namespace cfattest {
namespace {

using testing::corpus_cases;
using testing::load_corpus_program;
using testing::openssl_pair_hash;
using Pairs = std::vector<std::pair<Addr, Addr>>;

struct Recorded {
  ProgramPath path;
  Pairs stream;
  std::vector<AnnotatedEvent> annotated;
};

Recorded record(const Program& p, const std::vector<Word>& input, const MonitorConfig& cfg = {}) {
  Measurer m(cfg, true);
  run(p, input, std::nullopt, {}, [&m](const TraceEvent& ev) { m.on_event(ev); });
  Recorded r;
  r.path = m.finish();
  r.stream = m.hash_stream();
  r.annotated = m.annotated();
  return r;
}

std::vector<Word> diamond_input(std::vector<Word> flags) {
  flags.insert(flags.begin(), static_cast<Word>(flags.size()));
  return flags;
}

TEST(Measure, StraightLineHasEmptyMetadata) {
  auto p = parse_program("_start:\n li r1, 3\n addi r1, r1, 1\n halt\n", "line");
  auto r = measure(run(p, {}));
  EXPECT_TRUE(r.l.empty());
  EXPECT_EQ(r.a.bytes, openssl_pair_hash({}));
}

// Pairs read off the diamond listing for flags (0, 1, 1): bold, dashed,
// dashed, then the header exit.
TEST(Measure, DiamondAuthenticatorFromHandDerivedPairs) {
  auto r = measure(run(load_corpus_program("diamond"), diamond_input({0, 1, 1})));
  Pairs expected{{0x110, 0x114}, {0x118, 0x11c}, {0x120, 0x128}, {0x12c, 0x110},
                 {0x110, 0x114}, {0x118, 0x124}, {0x12c, 0x110}, {0x110, 0x130}};
  EXPECT_EQ(r.a.bytes, openssl_pair_hash(expected));
  ASSERT_EQ(r.l.size(), 1u);
  const auto& s = r.l[0];
  EXPECT_EQ(s.loop_entry, 0x110u);
  EXPECT_EQ(s.depth, 1u);
  EXPECT_FALSE(s.parent.has_value());
  std::vector<std::pair<std::string, std::uint64_t>> paths;
  for (const auto& pc : s.paths) paths.emplace_back(pc.id.to_string(), pc.count);
  EXPECT_EQ(paths, (std::vector<std::pair<std::string, std::uint64_t>>{{"0011", 1}, {"011", 2}, {"1", 1}}));
}

TEST(Measure, Deterministic) {
  for (const auto& c : corpus_cases()) {
    auto p = load_corpus_program(c.program);
    EXPECT_EQ(measure(run(p, c.input)), measure(run(p, c.input))) << c.program;
  }
}

TEST(Measure, ObserverAndBatchAgree) {
  for (const auto& c : corpus_cases()) {
    auto p = load_corpus_program(c.program);
    EXPECT_EQ(record(p, c.input).path, measure(run(p, c.input))) << c.program;
  }
}

// Repeating the same loop path only moves the counter.
TEST(Measure, AuthenticatorIndependentOfIterationCount) {
  auto p = load_corpus_program("diamond");
  std::optional<Authenticator> first;
  for (std::size_t k : {1u, 5u, 100u, 2000u}) {
    auto r = record(p, diamond_input(std::vector<Word>(k, 1)));
    if (!first) first = r.path.a;
    EXPECT_EQ(r.path.a, *first) << k;
    EXPECT_EQ(r.stream.size(), 4u) << k;
    ASSERT_EQ(r.path.l.size(), 1u);
    ASSERT_EQ(r.path.l[0].paths.size(), 2u);
    EXPECT_EQ(r.path.l[0].paths[0].count, k);
    EXPECT_EQ(r.path.l[0].paths[1].count, 1u);
  }
}

TEST(Measure, DifferentPathOrderChangesAuthenticator) {
  auto p = load_corpus_program("diamond");
  EXPECT_NE(measure(run(p, diamond_input({0, 1}))).a, measure(run(p, diamond_input({1, 0}))).a);
}

TEST(Measure, FaultLeavesMarker) {
  auto p = parse_program("_start:\n li r1, 0x9000\n jr r1\n halt\n", "fault");
  auto r = measure(run(p, {}));
  ASSERT_FALSE(r.l.empty());
  EXPECT_TRUE(r.l.back().is_fault_marker());
}

TEST(Measure, ConfigIsValidated) {
  EXPECT_THROW(Measurer(MonitorConfig{9, 16, 3}), std::invalid_argument);
}

struct Tally {
  std::size_t enters = 0;
  std::size_t closings = 0;  // iteration boundaries + exits
};

Tally tally(const std::vector<AnnotatedEvent>& annotated) {
  Tally t;
  for (const auto& a : annotated) {
    const auto* s = std::get_if<LoopStatusEvent>(&a);
    if (!s) continue;
    if (s->kind == LoopStatusEvent::Kind::Enter) {
      ++t.enters;
    } else {
      ++t.closings;
    }
  }
  return t;
}

void check_invariants(const Recorded& r, const std::string& what) {
  // The recorded stream is exactly what A covers.
  EXPECT_EQ(r.path.a.bytes, openssl_pair_hash(r.stream)) << what;
  auto t = tally(r.annotated);
  std::size_t sessions = 0;
  std::uint64_t counted = 0;
  for (const auto& s : r.path.l) {
    if (s.is_fault_marker()) continue;
    ++sessions;
    for (const auto& pc : s.paths) {
      EXPECT_GT(pc.count, 0u) << what;
      counted += pc.count;
    }
    // No duplicates in the first-occurrence list.
    for (std::size_t i = 0; i < s.paths.size(); ++i) {
      for (std::size_t j = i + 1; j < s.paths.size(); ++j) EXPECT_NE(s.paths[i].id, s.paths[j].id) << what;
    }
    if (s.parent) EXPECT_LT(*s.parent, sessions - 1 + 1) << what;
  }
  EXPECT_EQ(sessions, t.enters) << what;
  EXPECT_EQ(counted, t.closings) << what;
  // Every branch outside a loop goes straight into the hash.
  std::size_t outside = 0;
  for (const auto& a : r.annotated) {
    if (const auto* b = std::get_if<BranchEvent>(&a); b && b->loop_depth == 0) ++outside;
  }
  EXPECT_LE(outside, r.stream.size()) << what;
}

TEST(MeasureProperty, CountsMatchTraversalsOnCorpus) {
  for (const auto& c : corpus_cases()) {
    check_invariants(record(load_corpus_program(c.program), c.input), c.program);
  }
}

TEST(MeasureProperty, CountsMatchTraversalsOnGeneratedPrograms) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto g = testing::generate_program(seed);
    auto p = parse_program(g.source, "gen" + std::to_string(seed));
    check_invariants(record(p, g.input), "seed " + std::to_string(seed));
  }
}

// First-occurrence order of L: the emitted stream shows each new path's
// pairs in the same order as L lists the paths.
TEST(MeasureProperty, EmissionOrderMatchesMetadataOrder) {
  auto p = load_corpus_program("diamond");
  auto r = record(p, diamond_input({1, 1, 0, 1, 0}));
  ASSERT_EQ(r.path.l[0].paths.size(), 3u);
  EXPECT_EQ(r.path.l[0].paths[0].id.to_string(), "011");
  EXPECT_EQ(r.path.l[0].paths[1].id.to_string(), "0011");
  Pairs expected{{0x110, 0x114}, {0x118, 0x124}, {0x12c, 0x110}, {0x110, 0x114},
                 {0x118, 0x11c}, {0x120, 0x128}, {0x12c, 0x110}, {0x110, 0x130}};
  EXPECT_EQ(r.stream, expected);
}

}  // namespace
}  // namespace cfattest
