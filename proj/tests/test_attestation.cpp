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

#include <filesystem>

#include "cfattest/attestation.hpp"
#include "cfattest/serialize.hpp"
#include "corpus.hpp"
#include "oracles.hpp"

namespace cfattest {
namespace {

using testing::corpus_cases;
using testing::load_corpus_program;

SigningKey test_key(std::uint8_t fill = 7) {
  Seed seed;
  seed.fill(fill);
  return SigningKey::from_seed(seed);
}

struct Setup {
  Program p;
  Cfg cfg;
  Challenge c;
};

Setup setup(const std::string& stem, std::vector<Word> input) {
  auto p = load_corpus_program(stem);
  auto cfg = build_cfg(p);
  return {p, cfg, make_challenge(p.id, std::move(input))};
}

AttackSpec attack(AttackKind kind, Addr at_pc, AttackLocation::Space space, std::uint32_t index, Word value) {
  AttackSpec a;
  a.kind = kind;
  a.trigger = AttackTrigger{AttackTrigger::On::Pc, at_pc};
  a.target = AttackLocation{space, index};
  a.value = value;
  return a;
}

TEST(Keys, SeedDeterminesKeyAndSignatureVerifies) {
  auto k = test_key();
  auto k2 = test_key();
  EXPECT_EQ(k.verify_key().bytes(), k2.verify_key().bytes());
  Bytes msg{1, 2, 3};
  auto sig = k.sign(msg);
  EXPECT_TRUE(k.verify_key().verify(msg, sig));
  msg[0] ^= 1;
  EXPECT_FALSE(k.verify_key().verify(msg, sig));
  EXPECT_FALSE(test_key(8).verify_key().verify(Bytes{1, 2, 3}, sig));
}

// RFC 8032 test vector 1 (empty message).
TEST(Keys, Rfc8032Vector) {
  auto seed = fixed_from_hex<32>("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60", "seed");
  auto k = SigningKey::from_seed(seed);
  EXPECT_EQ(to_hex(k.verify_key().bytes()), "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
  EXPECT_EQ(to_hex(k.sign({})),
            "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e06522490155"
            "5fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b");
}

TEST(Canonical, EmptyMetadataIs106Bytes) {
  ProgramPath empty;
  Nonce zero{};
  auto bytes = canonical_serialize(empty, zero);
  EXPECT_EQ(bytes.size(), 106u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 6), "LOFAT1");
}

TEST(Canonical, RoundTripAndStrictness) {
  auto s = setup("nested", {4, 3, 1, 4, 2});
  auto r = prover_attest(s.p, s.c, test_key());
  auto bytes = canonical_serialize(r.path, r.nonce);
  auto [path, nonce] = parse_canonical(bytes);
  EXPECT_EQ(path, r.path);
  EXPECT_EQ(nonce, r.nonce);
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(parse_canonical(longer), DecodeError);
  auto shorter = bytes;
  shorter.pop_back();
  EXPECT_THROW(parse_canonical(shorter), DecodeError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(parse_canonical(magic), DecodeError);
}

TEST(ProgramHash, CoversListingAndEntry) {
  auto p = load_corpus_program("diamond");
  auto h = program_hash(p);
  auto q = p;
  q.code[1].imm += 1;
  EXPECT_NE(program_hash(q), h);
  auto e = p;
  e.entry_point += 4;
  EXPECT_NE(program_hash(e), h);
}

TEST(Attest, HonestCorpusAccepted) {
  auto sk = test_key();
  for (const auto& c : corpus_cases()) {
    auto s = setup(c.program, c.input);
    auto r = prover_attest(s.p, s.c, sk);
    auto v = verify(r, s.c, sk.verify_key(), s.p, s.cfg);
    EXPECT_TRUE(v.accepted) << c.program << ": " << v.detail;
    EXPECT_TRUE(v.findings.empty());
  }
}

TEST(Attest, WrongProgramThrows) {
  auto s = setup("diamond", {1, 1});
  s.c.program_id = "pump";
  EXPECT_THROW(prover_attest(s.p, s.c, test_key()), AttestError);
}

TEST(Verify, ProgramMismatch) {
  auto sk = test_key();
  auto s = setup("diamond", {1, 1});
  auto r = prover_attest(s.p, s.c, sk);
  auto other = s.p;
  other.code[2].imm = 9;
  auto v = verify(r, s.c, sk.verify_key(), other, build_cfg(other));
  EXPECT_EQ(v.reason, RejectReason::ProgramMismatch);
}

TEST(Verify, WrongEchoedNonceIsStale) {
  auto sk = test_key();
  auto s = setup("diamond", {1, 1});
  auto r = prover_attest(s.p, s.c, sk);
  auto fresh = s.c;
  fresh.nonce = random_nonce();
  auto v = verify(r, fresh, sk.verify_key(), s.p, s.cfg);
  EXPECT_EQ(v.reason, RejectReason::StaleNonce);
}

TEST(Verify, ForgedNonceFailsSignature) {
  auto sk = test_key();
  auto s = setup("diamond", {1, 1});
  auto r = prover_attest(s.p, s.c, sk);
  auto fresh = s.c;
  fresh.nonce = random_nonce();
  r.nonce = fresh.nonce;
  EXPECT_EQ(verify(r, fresh, sk.verify_key(), s.p, s.cfg).reason, RejectReason::BadSignature);
}

TEST(Verify, WrongKeyFailsSignature) {
  auto s = setup("diamond", {1, 1});
  auto r = prover_attest(s.p, s.c, test_key());
  EXPECT_EQ(verify(r, s.c, test_key(9).verify_key(), s.p, s.cfg).reason, RejectReason::BadSignature);
}

TEST(Verify, EveryByteMutationOfSignedMaterialRejected) {
  auto sk = test_key();
  auto s = setup("diamond", {3, 0, 1, 1});
  auto r = prover_attest(s.p, s.c, sk);
  auto bytes = canonical_serialize(r.path, r.nonce);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto m = bytes;
    m[i] ^= 0x01;
    Report forged = r;
    try {
      auto [path, nonce] = parse_canonical(m);
      forged.path = path;
      forged.nonce = nonce;
    } catch (const DecodeError&) {
      continue;  // unparseable is a Malformed rejection
    }
    EXPECT_FALSE(verify(forged, s.c, sk.verify_key(), s.p, s.cfg).accepted) << "byte " << i;
  }
  for (std::size_t i = 0; i < r.signature.size(); ++i) {
    Report forged = r;
    forged.signature[i] ^= 0x80;
    EXPECT_EQ(verify(forged, s.c, sk.verify_key(), s.p, s.cfg).reason, RejectReason::BadSignature);
  }
}

TEST(NonceStoreTest, SingleUse) {
  auto sk = test_key();
  auto s = setup("diamond", {1, 1});
  NonceStore store;
  store.issue(s.c.nonce);
  auto r = prover_attest(s.p, s.c, sk);
  EXPECT_TRUE(verify(r, s.c, sk.verify_key(), s.p, s.cfg, {}, &store).accepted);
  EXPECT_TRUE(store.used(s.c.nonce));
  EXPECT_EQ(verify(r, s.c, sk.verify_key(), s.p, s.cfg, {}, &store).reason, RejectReason::StaleNonce);
}

TEST(NonceStoreTest, UnissuedNonceRejected) {
  auto sk = test_key();
  auto s = setup("diamond", {1, 1});
  NonceStore store;
  auto r = prover_attest(s.p, s.c, sk);
  EXPECT_EQ(verify(r, s.c, sk.verify_key(), s.p, s.cfg, {}, &store).reason, RejectReason::StaleNonce);
}

TEST(NonceStoreTest, PersistsAcrossInstances) {
  auto path = std::filesystem::temp_directory_path() / "cfattest_nonce_store_test.json";
  std::filesystem::remove(path);
  auto n = random_nonce();
  {
    NonceStore a(path);
    a.issue(n);
  }
  {
    NonceStore b(path);
    EXPECT_TRUE(b.issued(n));
    EXPECT_TRUE(b.consume(n));
  }
  NonceStore c(path);
  EXPECT_FALSE(c.consume(n));
  std::filesystem::remove(path);
}

struct AttackCase {
  std::string program;
  std::vector<Word> input;
  AttackSpec attack;
  std::vector<RejectReason> expected;  // exact findings
};

std::vector<AttackCase> attack_cases() {
  using S = AttackLocation::Space;
  using K = AttackKind;
  using R = RejectReason;
  return {
      // Class 1: decision variables.
      {"diamond", {3, 0, 1, 1}, attack(K::CorruptDecisionVar, 0x118, S::Register, 4, 1), {R::AuthenticatorMismatch, R::MetadataMismatch}},
      {"pump", {1, 1234, 4, 0}, attack(K::CorruptDecisionVar, 0x10c, S::DataMemory, 3, 1), {R::AuthenticatorMismatch, R::MetadataMismatch}},
      // Class 2: loop counters only change the counts.
      {"diamond", {4, 0, 1, 1, 0}, attack(K::CorruptLoopCounter, 0x110, S::Register, 2, 2), {R::MetadataMismatch}},
      {"pump", {1234, 1234, 4, 0}, attack(K::CorruptLoopCounter, 0x118, S::Register, 7, 2), {R::MetadataMismatch}},
      {"dispatch", {5, 0, 1, 2, 0, 1}, attack(K::CorruptLoopCounter, 0x124, S::Register, 2, 3), {R::MetadataMismatch}},
      {"recursion", {5}, attack(K::CorruptLoopCounter, 0x104, S::Register, 1, 3), {R::MetadataMismatch}},
      // Class 3: code pointers.
      {"dispatch", {5, 0, 1, 2, 0, 1}, attack(K::CorruptCodePointer, 0x130, S::Register, 6, 0x15c), {}},
      {"pump", {1, 1234, 4, 0}, attack(K::CorruptCodePointer, 0x150, S::Register, 16, 0x114), {}},
      {"recursion", {5}, attack(K::CorruptCodePointer, 0x130, S::DataMemory, 204, 0x10c), {}},
  };
}

TEST(Verify, AttackMatrixDetected) {
  auto sk = test_key();
  for (const auto& ac : attack_cases()) {
    auto s = setup(ac.program, ac.input);
    AttestOptions opts;
    opts.attack = ac.attack;
    auto r = prover_attest(s.p, s.c, sk, opts);
    auto v = verify(r, s.c, sk.verify_key(), s.p, s.cfg);
    EXPECT_FALSE(v.accepted) << ac.program << " " << attack_kind_name(ac.attack.kind);
    if (!ac.expected.empty()) {
      EXPECT_EQ(v.findings, ac.expected) << ac.program << " " << attack_kind_name(ac.attack.kind);
    }
  }
}

TEST(Verify, RogueDispatchTargetFailsStructure) {
  auto sk = test_key();
  auto s = setup("dispatch", {5, 0, 1, 2, 0, 1});
  AttestOptions opts;
  opts.attack = attack(AttackKind::CorruptCodePointer, 0x130, AttackLocation::Space::Register, 6, 0x15c);
  auto v = verify(prover_attest(s.p, s.c, sk, opts), s.c, sk.verify_key(), s.p, s.cfg);
  EXPECT_EQ(v.reason, RejectReason::InvalidLoopPath) << v.detail;
}

}  // namespace
}  // namespace cfattest
