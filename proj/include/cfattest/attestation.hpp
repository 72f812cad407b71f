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

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cfattest/cfg.hpp"
#include "cfattest/emulator.hpp"
#include "cfattest/measure.hpp"
#include "cfattest/structure.hpp"

namespace cfattest {

using Nonce = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;
using Seed = std::array<std::uint8_t, 32>;
using PublicKey = std::array<std::uint8_t, 32>;

struct Challenge {
  std::string program_id;
  std::vector<Word> input;
  Nonce nonce{};

  friend bool operator==(const Challenge&, const Challenge&) = default;
};

// Fresh 32-byte nonce from the system CSPRNG.
Nonce random_nonce();
Challenge make_challenge(std::string program_id, std::vector<Word> input);

struct Report {
  std::string program_id;
  Digest512 program_hash{};
  Nonce nonce{};
  ProgramPath path;
  Signature signature{};

  friend bool operator==(const Report&, const Report&) = default;
};

class VerifyKey {
 public:
  explicit VerifyKey(const PublicKey& pk) : pk_(pk) {}
  bool verify(std::span<const std::uint8_t> message, const Signature& sig) const;
  const PublicKey& bytes() const { return pk_; }

 private:
  PublicKey pk_;
};

// Ed25519 signing key. Holds the 32-byte seed; exposed only for writing the
// prover's key file.
class SigningKey {
 public:
  static SigningKey from_seed(const Seed& seed);
  static SigningKey generate();

  Signature sign(std::span<const std::uint8_t> message) const;
  VerifyKey verify_key() const;
  const Seed& seed() const { return seed_; }

 private:
  SigningKey() = default;
  Seed seed_{};
  std::array<std::uint8_t, 64> expanded_{};
};

inline constexpr std::string_view kCanonicalMagic = "LOFAT1";

// "LOFAT1" || A (64 bytes) || canonical L || N (32 bytes).
Bytes canonical_serialize(const ProgramPath& path, const Nonce& nonce);
// Inverse of canonical_serialize; throws DecodeError on any malformation,
// including trailing bytes.
std::pair<ProgramPath, Nonce> parse_canonical(std::span<const std::uint8_t> bytes);

// SHA3-512 over the base address, entry point and canonical listing.
Digest512 program_hash(const Program& p);

struct AttestOptions {
  MonitorConfig monitor;
  RunOptions run;
  // Adversarial interference during the attested run.
  std::optional<AttackSpec> attack;
};

class AttestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs the program on the challenge input, measures it and signs
// canonical_serialize(P, N). Throws AttestError when the challenge names a
// different program.
Report prover_attest(const Program& p, const Challenge& c, const SigningKey& sk, const AttestOptions& options = {});

enum class RejectReason : std::uint8_t {
  Malformed,
  ProgramMismatch,
  StaleNonce,
  BadSignature,
  InvalidLoopPath,
  AuthenticatorMismatch,
  MetadataMismatch,
};

std::string_view reject_reason_name(RejectReason r);

// Issued and consumed challenge nonces, optionally persisted as JSON.
class NonceStore {
 public:
  NonceStore() = default;
  // Loads `path` if it exists; every mutation is written back to it.
  explicit NonceStore(std::filesystem::path path);

  void issue(const Nonce& n);
  // True exactly once per issued nonce.
  bool consume(const Nonce& n);
  bool issued(const Nonce& n) const { return issued_.contains(n); }
  bool used(const Nonce& n) const { return used_.contains(n); }

 private:
  void save() const;

  std::optional<std::filesystem::path> path_;
  std::set<Nonce> issued_;
  std::set<Nonce> used_;
};

struct VerifyOptions {
  MonitorConfig monitor;
  RunOptions run;
};

struct Verdict {
  bool accepted = false;
  // First failing check in order: program identity, freshness, signature,
  // structure, authenticator, metadata.
  std::optional<RejectReason> reason;
  // Every failing check that ran. Identity, freshness and signature failures
  // stop verification; structural and replay checks all run.
  std::vector<RejectReason> findings;
  std::string detail;
  StructuralReport structure;

  bool flagged(RejectReason r) const;
};

// Verifier side. `store`, when given, must have issued c.nonce and the nonce
// is consumed once the signature checks out.
Verdict verify(const Report& r, const Challenge& c, const VerifyKey& pk, const Program& p, const Cfg& cfg,
               const VerifyOptions& options = {}, NonceStore* store = nullptr);

}  // namespace cfattest
