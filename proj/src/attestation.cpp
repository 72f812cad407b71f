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

#include "cfattest/attestation.hpp"

#include <sodium.h>

#include <algorithm>
#include <fstream>

#include "json.hpp"

namespace cfattest {

namespace {

void ensure_sodium() {
  static const bool ready = [] { return sodium_init() >= 0; }();
  if (!ready) throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace

Nonce random_nonce() {
  ensure_sodium();
  Nonce n;
  randombytes_buf(n.data(), n.size());
  return n;
}

Challenge make_challenge(std::string program_id, std::vector<Word> input) {
  return Challenge{std::move(program_id), std::move(input), random_nonce()};
}

bool VerifyKey::verify(std::span<const std::uint8_t> message, const Signature& sig) const {
  ensure_sodium();
  return crypto_sign_verify_detached(sig.data(), message.data(), message.size(), pk_.data()) == 0;
}

SigningKey SigningKey::from_seed(const Seed& seed) {
  ensure_sodium();
  SigningKey k;
  k.seed_ = seed;
  PublicKey pk;
  crypto_sign_seed_keypair(pk.data(), k.expanded_.data(), seed.data());
  return k;
}

SigningKey SigningKey::generate() {
  ensure_sodium();
  Seed seed;
  randombytes_buf(seed.data(), seed.size());
  return from_seed(seed);
}

Signature SigningKey::sign(std::span<const std::uint8_t> message) const {
  Signature sig;
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), expanded_.data());
  return sig;
}

VerifyKey SigningKey::verify_key() const {
  PublicKey pk;
  crypto_sign_ed25519_sk_to_pk(pk.data(), expanded_.data());
  return VerifyKey(pk);
}

Bytes canonical_serialize(const ProgramPath& path, const Nonce& nonce) {
  Bytes out(kCanonicalMagic.begin(), kCanonicalMagic.end());
  out.insert(out.end(), path.a.bytes.begin(), path.a.bytes.end());
  encode_metadata(path.l, out);
  out.insert(out.end(), nonce.begin(), nonce.end());
  return out;
}

std::pair<ProgramPath, Nonce> parse_canonical(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  auto magic = in.take(kCanonicalMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kCanonicalMagic.begin())) throw DecodeError("bad magic");
  ProgramPath path;
  auto a = in.take(path.a.bytes.size());
  std::copy(a.begin(), a.end(), path.a.bytes.begin());
  path.l = decode_metadata(in);
  Nonce n;
  auto nb = in.take(n.size());
  std::copy(nb.begin(), nb.end(), n.begin());
  if (!in.done()) throw DecodeError("trailing bytes after nonce");
  return {std::move(path), n};
}

Digest512 program_hash(const Program& p) {
  auto listing = "base " + addr_hex(p.base) + "\nentry " + addr_hex(p.entry_point) + "\n" + program_listing(p);
  return Sha3_512::digest(std::span(reinterpret_cast<const std::uint8_t*>(listing.data()), listing.size()));
}

Report prover_attest(const Program& p, const Challenge& c, const SigningKey& sk, const AttestOptions& options) {
  if (c.program_id != p.id) {
    throw AttestError("challenge is for program '" + c.program_id + "', prover holds '" + p.id + "'");
  }
  Measurer m(options.monitor);
  run(p, c.input, options.attack, options.run, [&m](const TraceEvent& ev) { m.on_event(ev); });

  Report r;
  r.program_id = p.id;
  r.program_hash = program_hash(p);
  r.nonce = c.nonce;
  r.path = m.finish();
  r.signature = sk.sign(canonical_serialize(r.path, r.nonce));
  return r;
}

std::string_view reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::Malformed: return "Malformed";
    case RejectReason::ProgramMismatch: return "ProgramMismatch";
    case RejectReason::StaleNonce: return "StaleNonce";
    case RejectReason::BadSignature: return "BadSignature";
    case RejectReason::InvalidLoopPath: return "InvalidLoopPath";
    case RejectReason::AuthenticatorMismatch: return "AuthenticatorMismatch";
    case RejectReason::MetadataMismatch: return "MetadataMismatch";
  }
  return "?";
}

NonceStore::NonceStore(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(*path_)) return;
  std::ifstream in(*path_);
  auto j = nlohmann::json::parse(in);
  auto load = [](const nlohmann::json& arr, std::set<Nonce>& into) {
    for (const auto& h : arr) {
      auto b = from_hex(h.get<std::string>());
      if (b.size() != 32) throw DecodeError("nonce store entry is not 32 bytes");
      Nonce n;
      std::copy(b.begin(), b.end(), n.begin());
      into.insert(n);
    }
  };
  load(j.at("issued"), issued_);
  load(j.at("used"), used_);
}

void NonceStore::issue(const Nonce& n) {
  issued_.insert(n);
  save();
}

bool NonceStore::consume(const Nonce& n) {
  if (!issued_.contains(n) || used_.contains(n)) return false;
  used_.insert(n);
  save();
  return true;
}

void NonceStore::save() const {
  if (!path_) return;
  nlohmann::json j{{"issued", nlohmann::json::array()}, {"used", nlohmann::json::array()}};
  for (const auto& n : issued_) j["issued"].push_back(to_hex(n));
  for (const auto& n : used_) j["used"].push_back(to_hex(n));
  std::ofstream out(*path_);
  out << j.dump(2) << '\n';
}

bool Verdict::flagged(RejectReason r) const { return std::find(findings.begin(), findings.end(), r) != findings.end(); }

Verdict verify(const Report& r, const Challenge& c, const VerifyKey& pk, const Program& p, const Cfg& cfg,
               const VerifyOptions& options, NonceStore* store) {
  Verdict v;
  auto reject = [&v](RejectReason reason, std::string detail) {
    v.findings.push_back(reason);
    if (!v.reason) {
      v.reason = reason;
      v.detail = std::move(detail);
    }
  };

  if (r.program_id != c.program_id || c.program_id != p.id || r.program_hash != program_hash(p)) {
    reject(RejectReason::ProgramMismatch, "report is not for the challenged program binary");
    return v;
  }
  if (r.nonce != c.nonce) {
    reject(RejectReason::StaleNonce, "report echoes a nonce other than the one issued");
    return v;
  }
  if (!pk.verify(canonical_serialize(r.path, r.nonce), r.signature)) {
    reject(RejectReason::BadSignature, "signature does not verify under the prover key");
    return v;
  }
  if (store && !store->consume(c.nonce)) {
    reject(RejectReason::StaleNonce, "nonce was never issued or has already been used");
    return v;
  }

  v.structure = check_structure(r.path.l, p, cfg, options.monitor);
  if (v.structure.has_invalid()) {
    const auto& f = *std::find_if(v.structure.findings.begin(), v.structure.findings.end(),
                                  [](const PathFinding& x) { return x.verdict == PathVerdict::Invalid; });
    reject(RejectReason::InvalidLoopPath,
           "session " + std::to_string(f.session) + " path '" + f.id.to_string() + "': " + f.reason);
  }

  // Replay oracle: re-execute on the challenge input without interference.
  auto expected = measure(run(p, c.input, std::nullopt, options.run), options.monitor);
  if (r.path.a != expected.a) reject(RejectReason::AuthenticatorMismatch, "authenticator differs from replay");
  if (r.path.l != expected.l) reject(RejectReason::MetadataMismatch, "loop metadata differs from replay");

  v.accepted = !v.reason.has_value();
  return v;
}

}  // namespace cfattest
