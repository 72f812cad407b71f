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
#include <iosfwd>
#include <string>
#include <vector>

#include "cfattest/attestation.hpp"
#include "cfattest/hash_engine.hpp"
#include "json.hpp"

namespace cfattest {

using Json = nlohmann::ordered_json;

// All decoders throw DecodeError with the offending field named.

Json program_to_json(const Program& p);
Program program_from_json(const Json& j);

Json cfg_to_json(const Cfg& cfg);

Json trace_event_to_json(const TraceEvent& ev);
TraceEvent trace_event_from_json(const Json& j);
// Header line (program id, input) followed by one line per event.
void write_trace_jsonl(std::ostream& out, const Trace& t);
Trace read_trace_jsonl(std::istream& in);

Json attack_to_json(const AttackSpec& a);
AttackSpec attack_from_json(const Json& j);

Json metadata_to_json(const Metadata& l);
Metadata metadata_from_json(const Json& j);

Json program_path_to_json(const ProgramPath& p);
ProgramPath program_path_from_json(const Json& j);

Json challenge_to_json(const Challenge& c);
Challenge challenge_from_json(const Json& j);

Json report_to_json(const Report& r);
Report report_from_json(const Json& j);

Json annotated_to_json(const AnnotatedEvent& ev);

Json absorb_result_to_json(const AbsorbResult& r);

// Parses text into JSON, wrapping parser exceptions as DecodeError.
Json parse_json(std::string_view text);

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(std::string_view hex, std::string_view field) {
  Bytes b;
  try {
    b = from_hex(hex);
  } catch (const std::exception&) {
    throw DecodeError(std::string(field) + ": not lowercase hex");
  }
  if (b.size() != N) throw DecodeError(std::string(field) + ": expected " + std::to_string(N) + " bytes");
  std::array<std::uint8_t, N> out;
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

}  // namespace cfattest
