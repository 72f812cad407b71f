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

#include <string>
#include <vector>

#include "cfattest/cfg.hpp"
#include "cfattest/loop_monitor.hpp"

namespace cfattest {

enum class PathVerdict : std::uint8_t { Valid, Unverifiable, Invalid };

std::string_view path_verdict_name(PathVerdict v);

struct PathFinding {
  std::size_t session = 0;
  PathId id;
  PathVerdict verdict = PathVerdict::Valid;
  std::string reason;
};

struct StructuralReport {
  std::vector<PathFinding> findings;  // one per reported path

  bool has_invalid() const;
  bool has_unverifiable() const;
};

// Decodes every path id in `l` back into a walk over the program, using the
// same bit contributions the monitor applies (1 bit per conditional branch,
// jump, or direct call; n bits per indirect transfer, resolved through the
// session's target table). A path is Invalid when some step leaves the CFG,
// an indirect target is not address-taken, a return does not match its call
// or lands on a non-return-site, or the bits do not end exactly where the
// loop re-enters its entry node or leaves its body. It is Unverifiable when
// decoding hits the overflow code, a path truncated at the width limit, or a
// nested loop deeper than the tracked depth. Fault markers are skipped.
StructuralReport check_structure(const Metadata& l, const Program& p, const Cfg& cfg, const MonitorConfig& config);

}  // namespace cfattest
