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

#include <utility>
#include <vector>

#include "cfattest/branch_filter.hpp"
#include "cfattest/emulator.hpp"
#include "cfattest/hash_engine.hpp"
#include "cfattest/loop_monitor.hpp"

namespace cfattest {

// The measurement pair P = (A, L).
struct ProgramPath {
  Authenticator a;
  Metadata l;

  friend bool operator==(const ProgramPath&, const ProgramPath&) = default;
};

// filter -> loop detector -> loop monitor -> hash engine. Retired
// instructions are fed one at a time; branch records are buffered because a
// loop's first iteration is only recognised at its first backedge. Prover and
// verifier both measure through this class.
class Measurer {
 public:
  explicit Measurer(MonitorConfig cfg = {}, bool record_stream = false);
  Measurer(const Measurer&) = delete;
  Measurer& operator=(const Measurer&) = delete;

  void on_event(const TraceEvent& ev);
  // Runs loop detection and the monitor, closes open loops, appends a fault marker for faulted traces and
  // finalizes the hash. Call once.
  ProgramPath finish();

  // Every (src, dest) pair handed to the hash engine, in order. Only filled
  // when constructed with record_stream = true.
  const std::vector<std::pair<Addr, Addr>>& hash_stream() const { return stream_; }
  // Annotated branch/status stream, kept when record_stream = true.
  const std::vector<AnnotatedEvent>& annotated() const { return annotated_; }

 private:
  MonitorConfig cfg_;
  bool record_;
  HashEngine engine_;
  LoopMonitor monitor_;
  std::vector<BranchEvent> branches_;
  std::vector<AnnotatedEvent> annotated_;
  std::vector<std::pair<Addr, Addr>> stream_;
  std::uint64_t last_cycle_ = 0;
  std::optional<Addr> fault_pc_;
  bool finished_ = false;
};

ProgramPath measure(const Trace& trace, const MonitorConfig& cfg = {});

}  // namespace cfattest
