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

#include "cfattest/measure.hpp"

#include <stdexcept>

namespace cfattest {

Measurer::Measurer(MonitorConfig cfg, bool record_stream)
    : cfg_(cfg),
      record_(record_stream),
      monitor_(cfg, [this](Addr src, Addr dest) {
        engine_.absorb(src, dest);
        if (record_) stream_.emplace_back(src, dest);
      }) {}

void Measurer::on_event(const TraceEvent& ev) {
  if (finished_) throw std::logic_error("Measurer::on_event after finish");
  last_cycle_ = ev.cycle;
  if (ev.fault != Fault::None) fault_pc_ = ev.pc;
  if (auto branch = filter_event(ev)) branches_.push_back(*branch);
}

ProgramPath Measurer::finish() {
  if (finished_) throw std::logic_error("Measurer::finish called twice");
  finished_ = true;
  for (const auto& a : detect_loops(branches_, cfg_.max_depth, last_cycle_)) {
    monitor_.consume(a);
    if (record_) annotated_.push_back(a);
  }
  if (fault_pc_) monitor_.mark_fault(*fault_pc_);
  return ProgramPath{engine_.finalize(), monitor_.take_metadata()};
}

ProgramPath measure(const Trace& trace, const MonitorConfig& cfg) {
  Measurer m(cfg);
  for (const auto& ev : trace.events) m.on_event(ev);
  return m.finish();
}

}  // namespace cfattest
