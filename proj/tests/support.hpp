/*
 * Copyright (c) 2026, The fatal-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
*/


#ifndef FATAL_TESTS_SUPPORT_HPP_
#define FATAL_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <map>
#include <vector>

#include "fatal/config.hpp"
#include "fatal/protocol.hpp"
#include "fatal/trace.hpp"

namespace fatal::testing {

// Resolved fault-free configuration with a fixed horizon.
inline SimConfig small_config(int n = 4, int f = 1, Time horizon = 0) {
  SimConfig c;
  c.params.n = n;
  c.params.f = f;
  c.horizon_auto = horizon == 0;
  c.horizon = horizon;
  c.resolve();
  return c;
}

// Trace with every node idle in ready and the given accept switches. Each
// accept is followed by a sleep switch one tick later.
inline ExecutionTrace synth_trace(const SimConfig& cfg,
                                  const std::map<NodeId, std::vector<Time>>& acc,
                                  Time horizon) {
  ExecutionTrace tr;
  tr.config = cfg;
  tr.config.horizon = horizon;
  tr.config.horizon_auto = false;
  for (NodeId i = 0; i < cfg.params.n; ++i) {
    for (int m = 0; m < kMachineCount; ++m) {
      const std::uint8_t s =
          m == 0 ? static_cast<std::uint8_t>(CoreState::ready) : 0;
      tr.records.push_back(
          {0, i, RecordKind::state, static_cast<std::uint8_t>(m), 0, s});
    }
  }
  for (const auto& [i, ts] : acc) {
    for (Time t : ts) {
      tr.records.push_back({t, i, RecordKind::state, 0, 0,
                            static_cast<std::uint64_t>(CoreState::accept)});
      tr.records.push_back({t + 1, i, RecordKind::state, 0, 0,
                            static_cast<std::uint64_t>(CoreState::sleep)});
    }
  }
  std::stable_sort(tr.records.begin(), tr.records.end(),
                   [](const TraceRecord& a, const TraceRecord& b) {
                     return a.t < b.t;
                   });
  return tr;
}

}  // namespace fatal::testing

#endif  // FATAL_TESTS_SUPPORT_HPP_
