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


#ifndef FATAL_ENGINE_HPP_
#define FATAL_ENGINE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fatal/adversary.hpp"
#include "fatal/config.hpp"
#include "fatal/trace.hpp"

namespace fatal {

struct RunStats {
  std::uint64_t events = 0;
  std::uint64_t steps = 0;
  std::uint64_t adversary_calls = 0;
};

// Runs a resolved configuration with the strategy named in its fault spec.
ExecutionTrace run(const SimConfig& cfg, RunStats* stats = nullptr);

// Runs with a caller-owned strategy (used for recording and replay).
ExecutionTrace run(const SimConfig& cfg, AdversaryStrategy& strategy,
                   RunStats* stats = nullptr);

/**
 * Re-evaluates every recorded switch against the guard inputs reconstructed
 * from a full-level trace. Returns one line per switch that the recorded
 * inputs do not justify; empty means every switch is explained.
 */
std::vector<std::string> audit_transitions(const ExecutionTrace& trace);

}  // namespace fatal

#endif  // FATAL_ENGINE_HPP_
