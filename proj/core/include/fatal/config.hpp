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


#ifndef FATAL_CONFIG_HPP_
#define FATAL_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fatal/common.hpp"
#include "fatal/constraints.hpp"

namespace fatal {

enum class InitPolicy { random, synchronized, accept };
enum class ClockPolicy { constant, random, extremes, random_extremes };
enum class DelayPolicy { random, max, min, half, random_extremes };
enum class DartsScript { off, on, periodic };
enum class RecordLevel { minimal, full };

struct FaultSpec {
  bool adaptive = false;
  int budget = 0;  // adaptive mode; defaults to f
  std::vector<NodeId> nodes;
  std::vector<std::pair<NodeId, NodeId>> channels;  // (src, dst)
  std::string strategy = "silent";
  std::map<std::string, std::string> options;
};

struct TransientReset {
  NodeId node;
  Time at;
};

struct SimConfig {
  Params params;
  bool solve_timeouts = true;
  double grid = 0;
  TimeoutAssignment timeouts;
  bool fast_rejoin = false;

  FaultSpec faults;

  ClockPolicy clocks = ClockPolicy::random;
  Time clock_segment = 0;  // mean segment length; 0 means 20 d
  DelayPolicy delays = DelayPolicy::random;

  InitPolicy init = InitPolicy::random;
  std::uint64_t seed = 1;
  std::vector<TransientReset> resets;

  bool horizon_auto = true;
  Time horizon = 0;
  int trials = 1;
  std::vector<int> ks;  // stabilization parameters reported by sweeps
  int jobs = 0;
  RecordLevel record = RecordLevel::minimal;

  DartsScript darts = DartsScript::off;
  Time darts_period = 0;

  // Solves timeouts if requested and fills derived defaults (horizon, ks).
  void resolve();
  Time d_ticks() const { return static_cast<Time>(params.d); }
};

// Parses the sectioned key = value format; unknown sections or keys throw
// ConfigError. Lines starting with '#' or ';' are comments.
SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);

// Deterministic dump of the resolved configuration, parseable again.
std::string format_config(const SimConfig& c);

std::string to_string(InitPolicy p);
std::string to_string(ClockPolicy p);
std::string to_string(DelayPolicy p);

}  // namespace fatal

#endif  // FATAL_CONFIG_HPP_
