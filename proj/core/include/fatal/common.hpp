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


#ifndef FATAL_COMMON_HPP_
#define FATAL_COMMON_HPP_

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace fatal {

// Reference time in integer ticks. Default geometry uses d = 1000 ticks.
using Time = std::int64_t;

// Local clock time in micro-ticks: one tick at rate 1 accumulates kLocalScale.
using LocalTime = std::int64_t;

using NodeId = int;

inline constexpr Time kNever = std::numeric_limits<Time>::max() / 4;
inline constexpr LocalTime kLocalScale = 1'000'000;
inline constexpr int kMaxNodes = 32;

struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an engine invariant breaks; indicates a bug, not a protocol
// property violation.
struct SimulationInvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContainmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fatal

#endif  // FATAL_COMMON_HPP_
