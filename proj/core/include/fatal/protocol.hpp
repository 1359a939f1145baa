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


#ifndef FATAL_PROTOCOL_HPP_
#define FATAL_PROTOCOL_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fatal/common.hpp"
#include "fatal/constraints.hpp"

namespace fatal {

enum class Machine : std::uint8_t { core, suspect, ext, rinit, rmain, refresh };
inline constexpr int kMachineCount = 6;

enum class CoreState : std::uint8_t {
  accept,
  sleep,
  sleep_waking,
  waking,
  ready,
  propose,
  recover,
  join
};
inline constexpr int kCoreStateCount = 8;

enum class SuspectState : std::uint8_t { trust, suspect };
enum class ExtState : std::uint8_t { dormant, passive, active };
enum class InitState : std::uint8_t { wait, init };
enum class RefreshState : std::uint8_t { idle, tick };

// Resynchronization main machine codes; supp(j) is kRSupp + j.
inline constexpr std::uint8_t kRNone = 0;
inline constexpr std::uint8_t kRSuppResync = 1;
inline constexpr std::uint8_t kRResync = 2;
inline constexpr std::uint8_t kRSupp = 3;

inline bool rmain_signal_supp(std::uint8_t code) {
  return code == kRSuppResync || code >= kRSupp;
}

// Product output of a node's machines, indexed by Machine.
struct NodeOutput {
  std::array<std::uint8_t, kMachineCount> s{};

  std::uint8_t& operator[](Machine m) { return s[static_cast<int>(m)]; }
  std::uint8_t operator[](Machine m) const { return s[static_cast<int>(m)]; }
  CoreState core() const { return static_cast<CoreState>(s[0]); }
  bool operator==(const NodeOutput&) const = default;
};

// Packs and unpacks an output as a single integer for trace records.
std::uint64_t encode_output(const NodeOutput& o);
NodeOutput decode_output(std::uint64_t v);

enum class FlagFamily : std::uint8_t {
  accept,
  recover,
  propose,
  join,
  sleep_waking,
  supp
};
inline constexpr int kFlagFamilyCount = 6;

inline constexpr std::uint32_t family_bit(FlagFamily f) {
  return 1u << static_cast<int>(f);
}
inline constexpr std::uint32_t kDartsBit = 1u << kFlagFamilyCount;

// Whether a remote observation of o sets a flag of the given family.
bool watched(FlagFamily f, const NodeOutput& o);

struct FlagBank {
  std::array<std::uint32_t, kFlagFamilyCount> mask{};
  bool darts = false;

  bool get(FlagFamily f, NodeId j) const {
    return (mask[static_cast<int>(f)] >> j) & 1u;
  }
  void set(FlagFamily f, NodeId j, bool v) {
    auto& m = mask[static_cast<int>(f)];
    m = v ? (m | (1u << j)) : (m & ~(1u << j));
  }
};

enum class TimeoutKind : std::uint8_t {
  T1,
  T2,
  Tsleep,
  T3,
  T4,
  T5,
  T6,
  T7,
  Tsuspect,
  Tresync,
  R1,
  Tsupp,
  R3,
  R1none,
  Trefresh,
  R2  // one instance per node, index kFixedTimeouts + j
};
inline constexpr int kFixedTimeouts = 15;

struct TimeoutDef {
  TimeoutKind kind;
  NodeId subject = -1;  // for R2 instances
  std::string name;
  double duration = 0;  // ticks of local time
  bool randomized = false;
  double lo = 0, hi = 0;  // randomized interval
  Machine machine;
  std::vector<std::uint8_t> reset_states;
  bool used = true;
};

enum class Quorum : std::uint8_t { n_minus_f, f_plus_1 };

struct Guard {
  enum class Kind : std::uint8_t {
    always,
    self_is,    // delayed self-signal S_ii shows machine in state
    node_is,    // port S_ij shows node j's machine in state
    at_least,   // number of subjects with any listed flag set reaches quorum
    expired,    // timeout port
    darts,      // DARTS flag
    t1_sample,  // n-f accept threshold sampled when T1 expired
    negate,
    all,
    any
  };
  Kind kind = Kind::always;
  Machine machine = Machine::core;
  std::uint8_t state = 0;
  NodeId node = -1;
  std::uint32_t families = 0;
  Quorum quorum = Quorum::n_minus_f;
  int timeout = -1;
  std::vector<Guard> args;
};

struct Transition {
  Machine machine;
  std::uint8_t from;
  std::uint8_t to;
  Guard guard;
  std::uint32_t flag_resets = 0;  // family bits plus kDartsBit
};

struct ProtocolTables {
  int n = 0;
  int f = 0;
  bool fast_rejoin = false;
  std::vector<Transition> transitions;
  std::vector<TimeoutDef> timeouts;
  // by_source[machine][code] lists transition indices in priority order.
  std::array<std::vector<std::vector<int>>, kMachineCount> by_source;

  int timeout_index(TimeoutKind k, NodeId subject = -1) const {
    return k == TimeoutKind::R2 ? kFixedTimeouts + subject
                                : static_cast<int>(k);
  }
  int state_count(Machine m) const;
};

ProtocolTables build_tables(const Params& p, const TimeoutAssignment& a,
                            bool fast_rejoin);

std::string machine_name(Machine m);
std::string state_name(Machine m, std::uint8_t code);
// Inverse of state_name; throws StructuralError on unknown names.
std::uint8_t parse_state(Machine m, const std::string& name);
Machine parse_machine(const std::string& name);
std::string family_name(FlagFamily f);
std::string guard_to_string(const Guard& g, const ProtocolTables& t);

// One line per transition: machine: from -> to | guard | resets.
std::string format_table(const ProtocolTables& t, Machine m);
std::string format_tables(const ProtocolTables& t);

struct GuardInputs {
  NodeId self = 0;
  const NodeOutput* self_obs = nullptr;           // S_ii
  const std::vector<NodeOutput>* ports = nullptr;  // S_ij for every j
  const FlagBank* flags = nullptr;
  const std::vector<Time>* expiry = nullptr;  // per timeout index
  Time now = 0;
  bool t1_sample_ok = false;
};

bool eval_guard(const Guard& g, const ProtocolTables& t, const GuardInputs& in);

struct Switch {
  Machine machine;
  std::uint8_t from;  // actual state before the switch
  std::uint8_t to;
  int transition;
};

struct StepResult {
  NodeOutput next;
  std::vector<Switch> switches;
  std::uint32_t flag_resets = 0;
  // Machines where more than one outgoing guard held at once.
  std::vector<Machine> ties;
};

// Evaluates every machine on its observed self-state and applies the first
// enabled transition in table order, unless the target is the actual state.
StepResult step_node(const NodeOutput& actual, const ProtocolTables& t,
                     const GuardInputs& in);

}  // namespace fatal

#endif  // FATAL_PROTOCOL_HPP_
