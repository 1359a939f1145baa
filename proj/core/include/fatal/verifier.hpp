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


#ifndef FATAL_VERIFIER_HPP_
#define FATAL_VERIFIER_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fatal/constraints.hpp"
#include "fatal/model.hpp"
#include "fatal/protocol.hpp"
#include "fatal/trace.hpp"

namespace fatal {

using NodeSet = std::uint32_t;

inline NodeSet all_nodes(int n) {
  return n >= 32 ? ~0u : ((1u << n) - 1);
}

/**
 * Per-node signals rebuilt from a trace. Everything the checks below use is
 * derived from trace records only.
 */
class TraceIndex {
 public:
  explicit TraceIndex(const ExecutionTrace& trace);

  int n() const { return n_; }
  Time horizon() const { return horizon_; }
  Time d() const { return d_; }
  const Params& params() const { return params_; }
  const TimeoutAssignment& timeouts() const { return timeouts_; }
  const DerivedConstants& derived() const { return dc_; }

  const SignalTrace<std::uint8_t>& signal(NodeId i, Machine m) const {
    return signals_[i][static_cast<int>(m)];
  }
  // Switch times to state s (normalized, time 0 excluded).
  std::vector<Time> switches_to(NodeId i, Machine m, std::uint8_t s) const;
  const std::vector<Time>& accepts(NodeId i) const { return accepts_[i]; }
  std::vector<Time> switch_times(NodeId i, Machine m) const;

  // Whether node i is in state s at some time in the given interval.
  bool in_state_during(NodeId i, Machine m, std::uint8_t s, Time a, Time b,
                       bool a_open, bool b_open) const;

  // Loopback delivery time of the output sent at `sent`, if recorded.
  std::optional<Time> loop_delivery(NodeId i, Time sent) const;

  Time faulty_since(NodeId i) const { return faulty_since_[i]; }
  const std::vector<std::pair<NodeId, NodeId>>& faulty_channels() const {
    return faulty_channels_;
  }
  const std::vector<std::pair<NodeId, Time>>& resets() const {
    return resets_;
  }
  InitPolicy init_policy() const { return init_; }

 private:
  int n_;
  Time horizon_;
  Time d_;
  Params params_;
  TimeoutAssignment timeouts_;
  DerivedConstants dc_;
  InitPolicy init_;
  std::vector<std::array<SignalTrace<std::uint8_t>, kMachineCount>> signals_;
  std::vector<std::vector<Time>> accepts_;
  std::vector<std::vector<std::pair<Time, Time>>> loops_;
  std::vector<Time> faulty_since_;
  std::vector<std::pair<NodeId, NodeId>> faulty_channels_;
  std::vector<std::pair<NodeId, Time>> resets_;
};

struct Finding {
  std::string kind;
  NodeId node = -1;
  Time t = 0;
  std::string detail;
};

struct PulseBounds {
  double first_window = 0;  // spread allowed in the starting round
  double skew = 0;
  double gap_lo = 0;
  double gap_hi = 0;
  double first_gap_lo = 0;

  static PulseBounds strong(const Params& p, const TimeoutAssignment& a);
  static PulseBounds weak(const Params& p, const TimeoutAssignment& a);
};

struct SkewAccuracy {
  bool pass = true;
  int rounds = 0;
  double skew_max = 0;
  double gap_min = 0;
  double gap_max = 0;
  std::vector<Finding> violations;
  // Start of the round preceding the first violation; restart hint.
  Time restart_after = 0;
};

struct MetastabilityEvent {
  NodeId node;
  Machine machine;
  Time t;
  Time delivery;
  Time next;
};

struct CoherentWindow {
  NodeSet nodes = 0;
  Time start = 0;
  Time end = 0;
  bool weak = false;
};

struct SleepCheck {
  int applicable = 0;
  int not_applicable = 0;
  std::vector<Finding> violations;
};

// Window starts t such that every node of W switches to accept during
// [t, t + window); greedy and non-overlapping, starting at accept switches.
std::vector<Time> find_points(const TraceIndex& idx, NodeSet w, Time window,
                              Time from = 0);
std::vector<Time> find_stabilization_points(const TraceIndex& idx, NodeSet w);
std::vector<Time> find_quasi_points(const TraceIndex& idx, NodeSet w);

// Whether some W-point with the given window starts in (lo, hi].
bool has_point_in(const TraceIndex& idx, NodeSet w, Time window, Time lo,
                  Time hi);

SkewAccuracy check_skew_accuracy(const TraceIndex& idx, NodeSet w, Time from,
                                 const PulseBounds& b, bool stop_at_first);

// Earliest quasi-stabilization point from which the pulse bounds hold up to
// the horizon.
std::optional<Time> stabilization_time(const TraceIndex& idx, NodeSet w,
                                       const PulseBounds& b);

// Resynchronization points (all of W switch to supp_resync in (t, t + 2d))
// and the subset that is good.
std::pair<std::vector<Time>, std::vector<Time>> find_resync_points(
    const TraceIndex& idx, NodeSet w);

std::vector<MetastabilityEvent> check_metastability_freedom(
    const TraceIndex& idx, NodeId node, Machine m, Time lo, Time hi);

// Sleep-separation properties on every join-free window within [lo, hi].
SleepCheck check_sleep_windows(const TraceIndex& idx, NodeSet w, Time lo,
                               Time hi);

std::vector<CoherentWindow> coherency_windows(const TraceIndex& idx);

// Stability chain from a quasi-stabilization point t: exactly one accept per
// node in [t, t+3d), next stabilization point t' in the accuracy window with
// no accepts in [t+3d, t'), no core metastability in [t+4d, t'+4d); repeated
// until the horizon.
std::vector<Finding> check_stability_chain(const TraceIndex& idx, NodeSet w,
                                           Time t, int* rounds = nullptr);

struct VerifyOptions {
  int k = -1;                       // -1: take k from the trace's config
  std::optional<NodeSet> nodes;     // override the verified set
  std::optional<Time> coherent_from;
};

struct VerifierReport {
  std::string config_text;
  std::uint64_t seed = 0;
  Time horizon = 0;
  bool weak = false;
  NodeSet nodes = 0;
  Time coherent_from = 0;
  int k = 0;
  double T_k = 0;
  std::vector<std::vector<Time>> pulses;
  std::vector<Time> stabilization_points;
  std::vector<Time> quasi_points;
  std::vector<Time> resync_points;
  std::vector<Time> good_resync_points;
  std::vector<CoherentWindow> windows;
  bool stabilized = false;
  Time stabilization_time = 0;
  bool within_bound = false;
  bool conclusive = true;
  int rounds = 0;
  double skew_max = 0;
  double accuracy_min = 0;
  double accuracy_max = 0;
  int sleep_applicable = 0;
  int sleep_not_applicable = 0;
  int resync_checked = 0;
  std::vector<Finding> violations;
  std::vector<MetastabilityEvent> metastability_events;

  bool pass() const { return violations.empty(); }
  std::string format() const;
  std::string summary_line() const;
};

VerifierReport verify(const ExecutionTrace& trace,
                      const VerifyOptions& opts = {});

}  // namespace fatal

#endif  // FATAL_VERIFIER_HPP_
