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


#ifndef FATAL_ADVERSARY_HPP_
#define FATAL_ADVERSARY_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fatal/common.hpp"
#include "fatal/config.hpp"
#include "fatal/constraints.hpp"
#include "fatal/protocol.hpp"
#include "fatal/trace.hpp"

namespace fatal {

enum class CorruptResult { corrupted, already_faulty, refused };

/**
 * Which components are faulty and since when. Static plans fix the faulty
 * nodes at time 0; adaptive plans start empty and spend a budget online.
 */
class FaultPlan {
 public:
  FaultPlan() = default;
  FaultPlan(int n, const FaultSpec& spec);

  // Hands node to the adversary from t on (inclusive).
  CorruptResult corrupt(NodeId node, Time t);

  bool is_faulty(NodeId node, Time t) const {
    return since_[node] <= t;
  }
  Time faulty_since(NodeId node) const { return since_[node]; }
  bool channel_faulty(NodeId src, NodeId dst) const {
    return src != dst && (chan_[src] >> dst) & 1u;
  }
  // Whether the adversary controls what dst sees from src at time t.
  bool port_controlled(NodeId src, NodeId dst, Time t) const {
    return src != dst && (is_faulty(src, t) || channel_faulty(src, dst));
  }

  bool adaptive() const { return adaptive_; }
  int budget_left() const { return budget_; }
  int n() const { return n_; }
  const std::vector<std::pair<NodeId, Time>>& corruptions() const {
    return log_;
  }

 private:
  int n_ = 0;
  bool adaptive_ = false;
  int budget_ = 0;
  std::vector<Time> since_;
  std::vector<std::uint32_t> chan_;
  std::vector<std::pair<NodeId, Time>> log_;
};

struct PortWrite {
  Time t;       // delivery time, strictly after the current instant
  NodeId src;   // whose output is forged
  NodeId dst;   // receiving node
  std::uint64_t value;  // encoded NodeOutput

  bool operator==(const PortWrite&) const = default;
};

struct SwitchNote {
  NodeId node;
  Machine machine;
  std::uint8_t from;
  std::uint8_t to;

  bool operator==(const SwitchNote&) const = default;
};

/**
 * Everything a strategy may look at: the history up to and including the
 * current instant. Randomized timeouts show up only through reset and expiry
 * records once they happen.
 */
struct HistoryView {
  Time now = 0;
  const Params* params = nullptr;
  const TimeoutAssignment* timeouts = nullptr;
  const std::vector<NodeOutput>* outputs = nullptr;  // published outputs
  const std::vector<SwitchNote>* switches_now = nullptr;
  const FaultPlan* plan = nullptr;
  const ExecutionTrace* trace = nullptr;
};

struct AdversaryActions {
  std::vector<PortWrite> writes;
  std::vector<NodeId> corrupt;
  Time wake = kNever;  // ask to be called again at this time

  bool operator==(const AdversaryActions&) const = default;
};

class AdversaryStrategy {
 public:
  virtual ~AdversaryStrategy() = default;

  virtual std::string name() const = 0;
  virtual void attach(const Params& p, const FaultPlan& plan,
                      std::uint64_t seed);
  virtual AdversaryActions step(const HistoryView& view) = 0;

  // Optional drift override for a node's clock segment, in ppm.
  virtual std::optional<std::int64_t> clock_rate(NodeId node, int segment);
  // Optional delay override for a message on a correct channel.
  virtual std::optional<Time> delay(NodeId src, NodeId dst, Time send);

 protected:
  // (src, dst) pairs whose view the adversary forges at time t; receivers
  // that are themselves faulty are skipped.
  std::vector<std::pair<NodeId, NodeId>> controlled_ports(Time t) const;
  std::uint64_t garbage();
  Time forward_delay() const;

  Params params_;
  const FaultPlan* plan_ = nullptr;
  std::mt19937_64 rng_;
};

// Replayable record of a strategy's decisions.
struct Transcript {
  std::vector<std::pair<Time, AdversaryActions>> steps;
  std::vector<std::optional<Time>> delays;
  std::map<std::pair<NodeId, int>, std::optional<std::int64_t>> rates;
};

// Wraps a strategy and records every decision it makes.
class RecordingStrategy : public AdversaryStrategy {
 public:
  explicit RecordingStrategy(std::unique_ptr<AdversaryStrategy> inner)
      : inner_(std::move(inner)) {}

  std::string name() const override { return inner_->name(); }
  void attach(const Params& p, const FaultPlan& plan,
              std::uint64_t seed) override;
  AdversaryActions step(const HistoryView& view) override;
  std::optional<std::int64_t> clock_rate(NodeId node, int segment) override;
  std::optional<Time> delay(NodeId src, NodeId dst, Time send) override;

  const Transcript& transcript() const { return log_; }

 private:
  std::unique_ptr<AdversaryStrategy> inner_;
  Transcript log_;
};

// Replays a transcript without looking at the history at all.
class TranscriptStrategy : public AdversaryStrategy {
 public:
  explicit TranscriptStrategy(Transcript t) : log_(std::move(t)) {}

  std::string name() const override { return "transcript"; }
  AdversaryActions step(const HistoryView& view) override;
  std::optional<std::int64_t> clock_rate(NodeId node, int segment) override;
  std::optional<Time> delay(NodeId src, NodeId dst, Time send) override;

 private:
  Transcript log_;
  std::size_t next_step_ = 0;
  std::size_t next_delay_ = 0;
};

// Built-in strategies: silent, crash, random-flip, play-nice-subset,
// init-spammer, worst-drift, max-delay, adaptive-init-killer.
std::unique_ptr<AdversaryStrategy> make_strategy(
    const std::string& name,
    const std::map<std::string, std::string>& options = {});

std::vector<std::string> strategy_names();

}  // namespace fatal

#endif  // FATAL_ADVERSARY_HPP_
