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


#include <gtest/gtest.h>

#include "fatal/adversary.hpp"
#include "fatal/engine.hpp"
#include "support.hpp"

namespace fatal {
namespace {

SimConfig adaptive_config(const std::string& strategy, Time horizon) {
  SimConfig c;
  c.faults.adaptive = true;
  c.faults.strategy = strategy;
  c.horizon_auto = horizon <= 0;
  c.horizon = horizon;
  c.resolve();
  return c;
}

TEST(Plan, CorruptIsIdempotentAndBudgeted) {
  FaultSpec s;
  s.adaptive = true;
  s.budget = 1;
  FaultPlan p(4, s);
  EXPECT_EQ(p.corrupt(2, 10), CorruptResult::corrupted);
  EXPECT_EQ(p.corrupt(2, 20), CorruptResult::already_faulty);
  EXPECT_EQ(p.budget_left(), 0);
  EXPECT_EQ(p.faulty_since(2), 10);
  EXPECT_FALSE(p.is_faulty(2, 9));
  EXPECT_TRUE(p.is_faulty(2, 10));
  EXPECT_EQ(p.corrupt(1, 30), CorruptResult::refused);
  EXPECT_EQ(p.corruptions().size(), 1u);
}

TEST(Plan, StaticPlanRefusesCorruption) {
  FaultSpec s;
  s.nodes = {3};
  s.channels = {{0, 1}};
  FaultPlan p(4, s);
  EXPECT_TRUE(p.is_faulty(3, 0));
  EXPECT_EQ(p.corrupt(1, 5), CorruptResult::refused);
  EXPECT_TRUE(p.channel_faulty(0, 1));
  EXPECT_FALSE(p.channel_faulty(1, 0));
  EXPECT_TRUE(p.port_controlled(0, 1, 0));
  EXPECT_TRUE(p.port_controlled(3, 2, 0));
  EXPECT_FALSE(p.port_controlled(3, 3, 0));  // loopback stays correct
}

// Writes to a port that belongs to a correct node.
class Trespasser : public AdversaryStrategy {
 public:
  std::string name() const override { return "trespasser"; }
  AdversaryActions step(const HistoryView& v) override {
    AdversaryActions a;
    a.writes.push_back({v.now + 1, 1, 2, 0});
    return a;
  }
};

TEST(Containment, WriteToCorrectPortIsRejected) {
  const SimConfig c = fatal::testing::small_config(4, 1, 10000);
  Trespasser t;
  EXPECT_THROW(run(c, t), ContainmentError);
}

class BadDelay : public AdversaryStrategy {
 public:
  std::string name() const override { return "bad-delay"; }
  AdversaryActions step(const HistoryView&) override { return {}; }
  std::optional<Time> delay(NodeId, NodeId, Time) override { return 5000; }
};

TEST(Containment, DelayOutsideEnvelopeIsRejected) {
  const SimConfig c = fatal::testing::small_config(4, 1, 10000);
  BadDelay b;
  EXPECT_THROW(run(c, b), ContainmentError);
}

// Takes node 0 over at its first state switch and stays silent.
class Ambush : public AdversaryStrategy {
 public:
  std::string name() const override { return "ambush"; }
  AdversaryActions step(const HistoryView& v) override {
    AdversaryActions a;
    if (done_) return a;
    for (const SwitchNote& s : *v.switches_now) {
      if (s.node == 0) {
        a.corrupt.push_back(0);
        at = v.now;
        after = encode_output((*v.outputs)[0]);
        done_ = true;
        break;
      }
    }
    return a;
  }
  Time at = kNever;
  std::uint64_t after = 0;

 private:
  bool done_ = false;
};

TEST(Corruption, SwitchAtCorruptionInstantIsNeverSeen) {
  SimConfig c = adaptive_config("silent", 2'000'000);
  c.record = RecordLevel::full;
  Ambush a;
  const ExecutionTrace tr = run(c, a);
  ASSERT_NE(a.at, kNever);
  bool fault_logged = false;
  for (const TraceRecord& r : tr.records) {
    if (r.kind == RecordKind::fault && r.node == 0 && r.aux == -1) {
      fault_logged = true;
      EXPECT_EQ(r.t, a.at);
    }
    if (r.kind == RecordKind::port && r.aux == 0 && r.node != 0) {
      // Only messages sent before the corruption may arrive.
      EXPECT_LT(r.t, a.at + c.d_ticks());
      if (r.t > a.at) {
        EXPECT_NE(r.value, a.after) << "post-corruption output leaked";
      }
    }
  }
  EXPECT_TRUE(fault_logged);
}

TEST(Corruption, BudgetBoundsAdaptiveKills) {
  const SimConfig c = adaptive_config("adaptive-init-killer", 0);
  const ExecutionTrace tr = run(c);
  int faults = 0;
  for (const TraceRecord& r : tr.records) {
    faults += r.kind == RecordKind::fault && r.aux == -1;
  }
  EXPECT_GE(faults, 1);
  EXPECT_LE(faults, c.params.f);
}

TEST(Causality, TranscriptReplayReproducesTrace) {
  for (const std::string name :
       {"random-flip", "play-nice-subset", "init-spammer", "worst-drift",
        "max-delay"}) {
    SimConfig c;
    c.faults.nodes = {3};
    c.faults.strategy = name;
    c.clocks = ClockPolicy::random;
    c.horizon_auto = false;
    c.horizon = 3'000'000;
    c.seed = 99;
    c.resolve();
    RecordingStrategy rec(make_strategy(name));
    const std::string a = trace_to_string(run(c, rec));
    TranscriptStrategy replay(rec.transcript());
    const std::string b = trace_to_string(run(c, replay));
    EXPECT_EQ(a, b) << name;
  }
}

TEST(Strategies, AllNamesConstruct) {
  for (const std::string& s : strategy_names()) {
    EXPECT_NE(make_strategy(s), nullptr) << s;
  }
  EXPECT_THROW(make_strategy("no-such-strategy"), ConfigError);
}

TEST(Strategies, SilentKeepsFaultyPortsConstant) {
  SimConfig c;
  c.faults.nodes = {3};
  c.faults.strategy = "silent";
  c.record = RecordLevel::full;
  c.horizon_auto = false;
  c.horizon = 2'000'000;
  c.resolve();
  const ExecutionTrace tr = run(c);
  std::map<NodeId, std::uint64_t> seen;
  for (const TraceRecord& r : tr.records) {
    if (r.kind != RecordKind::port || r.aux != 3 || r.node == 3 || r.t == 0) {
      continue;
    }
    auto [it, fresh] = seen.emplace(r.node, r.value);
    if (!fresh) EXPECT_EQ(it->second, r.value);
  }
  EXPECT_FALSE(seen.empty());
}

}  // namespace
}  // namespace fatal
