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

#include <set>

#include "fatal/constraints.hpp"
#include "fatal/protocol.hpp"

namespace fatal {
namespace {

std::uint8_t c(CoreState s) { return static_cast<std::uint8_t>(s); }

// Guard inputs for node 0 with every flag clear and no timeout expired.
struct Bench {
  Params p;
  TimeoutAssignment a;
  ProtocolTables t;
  NodeOutput self;
  std::vector<NodeOutput> ports;
  FlagBank flags;
  std::vector<Time> expiry;

  explicit Bench(bool fast_rejoin = false) {
    a = solve(p);
    t = build_tables(p, a, fast_rejoin);
    ports.assign(p.n, NodeOutput{});
    expiry.assign(t.timeouts.size(), kNever);
    self[Machine::core] = c(CoreState::ready);
  }
  void expire(TimeoutKind k, NodeId j = -1) { expiry[t.timeout_index(k, j)] = 0; }
  void set_flags(FlagFamily f, int count) {
    for (int j = 0; j < count; ++j) flags.set(f, j, true);
  }
  StepResult step(bool t1ok = false) const {
    GuardInputs in;
    in.self = 0;
    in.self_obs = &self;
    in.ports = &ports;
    in.flags = &flags;
    in.expiry = &expiry;
    in.now = 100;
    in.t1_sample_ok = t1ok;
    return step_node(self, t, in);
  }
  std::uint8_t next(Machine m, bool t1ok = false) const {
    return step(t1ok).next[m];
  }
};

TEST(CoreTable, NoGuardIsIdentity) {
  Bench b;
  const StepResult r = b.step();
  EXPECT_TRUE(r.switches.empty());
  EXPECT_EQ(r.next, b.self);
}

TEST(CoreTable, ProposeToAcceptNeedsNMinusFFlags) {
  Bench b;
  b.self[Machine::core] = c(CoreState::propose);
  b.flags.set(FlagFamily::propose, 0, true);
  b.flags.set(FlagFamily::accept, 1, true);
  EXPECT_EQ(b.next(Machine::core), c(CoreState::propose));
  // A second family bit for an already counted node adds nothing.
  b.flags.set(FlagFamily::accept, 0, true);
  EXPECT_EQ(b.next(Machine::core), c(CoreState::propose));
  b.flags.set(FlagFamily::propose, 2, true);
  const StepResult r = b.step();
  EXPECT_EQ(r.next[Machine::core], c(CoreState::accept));
  EXPECT_TRUE(r.flag_resets & family_bit(FlagFamily::accept));
}

TEST(CoreTable, AcceptToSleep) {
  Bench b;
  b.self[Machine::core] = c(CoreState::accept);
  b.set_flags(FlagFamily::accept, 3);
  EXPECT_EQ(b.next(Machine::core, true), c(CoreState::accept));  // T1 running
  b.expire(TimeoutKind::T1);
  EXPECT_EQ(b.next(Machine::core, true), c(CoreState::sleep));
}

TEST(CoreTable, AcceptToRecoverUsesSampledThreshold) {
  Bench b;
  b.self[Machine::core] = c(CoreState::accept);
  b.expire(TimeoutKind::T1);
  b.set_flags(FlagFamily::accept, 3);
  // The threshold was not met when T1 expired: recover wins the tie.
  const StepResult r = b.step(false);
  EXPECT_EQ(r.next[Machine::core], c(CoreState::recover));
  ASSERT_EQ(r.ties.size(), 1u);
  EXPECT_EQ(r.ties[0], Machine::core);
}

TEST(CoreTable, AloneInReadyWaitsForT3T4) {
  Bench b;
  EXPECT_EQ(b.next(Machine::core), c(CoreState::ready));
  b.expire(TimeoutKind::T3);  // without the DARTS flag T3 alone is not enough
  EXPECT_EQ(b.next(Machine::core), c(CoreState::ready));
  b.flags.darts = true;
  EXPECT_EQ(b.next(Machine::core), c(CoreState::propose));
  Bench b2;
  b2.expire(TimeoutKind::T4);
  EXPECT_EQ(b2.next(Machine::core), c(CoreState::propose));
}

TEST(CoreTable, WakingTieRecoverBeatsReady) {
  Bench b;
  b.self[Machine::core] = c(CoreState::waking);
  b.expire(TimeoutKind::T2);
  EXPECT_EQ(b.next(Machine::core), c(CoreState::ready));
  b.flags.set(FlagFamily::accept, 1, true);
  b.flags.set(FlagFamily::recover, 2, true);
  const StepResult r = b.step();
  EXPECT_EQ(r.next[Machine::core], c(CoreState::recover));
  ASSERT_FALSE(r.ties.empty());
  EXPECT_EQ(r.ties[0], Machine::core);
}

TEST(CoreTable, RecoverToJoinRequiresNotDormant) {
  Bench b;
  b.self[Machine::core] = c(CoreState::recover);
  b.expire(TimeoutKind::T7);
  b.expire(TimeoutKind::T6);
  b.self[Machine::ext] = static_cast<std::uint8_t>(ExtState::dormant);
  EXPECT_EQ(b.next(Machine::core), c(CoreState::recover));
  b.self[Machine::ext] = static_cast<std::uint8_t>(ExtState::passive);
  EXPECT_EQ(b.next(Machine::core), c(CoreState::join));
  b.set_flags(FlagFamily::join, 2);
  b.self[Machine::ext] = static_cast<std::uint8_t>(ExtState::dormant);
  EXPECT_EQ(b.next(Machine::core), c(CoreState::join));
}

TEST(SuspectTable, ReadyWithFPlusOneAccepts) {
  Bench b;
  b.set_flags(FlagFamily::accept, 2);
  EXPECT_EQ(b.next(Machine::suspect),
            static_cast<std::uint8_t>(SuspectState::suspect));
  b.self[Machine::core] = c(CoreState::waking);
  EXPECT_EQ(b.next(Machine::suspect),
            static_cast<std::uint8_t>(SuspectState::trust));
}

TEST(SuspectTable, LeavingReadyRestoresTrust) {
  Bench b;
  b.self[Machine::suspect] = static_cast<std::uint8_t>(SuspectState::suspect);
  b.self[Machine::core] = c(CoreState::propose);
  EXPECT_EQ(b.next(Machine::suspect),
            static_cast<std::uint8_t>(SuspectState::trust));
}

TEST(ExtTable, ResyncMakesPassiveAndClearsFlags) {
  Bench b;
  b.self[Machine::rmain] = kRResync;
  const StepResult r = b.step();
  EXPECT_EQ(r.next[Machine::ext], static_cast<std::uint8_t>(ExtState::passive));
  EXPECT_TRUE(r.flag_resets & family_bit(FlagFamily::join));
  EXPECT_TRUE(r.flag_resets & family_bit(FlagFamily::sleep_waking));
}

TEST(ExtTable, PassiveWithoutFlagsStays) {
  Bench b;
  b.self[Machine::ext] = static_cast<std::uint8_t>(ExtState::passive);
  EXPECT_EQ(b.next(Machine::ext), static_cast<std::uint8_t>(ExtState::passive));
  b.set_flags(FlagFamily::sleep_waking, 2);
  EXPECT_EQ(b.next(Machine::ext), static_cast<std::uint8_t>(ExtState::active));
}

TEST(ResyncTable, InitNeedsExpiredR2) {
  Bench b;
  b.ports[2][Machine::rinit] = static_cast<std::uint8_t>(InitState::init);
  EXPECT_EQ(b.next(Machine::rmain), kRNone);
  b.expire(TimeoutKind::R2, 2);
  const StepResult r = b.step();
  EXPECT_EQ(r.next[Machine::rmain], kRSupp + 2);
  EXPECT_TRUE(r.flag_resets & family_bit(FlagFamily::supp));
}

TEST(ResyncTable, SuppThresholdThenResync) {
  Bench b;
  b.self[Machine::rmain] = kRSupp + 1;
  b.set_flags(FlagFamily::supp, 3);
  EXPECT_EQ(b.next(Machine::rmain), kRSuppResync);
  b.self[Machine::rmain] = kRSuppResync;
  EXPECT_EQ(b.next(Machine::rmain), kRSuppResync);
  b.expire(TimeoutKind::Tresync);
  EXPECT_EQ(b.next(Machine::rmain), kRResync);
}

TEST(ResyncTable, SignalMapping) {
  EXPECT_FALSE(rmain_signal_supp(kRNone));
  EXPECT_FALSE(rmain_signal_supp(kRResync));
  EXPECT_TRUE(rmain_signal_supp(kRSuppResync));
  EXPECT_TRUE(rmain_signal_supp(kRSupp + 3));
}

TEST(Tables, FastRejoinDisabledAddsNothing) {
  Bench off(false), on(true);
  for (const Transition& tr : off.t.transitions) {
    EXPECT_NE(tr.machine, Machine::refresh);
  }
  EXPECT_GT(on.t.transitions.size(), off.t.transitions.size());
  EXPECT_FALSE(off.t.timeouts[off.t.timeout_index(TimeoutKind::R1none)].used);
  EXPECT_FALSE(off.t.timeouts[off.t.timeout_index(TimeoutKind::Trefresh)].used);
}

// Collects timeout indices and flag families read by a guard, checking that
// every reference resolves.
void walk(const Guard& g, const ProtocolTables& t, std::set<int>& tos,
          std::uint32_t& fams) {
  switch (g.kind) {
    case Guard::Kind::expired:
      ASSERT_GE(g.timeout, 0);
      ASSERT_LT(g.timeout, static_cast<int>(t.timeouts.size()));
      tos.insert(g.timeout);
      break;
    case Guard::Kind::node_is:
      ASSERT_GE(g.node, 0);
      ASSERT_LT(g.node, t.n);
      ASSERT_LT(g.state, t.state_count(g.machine));
      break;
    case Guard::Kind::self_is:
      ASSERT_LT(g.state, t.state_count(g.machine));
      break;
    case Guard::Kind::at_least:
      ASSERT_NE(g.families, 0u);
      fams |= g.families;
      break;
    default:
      break;
  }
  for (const Guard& a : g.args) walk(a, t, tos, fams);
}

TEST(Tables, ClosedGuardsAndSymbolAudit) {
  for (bool fr : {false, true}) {
    Bench b(fr);
    std::set<int> read;
    std::uint32_t fams_read = 0, fams_reset = 0;
    for (const Transition& tr : b.t.transitions) {
      walk(tr.guard, b.t, read, fams_read);
      fams_reset |= tr.flag_resets;
      ASSERT_LT(tr.from, b.t.state_count(tr.machine));
      ASSERT_LT(tr.to, b.t.state_count(tr.machine));
    }
    for (int k = 0; k < static_cast<int>(b.t.timeouts.size()); ++k) {
      const TimeoutDef& td = b.t.timeouts[k];
      if (!td.used) {
        EXPECT_EQ(read.count(k), 0u) << td.name;
        continue;
      }
      EXPECT_EQ(read.count(k), 1u) << td.name << " is never read";
      EXPECT_FALSE(td.reset_states.empty()) << td.name << " is never reset";
    }
    for (int f = 0; f < kFlagFamilyCount; ++f) {
      const std::uint32_t bit = 1u << f;
      EXPECT_TRUE(fams_read & bit)
          << family_name(static_cast<FlagFamily>(f)) << " never read";
      EXPECT_TRUE(fams_reset & bit)
          << family_name(static_cast<FlagFamily>(f)) << " never reset";
    }
    EXPECT_TRUE(fams_reset & kDartsBit);
  }
}

TEST(Tables, OutputEncodingRoundTrip) {
  NodeOutput o;
  o[Machine::core] = c(CoreState::join);
  o[Machine::rmain] = kRSupp + 7;
  o[Machine::refresh] = 1;
  EXPECT_EQ(decode_output(encode_output(o)), o);
}

TEST(Tables, NamesRoundTrip) {
  Bench b;
  for (int m = 0; m < kMachineCount; ++m) {
    const Machine mm = static_cast<Machine>(m);
    EXPECT_EQ(parse_machine(machine_name(mm)), mm);
    for (int s = 0; s < b.t.state_count(mm); ++s) {
      const auto code = static_cast<std::uint8_t>(s);
      EXPECT_EQ(parse_state(mm, state_name(mm, code)), code);
    }
  }
  EXPECT_THROW(parse_state(Machine::core, "bogus"), StructuralError);
}

TEST(Tables, ListingHasOneLinePerTransition) {
  Bench b;
  const std::string s = format_tables(b.t);
  std::size_t lines = 0;
  for (char ch : s) lines += ch == '\n';
  EXPECT_GE(lines, b.t.transitions.size());
  EXPECT_NE(s.find("propose -> accept"), std::string::npos);
}

}  // namespace
}  // namespace fatal
