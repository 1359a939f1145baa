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


#include "fatal/protocol.hpp"

#include <bit>
#include <sstream>

namespace fatal {

namespace {

const char* kCoreNames[] = {"accept", "sleep",   "sleep_waking", "waking",
                            "ready",  "propose", "recover",      "join"};
const char* kSuspectNames[] = {"trust", "suspect"};
const char* kExtNames[] = {"dormant", "passive", "active"};
const char* kInitNames[] = {"wait", "init"};
const char* kRefreshNames[] = {"idle", "tick"};
const char* kMachineNames[] = {"core", "suspect", "ext",
                               "rinit", "rmain", "refresh"};
const char* kFamilyNames[] = {"accept", "recover",      "propose",
                              "join",   "sleep_waking", "supp"};

std::uint8_t code(CoreState s) { return static_cast<std::uint8_t>(s); }
std::uint8_t code(SuspectState s) { return static_cast<std::uint8_t>(s); }
std::uint8_t code(ExtState s) { return static_cast<std::uint8_t>(s); }
std::uint8_t code(InitState s) { return static_cast<std::uint8_t>(s); }
std::uint8_t code(RefreshState s) { return static_cast<std::uint8_t>(s); }

Guard g_true() { return Guard{}; }

Guard g_self(Machine m, std::uint8_t s) {
  Guard g;
  g.kind = Guard::Kind::self_is;
  g.machine = m;
  g.state = s;
  return g;
}

Guard g_node(NodeId j, Machine m, std::uint8_t s) {
  Guard g;
  g.kind = Guard::Kind::node_is;
  g.node = j;
  g.machine = m;
  g.state = s;
  return g;
}

Guard g_least(std::uint32_t fams, Quorum q) {
  Guard g;
  g.kind = Guard::Kind::at_least;
  g.families = fams;
  g.quorum = q;
  return g;
}

Guard g_exp(int idx) {
  Guard g;
  g.kind = Guard::Kind::expired;
  g.timeout = idx;
  return g;
}

Guard g_darts() {
  Guard g;
  g.kind = Guard::Kind::darts;
  return g;
}

Guard g_t1() {
  Guard g;
  g.kind = Guard::Kind::t1_sample;
  return g;
}

Guard g_not(Guard a) {
  Guard g;
  g.kind = Guard::Kind::negate;
  g.args.push_back(std::move(a));
  return g;
}

Guard g_and(std::vector<Guard> a) {
  Guard g;
  g.kind = Guard::Kind::all;
  g.args = std::move(a);
  return g;
}

Guard g_or(std::vector<Guard> a) {
  Guard g;
  g.kind = Guard::Kind::any;
  g.args = std::move(a);
  return g;
}

constexpr std::uint32_t F(FlagFamily f) { return family_bit(f); }

}  // namespace

std::uint64_t encode_output(const NodeOutput& o) {
  std::uint64_t v = 0;
  for (int m = kMachineCount - 1; m >= 0; --m) v = (v << 8) | o.s[m];
  return v;
}

NodeOutput decode_output(std::uint64_t v) {
  NodeOutput o;
  for (int m = 0; m < kMachineCount; ++m) {
    o.s[m] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
  return o;
}

bool watched(FlagFamily f, const NodeOutput& o) {
  switch (f) {
    case FlagFamily::accept:
      return o.core() == CoreState::accept;
    case FlagFamily::recover:
      return o.core() == CoreState::recover;
    case FlagFamily::propose:
      return o.core() == CoreState::propose;
    case FlagFamily::join:
      return o.core() == CoreState::join;
    case FlagFamily::sleep_waking:
      return o.core() == CoreState::sleep_waking;
    case FlagFamily::supp:
      return rmain_signal_supp(o[Machine::rmain]);
  }
  return false;
}

int ProtocolTables::state_count(Machine m) const {
  switch (m) {
    case Machine::core:
      return kCoreStateCount;
    case Machine::suspect:
      return 2;
    case Machine::ext:
      return 3;
    case Machine::rinit:
      return 2;
    case Machine::rmain:
      return kRSupp + n;
    case Machine::refresh:
      return 2;
  }
  return 0;
}

ProtocolTables build_tables(const Params& p, const TimeoutAssignment& a,
                            bool fast_rejoin) {
  ProtocolTables t;
  t.n = p.n;
  t.f = p.f;
  t.fast_rejoin = fast_rejoin;
  const int n = p.n;
  const double th = p.theta, d = p.d;

  auto def = [&](TimeoutKind k, const char* name, double dur, Machine m,
                 std::vector<std::uint8_t> states) {
    TimeoutDef td;
    td.kind = k;
    td.name = name;
    td.duration = dur;
    td.machine = m;
    td.reset_states = std::move(states);
    t.timeouts.push_back(td);
  };
  std::vector<std::uint8_t> all_supp;
  for (int j = 0; j < n; ++j) all_supp.push_back(kRSupp + j);

  def(TimeoutKind::T1, "T1", a.T1, Machine::core, {code(CoreState::accept)});
  def(TimeoutKind::T2, "T2", a.T2, Machine::core, {code(CoreState::accept)});
  def(TimeoutKind::Tsleep, "Tsleep", (th + 1) * a.T1, Machine::core,
      {code(CoreState::sleep)});
  def(TimeoutKind::T3, "T3", a.T3, Machine::core, {code(CoreState::ready)});
  def(TimeoutKind::T4, "T4", a.T4, Machine::core, {code(CoreState::ready)});
  def(TimeoutKind::T5, "T5", a.T5, Machine::core, {code(CoreState::propose)});
  def(TimeoutKind::T6, "T6", a.T6, Machine::ext, {code(ExtState::active)});
  def(TimeoutKind::T7, "T7", a.T7, Machine::ext, {code(ExtState::passive)});
  def(TimeoutKind::Tsuspect, "Tsuspect", 2 * th * d, Machine::suspect,
      {code(SuspectState::suspect)});
  def(TimeoutKind::Tresync, "Tresync", 4 * th * d, Machine::rmain,
      {kRSuppResync});
  def(TimeoutKind::R1, "R1", a.R1, Machine::rmain, {kRSuppResync});
  def(TimeoutKind::Tsupp, "Tsupp", 4 * th * d, Machine::rmain, all_supp);
  def(TimeoutKind::R3, "R3", a.R3_lo, Machine::rinit, {code(InitState::init)});
  t.timeouts.back().randomized = true;
  t.timeouts.back().lo = a.R3_lo;
  t.timeouts.back().hi = a.R3_hi;
  def(TimeoutKind::R1none, "R1none", a.R1, Machine::rmain, {kRNone});
  t.timeouts.back().used = fast_rejoin;
  def(TimeoutKind::Trefresh, "Trefresh",
      (th - 1) * (th + 2) * a.T1 + 5 * th * d, Machine::refresh,
      {code(RefreshState::idle)});
  t.timeouts.back().used = fast_rejoin;
  for (int j = 0; j < n; ++j) {
    TimeoutDef td;
    td.kind = TimeoutKind::R2;
    td.subject = j;
    td.name = "R2_" + std::to_string(j);
    td.duration = a.R2;
    td.machine = Machine::rmain;
    td.reset_states = {static_cast<std::uint8_t>(kRSupp + j)};
    t.timeouts.push_back(td);
  }

  auto idx = [&](TimeoutKind k, NodeId j = -1) { return t.timeout_index(k, j); };
  auto add = [&](Machine m, std::uint8_t from, std::uint8_t to, Guard g,
                 std::uint32_t resets = 0) {
    t.transitions.push_back({m, from, to, std::move(g), resets});
  };
  const Quorum NF = Quorum::n_minus_f, F1 = Quorum::f_plus_1;
  using C = CoreState;
  const Machine MC = Machine::core;

  // Core routine. Per source state: recover, then join, then cycle successor.
  add(MC, code(C::accept), code(C::recover),
      g_and({g_exp(idx(TimeoutKind::T1)), g_not(g_t1())}));
  add(MC, code(C::accept), code(C::sleep),
      g_and({g_exp(idx(TimeoutKind::T1)),
             g_least(F(FlagFamily::accept), NF)}));
  add(MC, code(C::sleep), code(C::sleep_waking),
      g_exp(idx(TimeoutKind::Tsleep)));
  add(MC, code(C::sleep_waking), code(C::waking), g_true(),
      F(FlagFamily::accept) | F(FlagFamily::recover));
  add(MC, code(C::waking), code(C::recover),
      g_least(F(FlagFamily::accept) | F(FlagFamily::recover), F1));
  add(MC, code(C::waking), code(C::ready), g_exp(idx(TimeoutKind::T2)),
      F(FlagFamily::propose) | F(FlagFamily::join) | kDartsBit);
  add(MC, code(C::ready), code(C::recover),
      g_and({g_self(Machine::suspect, code(SuspectState::suspect)),
             g_exp(idx(TimeoutKind::Tsuspect))}));
  add(MC, code(C::ready), code(C::join), g_least(F(FlagFamily::join), F1));
  add(MC, code(C::ready), code(C::propose),
      g_or({g_and({g_exp(idx(TimeoutKind::T3)), g_darts()}),
            g_exp(idx(TimeoutKind::T4)),
            g_least(F(FlagFamily::propose), F1)}),
      F(FlagFamily::accept));
  add(MC, code(C::propose), code(C::recover), g_exp(idx(TimeoutKind::T5)));
  add(MC, code(C::propose), code(C::accept),
      g_least(F(FlagFamily::propose) | F(FlagFamily::accept), NF),
      F(FlagFamily::accept));
  add(MC, code(C::recover), code(C::join),
      g_or({g_least(F(FlagFamily::join), F1),
            g_and({g_not(g_self(Machine::ext, code(ExtState::dormant))),
                   g_or({g_and({g_self(Machine::ext, code(ExtState::active)),
                                g_exp(idx(TimeoutKind::T6))}),
                         g_exp(idx(TimeoutKind::T7))})})}),
      F(FlagFamily::propose) | F(FlagFamily::accept));
  add(MC, code(C::join), code(C::propose),
      g_least(F(FlagFamily::join) | F(FlagFamily::propose) |
                  F(FlagFamily::accept),
              NF));

  // Suspect watchdog.
  add(Machine::suspect, code(SuspectState::trust), code(SuspectState::suspect),
      g_and({g_self(MC, code(C::ready)), g_least(F(FlagFamily::accept), F1)}));
  add(Machine::suspect, code(SuspectState::suspect), code(SuspectState::trust),
      g_not(g_self(MC, code(C::ready))));

  // Extension.
  const Machine ME = Machine::ext;
  const std::uint32_t ext_resets =
      F(FlagFamily::join) | F(FlagFamily::sleep_waking);
  Guard pinned = g_and({g_self(Machine::rmain, kRNone),
                        g_not(g_exp(idx(TimeoutKind::R1none)))});
  Guard leave = g_and({g_exp(idx(TimeoutKind::R1)),
                       g_not(g_self(Machine::rmain, kRResync))});
  if (fast_rejoin) {
    leave.args.push_back(g_exp(idx(TimeoutKind::R1none)));
  }
  if (fast_rejoin) {
    add(ME, code(ExtState::dormant), code(ExtState::passive),
        g_or({g_self(Machine::rmain, kRResync), pinned}), ext_resets);
  } else {
    add(ME, code(ExtState::dormant), code(ExtState::passive),
        g_self(Machine::rmain, kRResync), ext_resets);
  }
  add(ME, code(ExtState::passive), code(ExtState::dormant), leave);
  add(ME, code(ExtState::passive), code(ExtState::active),
      g_least(F(FlagFamily::sleep_waking), F1));
  add(ME, code(ExtState::active), code(ExtState::dormant), leave);
  if (fast_rejoin) {
    add(ME, code(ExtState::active), code(ExtState::passive), pinned,
        ext_resets);
  }

  // Resynchronization.
  add(Machine::rinit, code(InitState::wait), code(InitState::init),
      g_exp(idx(TimeoutKind::R3)));
  add(Machine::rinit, code(InitState::init), code(InitState::wait), g_true());

  const Machine MR = Machine::rmain;
  auto to_supp = [&](NodeId i) {
    Guard g = g_and({g_node(i, Machine::rinit, code(InitState::init)),
                     g_exp(idx(TimeoutKind::R2, i))});
    return g;
  };
  for (int i = 0; i < n; ++i) {
    Guard g = to_supp(i);
    if (fast_rejoin) g.args.push_back(g_exp(idx(TimeoutKind::R1none)));
    add(MR, kRNone, kRSupp + i, std::move(g), F(FlagFamily::supp));
  }
  for (int j = 0; j < n; ++j) {
    add(MR, kRSupp + j, kRSuppResync, g_least(F(FlagFamily::supp), NF));
    for (int i = 0; i < n; ++i) {
      if (i != j) add(MR, kRSupp + j, kRSupp + i, to_supp(i));
    }
    add(MR, kRSupp + j, kRNone, g_exp(idx(TimeoutKind::Tsupp)));
  }
  add(MR, kRSuppResync, kRResync, g_exp(idx(TimeoutKind::Tresync)));
  add(MR, kRResync, kRNone, g_exp(idx(TimeoutKind::R1)));

  if (fast_rejoin) {
    add(Machine::refresh, code(RefreshState::idle), code(RefreshState::tick),
        g_and({g_exp(idx(TimeoutKind::Trefresh)), g_self(MR, kRNone)}),
        F(FlagFamily::sleep_waking));
    add(Machine::refresh, code(RefreshState::tick), code(RefreshState::idle),
        g_true());
  }

  for (int m = 0; m < kMachineCount; ++m) {
    t.by_source[m].assign(t.state_count(static_cast<Machine>(m)), {});
  }
  for (int k = 0; k < static_cast<int>(t.transitions.size()); ++k) {
    const Transition& tr = t.transitions[k];
    t.by_source[static_cast<int>(tr.machine)][tr.from].push_back(k);
  }
  return t;
}

std::string machine_name(Machine m) {
  return kMachineNames[static_cast<int>(m)];
}

std::string state_name(Machine m, std::uint8_t c) {
  switch (m) {
    case Machine::core:
      return c < kCoreStateCount ? kCoreNames[c] : "?";
    case Machine::suspect:
      return c < 2 ? kSuspectNames[c] : "?";
    case Machine::ext:
      return c < 3 ? kExtNames[c] : "?";
    case Machine::rinit:
      return c < 2 ? kInitNames[c] : "?";
    case Machine::refresh:
      return c < 2 ? kRefreshNames[c] : "?";
    case Machine::rmain:
      if (c == kRNone) return "none";
      if (c == kRSuppResync) return "supp_resync";
      if (c == kRResync) return "resync";
      return "supp" + std::to_string(c - kRSupp);
  }
  return "?";
}

std::uint8_t parse_state(Machine m, const std::string& name) {
  if (m == Machine::rmain && name.rfind("supp", 0) == 0 &&
      name != "supp_resync") {
    const std::string rest = name.substr(4);
    if (rest.empty() || rest.size() > 2 ||
        rest.find_first_not_of("0123456789") != std::string::npos) {
      throw StructuralError("unknown state name: " + name);
    }
    return static_cast<std::uint8_t>(kRSupp + std::stoi(rest));
  }
  for (int c = 0; c < 8; ++c) {
    if (state_name(m, static_cast<std::uint8_t>(c)) == name) {
      return static_cast<std::uint8_t>(c);
    }
  }
  throw StructuralError("unknown state name: " + name);
}

Machine parse_machine(const std::string& name) {
  for (int m = 0; m < kMachineCount; ++m) {
    if (name == kMachineNames[m]) return static_cast<Machine>(m);
  }
  throw StructuralError("unknown machine name: " + name);
}

std::string family_name(FlagFamily f) {
  return kFamilyNames[static_cast<int>(f)];
}

std::string guard_to_string(const Guard& g, const ProtocolTables& t) {
  auto fams = [](std::uint32_t bits) {
    std::string s;
    for (int k = 0; k < kFlagFamilyCount; ++k) {
      if (bits & (1u << k)) {
        if (!s.empty()) s += "|";
        s += kFamilyNames[k];
      }
    }
    return s;
  };
  auto join = [&](const char* op) {
    std::string s = "(";
    for (std::size_t k = 0; k < g.args.size(); ++k) {
      if (k) s += op;
      s += guard_to_string(g.args[k], t);
    }
    return s + ")";
  };
  switch (g.kind) {
    case Guard::Kind::always:
      return "true";
    case Guard::Kind::self_is:
      return "self." + machine_name(g.machine) + "=" +
             state_name(g.machine, g.state);
    case Guard::Kind::node_is:
      return "S" + std::to_string(g.node) + "." + machine_name(g.machine) +
             "=" + state_name(g.machine, g.state);
    case Guard::Kind::at_least:
      return std::string(g.quorum == Quorum::n_minus_f ? ">=n-f " : ">=f+1 ") +
             fams(g.families);
    case Guard::Kind::expired:
      return t.timeouts[g.timeout].name + " expired";
    case Guard::Kind::darts:
      return "DARTS";
    case Guard::Kind::t1_sample:
      return ">=n-f accept@T1";
    case Guard::Kind::negate:
      return "!" + guard_to_string(g.args[0], t);
    case Guard::Kind::all:
      return join(" & ");
    case Guard::Kind::any:
      return join(" | ");
  }
  return "?";
}

std::string format_table(const ProtocolTables& t, Machine m) {
  std::ostringstream os;
  for (const Transition& tr : t.transitions) {
    if (tr.machine != m) continue;
    os << machine_name(m) << ": " << state_name(m, tr.from) << " -> "
       << state_name(m, tr.to) << " | " << guard_to_string(tr.guard, t)
       << " | ";
    std::string resets;
    for (int k = 0; k < kFlagFamilyCount; ++k) {
      if (tr.flag_resets & (1u << k)) {
        resets += std::string(resets.empty() ? "" : ",") + kFamilyNames[k] +
                  " flags";
      }
    }
    if (tr.flag_resets & kDartsBit) {
      resets += std::string(resets.empty() ? "" : ",") + "DARTS flag";
    }
    for (const TimeoutDef& td : t.timeouts) {
      if (!td.used || td.machine != m) continue;
      for (std::uint8_t s : td.reset_states) {
        if (s == tr.to) {
          resets += std::string(resets.empty() ? "" : ",") + td.name;
        }
      }
    }
    os << (resets.empty() ? "-" : resets) << "\n";
  }
  return os.str();
}

std::string format_tables(const ProtocolTables& t) {
  std::string s;
  for (int m = 0; m < kMachineCount; ++m) {
    s += format_table(t, static_cast<Machine>(m));
  }
  return s;
}

bool eval_guard(const Guard& g, const ProtocolTables& t,
                const GuardInputs& in) {
  switch (g.kind) {
    case Guard::Kind::always:
      return true;
    case Guard::Kind::self_is:
      return (*in.self_obs)[g.machine] == g.state;
    case Guard::Kind::node_is: {
      if (g.node < 0 || g.node >= t.n) {
        throw ConfigError("guard references undefined port");
      }
      const NodeOutput& o = (*in.ports)[g.node];
      if (g.machine == Machine::rmain) {
        // Remote observers only see the two-valued signal.
        return rmain_signal_supp(o[Machine::rmain]) ==
               rmain_signal_supp(g.state);
      }
      return o[g.machine] == g.state;
    }
    case Guard::Kind::at_least: {
      std::uint32_t any = 0;
      for (int k = 0; k < kFlagFamilyCount; ++k) {
        if (g.families & (1u << k)) any |= in.flags->mask[k];
      }
      const int need = g.quorum == Quorum::n_minus_f ? t.n - t.f : t.f + 1;
      return std::popcount(any) >= need;
    }
    case Guard::Kind::expired:
      if (g.timeout < 0 ||
          g.timeout >= static_cast<int>(in.expiry->size())) {
        throw ConfigError("guard references undefined timeout port");
      }
      return in.now >= (*in.expiry)[g.timeout];
    case Guard::Kind::darts:
      return in.flags->darts;
    case Guard::Kind::t1_sample:
      return in.t1_sample_ok;
    case Guard::Kind::negate:
      return !eval_guard(g.args[0], t, in);
    case Guard::Kind::all:
      for (const Guard& a : g.args) {
        if (!eval_guard(a, t, in)) return false;
      }
      return true;
    case Guard::Kind::any:
      for (const Guard& a : g.args) {
        if (eval_guard(a, t, in)) return true;
      }
      return false;
  }
  return false;
}

StepResult step_node(const NodeOutput& actual, const ProtocolTables& t,
                     const GuardInputs& in) {
  StepResult r;
  r.next = actual;
  for (int m = 0; m < kMachineCount; ++m) {
    const Machine mm = static_cast<Machine>(m);
    const std::uint8_t src = (*in.self_obs)[mm];
    const auto& cands = t.by_source[m];
    if (src >= cands.size()) continue;
    int chosen = -1;
    int enabled = 0;
    for (int k : cands[src]) {
      if (eval_guard(t.transitions[k].guard, t, in)) {
        ++enabled;
        if (chosen < 0) chosen = k;
      }
    }
    if (enabled > 1) r.ties.push_back(mm);
    if (chosen < 0) continue;
    const Transition& tr = t.transitions[chosen];
    if (tr.to == actual[mm]) continue;
    r.next[mm] = tr.to;
    r.switches.push_back({mm, actual[mm], tr.to, chosen});
    r.flag_resets |= tr.flag_resets;
  }
  return r;
}

}  // namespace fatal
