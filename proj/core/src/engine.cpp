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


#include "fatal/engine.hpp"

#include <algorithm>
#include <bit>
#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>
#include <optional>
#include <queue>
#include <random>
#include <set>

#include "fatal/model.hpp"
#include "fatal/protocol.hpp"

namespace fatal {

namespace {

enum EventKind : std::uint8_t {
  kDelivery = 0,
  kExpiry = 1,
  kDarts = 2,
  kWake = 3,
  kReset = 4,
  kKick = 5
};

struct Event {
  Time t;
  NodeId node;
  std::uint8_t kind;
  bool forged;
  std::uint64_t seq;
  NodeId src;
  int idx;
  std::uint64_t value;
  Time sent;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.node != b.node) return a.node > b.node;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t tag, std::uint32_t a = 0,
                       std::uint32_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), tag, a, b};
  return std::mt19937_64(seq);
}

template <class T>
T uniform(std::mt19937_64& rng, T lo, T hi) {
  return boost::random::uniform_int_distribution<T>(lo, hi)(rng);
}

LocalTime local_units(double ticks) {
  return static_cast<LocalTime>(
      std::ceil(ticks * static_cast<double>(kLocalScale) - 1e-6));
}

struct NodeRt {
  NodeOutput actual;
  std::vector<NodeOutput> ports;
  FlagBank flags;
  bool darts_port = false;
  std::vector<Time> expiry;
  std::vector<TimeoutPort> tports;
  RandomizedTimeoutPort r3;
  Clock clock;
  bool t1_ok = false;

  NodeRt(LocalTime lo, LocalTime hi, std::uint64_t seed, double theta)
      : r3(lo, hi, seed), clock(theta) {}
};

class Engine {
 public:
  Engine(const SimConfig& cfg, AdversaryStrategy& adv);
  ExecutionTrace run(RunStats* stats);

 private:
  void push(Event e) {
    e.seq = seq_++;
    q_.push(e);
  }
  void record(Time t, NodeId node, RecordKind k, std::uint8_t sub,
              std::int32_t aux, std::uint64_t value) {
    trace_.records.push_back({t, node, k, sub, aux, value});
  }
  bool full() const { return cfg_.record == RecordLevel::full; }

  void build_clocks();
  void init_random_node(NodeId i, Time now, std::mt19937_64& rng);
  void init_uniform(bool accept);
  void record_node_snapshot(NodeId i, Time now);
  void set_port(NodeId dst, NodeId src, const NodeOutput& o, Time now);
  void set_expiry(NodeId i, int idx, Time e);
  void reset_timeout(NodeId i, int idx, Time now);
  void apply_flag_resets(NodeId i, std::uint32_t mask, Time now);
  void step_one(NodeId i, Time now);
  void broadcast(NodeId i, Time now);
  void call_adversary(Time now);
  void apply(const Event& e);
  Time sample_delay(NodeId src, NodeId dst, Time now);

  SimConfig cfg_;
  AdversaryStrategy& adv_;
  int n_;
  Time d_;
  Time horizon_;
  ProtocolTables tables_;
  std::array<std::vector<std::vector<int>>, kMachineCount> reset_map_;
  std::vector<LocalTime> durations_;
  FaultPlan plan_;
  std::vector<NodeRt> nodes_;
  std::vector<std::vector<Channel>> chan_;
  std::vector<std::vector<std::mt19937_64>> delay_rng_;
  std::mt19937_64 init_rng_;
  std::mt19937_64 reset_rng_;
  std::priority_queue<Event, std::vector<Event>, Later> q_;
  std::uint64_t seq_ = 0;
  ExecutionTrace trace_;

  std::vector<char> touched_;
  std::vector<char> nostep_;
  std::vector<NodeId> outgoing_;
  std::vector<SwitchNote> switches_now_;
  std::vector<NodeOutput> outputs_;
  std::set<Time> wakes_;
  bool wake_now_ = false;
  RunStats stats_;
};

Engine::Engine(const SimConfig& cfg, AdversaryStrategy& adv)
    : cfg_(cfg),
      adv_(adv),
      n_(cfg.params.n),
      d_(cfg.d_ticks()),
      horizon_(cfg.horizon),
      tables_(build_tables(cfg.params, cfg.timeouts, cfg.fast_rejoin)),
      plan_(cfg.params.n, cfg.faults),
      init_rng_(stream(cfg.seed, 1)),
      reset_rng_(stream(cfg.seed, 6)) {
  if (n_ < 1 || n_ > kMaxNodes) throw ConfigError("n out of range");
  if (d_ < 2) throw ConfigError("d must be at least 2 ticks");
  for (const auto& r : cfg.resets) {
    if (r.at <= 0) throw ConfigError("transient resets must happen after 0");
  }
  trace_.config = cfg;

  for (int m = 0; m < kMachineCount; ++m) {
    reset_map_[m].assign(tables_.state_count(static_cast<Machine>(m)), {});
  }
  for (int k = 0; k < static_cast<int>(tables_.timeouts.size()); ++k) {
    const TimeoutDef& td = tables_.timeouts[k];
    durations_.push_back(local_units(td.duration));
    if (!td.used) continue;
    for (std::uint8_t s : td.reset_states) {
      reset_map_[static_cast<int>(td.machine)][s].push_back(k);
    }
  }
  const LocalTime r3_lo = local_units(cfg.timeouts.R3_lo);
  const LocalTime r3_hi = std::max(
      r3_lo, static_cast<LocalTime>(std::floor(
                 cfg.timeouts.R3_hi * static_cast<double>(kLocalScale))));
  const int nt = static_cast<int>(tables_.timeouts.size());
  for (NodeId i = 0; i < n_; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                      static_cast<std::uint32_t>(cfg.seed >> 32), 4u,
                      static_cast<std::uint32_t>(i)};
    std::uint32_t w[2];
    seq.generate(w, w + 2);
    const std::uint64_t r3_seed = (static_cast<std::uint64_t>(w[1]) << 32) | w[0];
    nodes_.emplace_back(r3_lo, r3_hi, r3_seed, cfg.params.theta);
    NodeRt& nd = nodes_.back();
    nd.ports.assign(n_, NodeOutput{});
    nd.expiry.assign(nt, 0);
    for (int k = 0; k < nt; ++k) nd.tports.emplace_back(durations_[k]);
  }
  chan_.resize(n_);
  delay_rng_.resize(n_);
  for (NodeId i = 0; i < n_; ++i) {
    for (NodeId j = 0; j < n_; ++j) {
      chan_[i].emplace_back(i, j, d_);
      delay_rng_[i].push_back(stream(cfg.seed, 3, i, j));
    }
  }
  touched_.assign(n_, 0);
  nostep_.assign(n_, 0);
  outputs_.assign(n_, NodeOutput{});
  adv_.attach(cfg.params, plan_, cfg.seed);
  build_clocks();
}

void Engine::build_clocks() {
  const Time seg = cfg_.clock_segment > 0 ? cfg_.clock_segment : 20 * d_;
  const std::int64_t fast = static_cast<std::int64_t>(
      std::floor(cfg_.params.theta * static_cast<double>(kLocalScale)));
  for (NodeId i = 0; i < n_; ++i) {
    auto rng = stream(cfg_.seed, 2, i);
    Clock& c = nodes_[i].clock;
    Time start = 0;
    for (int k = 0;; ++k) {
      std::int64_t rate = kLocalScale;
      switch (cfg_.clocks) {
        case ClockPolicy::constant:
          break;
        case ClockPolicy::random:
          rate = uniform<std::int64_t>(rng, kLocalScale, fast);
          break;
        case ClockPolicy::extremes:
          rate = i % 2 == 0 ? kLocalScale : fast;
          break;
        case ClockPolicy::random_extremes:
          rate = uniform<int>(rng, 0, 1) ? fast : kLocalScale;
          break;
      }
      if (auto o = adv_.clock_rate(i, k)) rate = *o;
      if (k == 0) {
        c = Clock(cfg_.params.theta, rate);
      } else {
        c.add_segment(start, rate);
      }
      start += uniform<Time>(rng, std::max<Time>(1, seg / 2), seg + seg / 2);
      if (start > horizon_) break;
    }
  }
}

Time Engine::sample_delay(NodeId src, NodeId dst, Time now) {
  if (auto o = adv_.delay(src, dst, now)) {
    if (*o < 1 || *o >= d_) {
      throw ContainmentError("adversary delay outside [1, d)");
    }
    return *o;
  }
  auto& rng = delay_rng_[src][dst];
  switch (cfg_.delays) {
    case DelayPolicy::random:
      return uniform<Time>(rng, 1, d_ - 1);
    case DelayPolicy::max:
      return d_ - 1;
    case DelayPolicy::min:
      return 1;
    case DelayPolicy::half:
      return std::max<Time>(1, d_ / 2);
    case DelayPolicy::random_extremes:
      return uniform<int>(rng, 0, 1) ? d_ - 1 : 1;
  }
  return d_ - 1;
}

void Engine::set_expiry(NodeId i, int idx, Time e) {
  nodes_[i].expiry[idx] = e;
  if (e > 0 && e <= horizon_) {
    push({e, i, kExpiry, false, 0, -1, idx, 0, 0});
  }
}

void Engine::reset_timeout(NodeId i, int idx, Time now) {
  NodeRt& nd = nodes_[i];
  Time e;
  if (idx == static_cast<int>(TimeoutKind::R3)) {
    nd.r3.reset(now, nd.clock);
    e = nd.r3.expiry();
  } else {
    nd.tports[idx].reset(now, nd.clock);
    e = nd.tports[idx].expiry();
  }
  set_expiry(i, idx, e);
  if (full()) record(now, i, RecordKind::timeout, 0, idx, 0);
}

void Engine::set_port(NodeId dst, NodeId src, const NodeOutput& o, Time now) {
  NodeRt& nd = nodes_[dst];
  nd.ports[src] = o;
  touched_[dst] = 1;
  if (full()) {
    record(now, dst, RecordKind::port, 0, src, encode_output(o));
  }
  for (int f = 0; f < kFlagFamilyCount; ++f) {
    const auto fam = static_cast<FlagFamily>(f);
    if (watched(fam, o) && !nd.flags.get(fam, src)) {
      nd.flags.set(fam, src, true);
      if (full()) record(now, dst, RecordKind::flag, f, src, 1);
    }
  }
}

void Engine::apply_flag_resets(NodeId i, std::uint32_t mask, Time now) {
  NodeRt& nd = nodes_[i];
  for (int f = 0; f < kFlagFamilyCount; ++f) {
    if (!(mask & (1u << f))) continue;
    const auto fam = static_cast<FlagFamily>(f);
    for (NodeId j = 0; j < n_; ++j) {
      const bool w = watched(fam, nd.ports[j]);
      if (nd.flags.get(fam, j) != w) {
        nd.flags.set(fam, j, w);
        if (full()) record(now, i, RecordKind::flag, f, j, w);
      }
    }
  }
  if ((mask & kDartsBit) && nd.flags.darts != nd.darts_port) {
    nd.flags.darts = nd.darts_port;
    if (full()) record(now, i, RecordKind::flag, kFlagDarts, 0, nd.darts_port);
  }
}

void Engine::record_node_snapshot(NodeId i, Time now) {
  NodeRt& nd = nodes_[i];
  for (int m = 0; m < kMachineCount; ++m) {
    record(now, i, RecordKind::state, m, 0, nd.actual.s[m]);
  }
  if (!full()) return;
  for (NodeId j = 0; j < n_; ++j) {
    record(now, i, RecordKind::port, 0, j, encode_output(nd.ports[j]));
  }
  for (int f = 0; f < kFlagFamilyCount; ++f) {
    for (NodeId j = 0; j < n_; ++j) {
      record(now, i, RecordKind::flag, f, j,
             nd.flags.get(static_cast<FlagFamily>(f), j));
    }
  }
  record(now, i, RecordKind::flag, kFlagDarts, 0, nd.flags.darts);
  record(now, i, RecordKind::flag, kFlagT1Sample, 0, nd.t1_ok);
  for (int k = 0; k < static_cast<int>(nd.expiry.size()); ++k) {
    record(now, i, RecordKind::timeout, 0, k, nd.expiry[k] <= now ? 1 : 0);
  }
}

void Engine::init_random_node(NodeId i, Time now, std::mt19937_64& rng) {
  NodeRt& nd = nodes_[i];
  auto pick = [&](int hi) { return static_cast<std::uint8_t>(uniform(rng, 0, hi)); };
  auto random_output = [&] {
    NodeOutput o;
    o[Machine::core] = pick(kCoreStateCount - 1);
    o[Machine::suspect] = pick(1);
    o[Machine::ext] = pick(2);
    o[Machine::rinit] = pick(1);
    o[Machine::rmain] = pick(kRSupp + n_ - 1);
    o[Machine::refresh] = pick(cfg_.fast_rejoin ? 1 : 0);
    return o;
  };
  nd.actual = random_output();
  for (NodeId j = 0; j < n_; ++j) nd.ports[j] = random_output();
  const std::uint32_t all = n_ >= 32 ? ~0u : ((1u << n_) - 1);
  for (int f = 0; f < kFlagFamilyCount; ++f) {
    nd.flags.mask[f] = static_cast<std::uint32_t>(uniform<std::uint64_t>(rng, 0, all));
    for (NodeId j = 0; j < n_; ++j) {
      if (watched(static_cast<FlagFamily>(f), nd.ports[j])) {
        nd.flags.set(static_cast<FlagFamily>(f), j, true);
      }
    }
  }
  nd.flags.darts = uniform(rng, 0, 1) == 1 || nd.darts_port;
  nd.t1_ok = uniform(rng, 0, 1) == 1;
  for (int k = 0; k < static_cast<int>(nd.expiry.size()); ++k) {
    const TimeoutDef& td = tables_.timeouts[k];
    const double span = td.randomized ? td.hi : td.duration;
    const Time rem = uniform<Time>(rng, 0, static_cast<Time>(std::ceil(span)));
    if (k == static_cast<int>(TimeoutKind::R3)) nd.r3.force_expiry(now + rem);
    else nd.tports[k].force_expiry(now + rem);
    set_expiry(i, k, now + rem);
  }
  outputs_[i] = nd.actual;
}

void Engine::init_uniform(bool accept) {
  NodeOutput o;
  o[Machine::core] = static_cast<std::uint8_t>(accept ? CoreState::accept
                                                      : CoreState::ready);
  const int r3 = static_cast<int>(TimeoutKind::R3);
  for (NodeId i = 0; i < n_; ++i) {
    NodeRt& nd = nodes_[i];
    nd.actual = o;
    outputs_[i] = o;
    for (NodeId j = 0; j < n_; ++j) nd.ports[j] = o;
    nd.flags = FlagBank{};
    if (accept) {
      for (NodeId j = 0; j < n_; ++j) nd.flags.set(FlagFamily::accept, j, true);
    }
    nd.flags.darts = nd.darts_port;
    for (int k = 0; k < static_cast<int>(nd.expiry.size()); ++k) {
      nd.tports[k].force_expiry(0);
      nd.expiry[k] = 0;
    }
    const Time hi = static_cast<Time>(std::ceil(cfg_.timeouts.R3_hi));
    const Time e3 = uniform<Time>(init_rng_, 1, std::max<Time>(1, hi));
    nd.r3.force_expiry(e3);
    set_expiry(i, r3, e3);
    if (cfg_.fast_rejoin) {
      const int tr = static_cast<int>(TimeoutKind::Trefresh);
      const Time e = uniform<Time>(
          init_rng_, 1,
          std::max<Time>(1, static_cast<Time>(tables_.timeouts[tr].duration)));
      nd.tports[tr].force_expiry(e);
      set_expiry(i, tr, e);
    }
    if (accept) {
      reset_timeout(i, static_cast<int>(TimeoutKind::T1), 0);
      reset_timeout(i, static_cast<int>(TimeoutKind::T2), 0);
    } else {
      const Time e = uniform<Time>(init_rng_, 1, 2 * d_);
      for (TimeoutKind k : {TimeoutKind::T3, TimeoutKind::T4}) {
        nd.tports[static_cast<int>(k)].force_expiry(e);
        set_expiry(i, static_cast<int>(k), e);
      }
    }
  }
  if (full()) {
    // The snapshot carries the timeout status, so drop the reset records.
    trace_.records.clear();
  }
}

void Engine::broadcast(NodeId i, Time now) {
  const std::uint64_t v = encode_output(nodes_[i].actual);
  for (NodeId j = 0; j < n_; ++j) {
    if (j != i && plan_.port_controlled(i, j, now)) continue;
    const Time at = chan_[i][j].deliver(now, sample_delay(i, j, now));
    if (at <= horizon_) push({at, j, kDelivery, false, 0, i, 0, v, now});
  }
}

void Engine::step_one(NodeId i, Time now) {
  NodeRt& nd = nodes_[i];
  ++stats_.steps;
  const int t1 = static_cast<int>(TimeoutKind::T1);
  if (nd.expiry[t1] == now) {
    nd.t1_ok = std::popcount(nd.flags.mask[0]) >= n_ - cfg_.params.f;
    if (full()) record(now, i, RecordKind::flag, kFlagT1Sample, 0, nd.t1_ok);
  }
  GuardInputs in;
  in.self = i;
  in.self_obs = &nd.ports[i];
  in.ports = &nd.ports;
  in.flags = &nd.flags;
  in.expiry = &nd.expiry;
  in.now = now;
  in.t1_sample_ok = nd.t1_ok;
  const StepResult r = step_node(nd.actual, tables_, in);
  for (Machine m : r.ties) {
    record(now, i, RecordKind::tie, static_cast<std::uint8_t>(m), 0, 0);
  }
  if (r.switches.empty()) return;
  for (const Switch& s : r.switches) {
    record(now, i, RecordKind::state, static_cast<std::uint8_t>(s.machine), 0,
           s.to);
    switches_now_.push_back({i, s.machine, s.from, s.to});
  }
  nd.actual = r.next;
  outputs_[i] = nd.actual;
  for (const Switch& s : r.switches) {
    for (int idx : reset_map_[static_cast<int>(s.machine)][s.to]) {
      reset_timeout(i, idx, now);
    }
  }
  apply_flag_resets(i, r.flag_resets, now);
  outgoing_.push_back(i);
}

void Engine::call_adversary(Time now) {
  ++stats_.adversary_calls;
  HistoryView v;
  v.now = now;
  v.params = &cfg_.params;
  v.timeouts = &cfg_.timeouts;
  v.outputs = &outputs_;
  v.switches_now = &switches_now_;
  v.plan = &plan_;
  v.trace = &trace_;
  AdversaryActions a = adv_.step(v);
  for (NodeId c : a.corrupt) {
    if (plan_.corrupt(c, now) == CorruptResult::corrupted) {
      record(now, c, RecordKind::fault, 0, -1, 0);
    }
  }
  for (const PortWrite& w : a.writes) {
    if (w.src < 0 || w.src >= n_ || w.dst < 0 || w.dst >= n_) {
      throw ContainmentError("adversary write to an undefined port");
    }
    if (w.t <= now) {
      throw ContainmentError("adversary write at or before the current time");
    }
    if (!plan_.port_controlled(w.src, w.dst, now)) {
      throw ContainmentError("adversary write to non-faulty port " +
                             std::to_string(w.src) + "->" +
                             std::to_string(w.dst));
    }
    if (w.t <= horizon_) {
      push({w.t, w.dst, kDelivery, true, 0, w.src, 0, w.value, now});
    }
  }
  if (a.wake > now && a.wake <= horizon_ && wakes_.insert(a.wake).second) {
    push({a.wake, -1, kWake, false, 0, -1, 0, 0, 0});
  }
}

void Engine::apply(const Event& e) {
  ++stats_.events;
  switch (e.kind) {
    case kDelivery:
      if (e.src == e.node && !e.forged) {
        record(e.t, e.node, RecordKind::loop, 0, 0,
               static_cast<std::uint64_t>(e.sent));
      }
      set_port(e.node, e.src, decode_output(e.value), e.t);
      break;
    case kExpiry:
      if (nodes_[e.node].expiry[e.idx] == e.t) {
        touched_[e.node] = 1;
        if (full()) record(e.t, e.node, RecordKind::timeout, 0, e.idx, 1);
      }
      break;
    case kDarts: {
      NodeRt& nd = nodes_[e.node];
      nd.darts_port = !nd.darts_port;
      touched_[e.node] = 1;
      if (nd.darts_port && !nd.flags.darts) {
        nd.flags.darts = true;
        if (full()) record(e.t, e.node, RecordKind::flag, kFlagDarts, 0, 1);
      }
      const Time next = e.t + cfg_.darts_period;
      if (next <= horizon_) push({next, e.node, kDarts, false, 0, -1, 0, 0, 0});
      break;
    }
    case kWake:
      wakes_.erase(e.t);
      wake_now_ = true;
      break;
    case kReset:
      record(e.t, e.node, RecordKind::reset, 0, 0, 0);
      init_random_node(e.node, e.t, reset_rng_);
      record_node_snapshot(e.node, e.t);
      nostep_[e.node] = 1;
      outgoing_.push_back(e.node);
      if (e.t + 1 <= horizon_) {
        push({e.t + 1, e.node, kKick, false, 0, -1, 0, 0, 0});
      }
      break;
    case kKick:
      touched_[e.node] = 1;
      break;
  }
}

ExecutionTrace Engine::run(RunStats* stats) {
  for (NodeId i = 0; i < n_; ++i) {
    nodes_[i].darts_port = cfg_.darts == DartsScript::on;
  }
  switch (cfg_.init) {
    case InitPolicy::random:
      for (NodeId i = 0; i < n_; ++i) init_random_node(i, 0, init_rng_);
      break;
    case InitPolicy::synchronized:
      init_uniform(false);
      break;
    case InitPolicy::accept:
      init_uniform(true);
      break;
  }
  for (NodeId i = 0; i < n_; ++i) record_node_snapshot(i, 0);
  for (NodeId i = 0; i < n_; ++i) {
    if (plan_.is_faulty(i, 0)) record(0, i, RecordKind::fault, 0, -1, 0);
  }
  for (auto [s, dst] : cfg_.faults.channels) {
    record(0, dst, RecordKind::fault, 0, s, 0);
  }
  // Channel contents at time 0: every node's state is in flight.
  if (cfg_.init == InitPolicy::random) {
    for (NodeId i = 0; i < n_; ++i) broadcast(i, 0);
  }
  for (NodeId i = 0; i < n_; ++i) {
    if (1 <= horizon_) push({1, i, kKick, false, 0, -1, 0, 0, 0});
    if (cfg_.darts == DartsScript::periodic && cfg_.darts_period <= horizon_) {
      push({cfg_.darts_period, i, kDarts, false, 0, -1, 0, 0, 0});
    }
  }
  for (const auto& r : cfg_.resets) {
    if (r.node < 0 || r.node >= n_) throw ConfigError("reset node out of range");
    if (r.at <= horizon_) push({r.at, r.node, kReset, false, 0, -1, 0, 0, 0});
  }
  call_adversary(0);

  try {
    while (!q_.empty() && q_.top().t <= horizon_) {
      const Time now = q_.top().t;
      std::fill(touched_.begin(), touched_.end(), 0);
      std::fill(nostep_.begin(), nostep_.end(), 0);
      outgoing_.clear();
      switches_now_.clear();
      wake_now_ = false;
      while (!q_.empty() && q_.top().t == now) {
        const Event e = q_.top();
        q_.pop();
        apply(e);
      }
      for (NodeId i = 0; i < n_; ++i) {
        if (touched_[i] && !nostep_[i]) step_one(i, now);
      }
      if (!switches_now_.empty() || wake_now_) call_adversary(now);
      for (NodeId i : outgoing_) broadcast(i, now);
    }
  } catch (const SimulationInvariantError& e) {
    std::string dump = e.what();
    dump += "\nlast trace records:";
    const std::size_t from =
        trace_.records.size() > 20 ? trace_.records.size() - 20 : 0;
    for (std::size_t k = from; k < trace_.records.size(); ++k) {
      dump += "\n  " + format_record(trace_.records[k]);
    }
    throw SimulationInvariantError(dump);
  }
  if (stats) *stats = stats_;
  return std::move(trace_);
}

}  // namespace

ExecutionTrace run(const SimConfig& cfg, RunStats* stats) {
  auto adv = make_strategy(cfg.faults.strategy, cfg.faults.options);
  return run(cfg, *adv, stats);
}

ExecutionTrace run(const SimConfig& cfg, AdversaryStrategy& strategy,
                   RunStats* stats) {
  if (cfg.timeouts.T1 <= 0) {
    throw ConfigError("configuration must be resolved before running");
  }
  Engine e(cfg, strategy);
  return e.run(stats);
}

std::vector<std::string> audit_transitions(const ExecutionTrace& trace) {
  const SimConfig& cfg = trace.config;
  if (cfg.record != RecordLevel::full) {
    throw ConfigError("transition audit needs a full-level trace");
  }
  const int n = cfg.params.n;
  const ProtocolTables t =
      build_tables(cfg.params, cfg.timeouts, cfg.fast_rejoin);
  const int nt = static_cast<int>(t.timeouts.size());
  struct Rebuilt {
    NodeOutput actual;
    std::vector<NodeOutput> ports;
    FlagBank flags;
    std::vector<Time> last_reset, last_expire;
    bool t1_ok = false;
  };
  std::vector<Rebuilt> st(n);
  for (auto& s : st) {
    s.ports.assign(n, NodeOutput{});
    s.last_reset.assign(nt, -1);
    s.last_expire.assign(nt, -1);
  }
  std::vector<std::string> out;
  std::vector<Time> reset_at(n, -1);
  const auto& recs = trace.records;
  std::size_t k = 0;
  while (k < recs.size()) {
    const TraceRecord& r = recs[k];
    Rebuilt& s = st[r.node];
    if (r.kind == RecordKind::state && r.t > 0 && reset_at[r.node] != r.t) {
      // First switch record of this node at this instant: evaluate here.
      std::vector<Time> expiry(nt, kNever);
      for (int x = 0; x < nt; ++x) {
        if (s.last_expire[x] >= 0 && s.last_expire[x] >= s.last_reset[x]) {
          expiry[x] = s.last_expire[x];
        }
      }
      GuardInputs in;
      in.self = r.node;
      in.self_obs = &s.ports[r.node];
      in.ports = &s.ports;
      in.flags = &s.flags;
      in.expiry = &expiry;
      in.now = r.t;
      in.t1_sample_ok = s.t1_ok;
      const StepResult sr = step_node(s.actual, t, in);
      NodeOutput rec = s.actual;
      std::size_t e = k;
      while (e < recs.size() && recs[e].t == r.t && recs[e].node == r.node &&
             recs[e].kind == RecordKind::state) {
        rec.s[recs[e].sub] = static_cast<std::uint8_t>(recs[e].value);
        ++e;
      }
      if (!(rec == sr.next)) {
        out.push_back("t=" + std::to_string(r.t) + " node " +
                      std::to_string(r.node) +
                      ": recorded switch not justified by guards");
      }
      s.actual = rec;
      k = e;
      continue;
    }
    switch (r.kind) {
      case RecordKind::state:
        s.actual.s[r.sub] = static_cast<std::uint8_t>(r.value);
        break;
      case RecordKind::reset:
        reset_at[r.node] = r.t;
        break;
      case RecordKind::port:
        s.ports[r.aux] = decode_output(r.value);
        break;
      case RecordKind::flag:
        if (r.sub < kFlagFamilyCount) {
          s.flags.set(static_cast<FlagFamily>(r.sub), r.aux, r.value != 0);
        } else if (r.sub == kFlagDarts) {
          s.flags.darts = r.value != 0;
        } else {
          s.t1_ok = r.value != 0;
        }
        break;
      case RecordKind::timeout:
        if (r.value) {
          s.last_expire[r.aux] = r.t;
        } else {
          s.last_reset[r.aux] = r.t;
          if (s.last_expire[r.aux] >= r.t) s.last_expire[r.aux] = -1;
        }
        break;
      default:
        break;
    }
    ++k;
  }
  return out;
}

}  // namespace fatal
