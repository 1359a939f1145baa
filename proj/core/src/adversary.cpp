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


#include "fatal/adversary.hpp"

#include <algorithm>
#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>

namespace fatal {

FaultPlan::FaultPlan(int n, const FaultSpec& spec)
    : n_(n),
      adaptive_(spec.adaptive),
      budget_(spec.adaptive ? spec.budget : 0),
      since_(n, kNever),
      chan_(n, 0u) {
  if (!spec.adaptive) {
    for (NodeId i : spec.nodes) {
      if (i < 0 || i >= n) throw ConfigError("faulty node out of range");
      since_[i] = 0;
    }
  }
  for (auto [s, d] : spec.channels) {
    if (s < 0 || s >= n || d < 0 || d >= n || s == d) {
      throw ConfigError("faulty channel out of range");
    }
    chan_[s] |= 1u << d;
  }
}

CorruptResult FaultPlan::corrupt(NodeId node, Time t) {
  if (node < 0 || node >= n_) throw ConfigError("corrupt: node out of range");
  if (since_[node] <= t) return CorruptResult::already_faulty;
  if (!adaptive_ || budget_ <= 0) return CorruptResult::refused;
  --budget_;
  since_[node] = t;
  log_.emplace_back(node, t);
  return CorruptResult::corrupted;
}

void AdversaryStrategy::attach(const Params& p, const FaultPlan& plan,
                               std::uint64_t seed) {
  params_ = p;
  plan_ = &plan;
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), 5u};
  rng_.seed(seq);
}

std::optional<std::int64_t> AdversaryStrategy::clock_rate(NodeId, int) {
  return std::nullopt;
}

std::optional<Time> AdversaryStrategy::delay(NodeId, NodeId, Time) {
  return std::nullopt;
}

std::vector<std::pair<NodeId, NodeId>> AdversaryStrategy::controlled_ports(
    Time t) const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (NodeId s = 0; s < params_.n; ++s) {
    for (NodeId d = 0; d < params_.n; ++d) {
      if (plan_->port_controlled(s, d, t) && !plan_->is_faulty(d, t)) {
        out.emplace_back(s, d);
      }
    }
  }
  return out;
}

std::uint64_t AdversaryStrategy::garbage() {
  auto pick = [&](int hi) {
    return static_cast<std::uint8_t>(
        boost::random::uniform_int_distribution<int>(0, hi)(rng_));
  };
  NodeOutput o;
  o[Machine::core] = pick(kCoreStateCount - 1);
  o[Machine::suspect] = pick(1);
  o[Machine::ext] = pick(2);
  o[Machine::rinit] = pick(1);
  o[Machine::rmain] = pick(kRSupp + params_.n - 1);
  o[Machine::refresh] = pick(1);
  return encode_output(o);
}

Time AdversaryStrategy::forward_delay() const {
  return std::max<Time>(1, static_cast<Time>(params_.d) / 2);
}

namespace {

Time opt_time(const std::map<std::string, std::string>& o,
              const std::string& key, Time fallback) {
  auto it = o.find(key);
  if (it == o.end()) return fallback;
  try {
    return static_cast<Time>(std::stoll(it->second));
  } catch (...) {
    throw ConfigError("bad strategy option " + key + ": " + it->second);
  }
}

bool shadow_switched(const HistoryView& v, NodeId i) {
  for (const SwitchNote& s : *v.switches_now) {
    if (s.node == i) return true;
  }
  return false;
}

// Constant output: a node that looks stuck in recover.
class Silent : public AdversaryStrategy {
 public:
  std::string name() const override { return "silent"; }
  AdversaryActions step(const HistoryView& v) override {
    AdversaryActions a;
    NodeOutput o;
    o[Machine::core] = static_cast<std::uint8_t>(CoreState::recover);
    for (auto [s, d] : controlled_ports(v.now)) {
      const auto key = std::make_pair(s, d);
      if (std::find(done_.begin(), done_.end(), key) != done_.end()) continue;
      done_.push_back(key);
      a.writes.push_back({v.now + 1, s, d, encode_output(o)});
    }
    return a;
  }

 private:
  std::vector<std::pair<NodeId, NodeId>> done_;
};

// Random garbage on every controlled port at irregular intervals.
class RandomFlip : public AdversaryStrategy {
 public:
  std::string name() const override { return "random-flip"; }
  AdversaryActions step(const HistoryView& v) override {
    AdversaryActions a;
    flip(v, a, [](NodeId, NodeId) { return true; });
    return a;
  }

 protected:
  template <class Pred>
  void flip(const HistoryView& v, AdversaryActions& a, Pred pred) {
    if (v.now >= next_) {
      const Time d = static_cast<Time>(params_.d);
      for (auto [s, t] : controlled_ports(v.now)) {
        if (!pred(s, t)) continue;
        const Time at =
            v.now + boost::random::uniform_int_distribution<Time>(1, d - 1)(rng_);
        a.writes.push_back({at, s, t, garbage()});
      }
      next_ = v.now + boost::random::uniform_int_distribution<Time>(
                          std::max<Time>(1, d / 4), 2 * d)(rng_);
    }
    a.wake = next_;
  }

  Time next_ = 0;
};

// Forwards the honest shadow until crash_time, then freezes.
class Crash : public AdversaryStrategy {
 public:
  explicit Crash(Time at) : at_(at) {}
  std::string name() const override { return "crash"; }
  AdversaryActions step(const HistoryView& v) override {
    AdversaryActions a;
    if (v.now >= at_) return a;
    for (auto [s, d] : controlled_ports(v.now)) {
      if (!plan_->is_faulty(s, v.now)) continue;
      if (!started_ || shadow_switched(v, s)) {
        a.writes.push_back({v.now + forward_delay(), s, d,
                            encode_output((*v.outputs)[s])});
      }
    }
    started_ = true;
    return a;
  }

 private:
  Time at_;
  bool started_ = false;
};

// Honest towards the first `nice` correct nodes, garbage to the rest.
class PlayNice : public RandomFlip {
 public:
  explicit PlayNice(int nice) : nice_(nice) {}
  std::string name() const override { return "play-nice-subset"; }
  void attach(const Params& p, const FaultPlan& plan,
              std::uint64_t seed) override {
    RandomFlip::attach(p, plan, seed);
    if (nice_ < 0) nice_ = p.n - 2 * p.f;
    nice_mask_ = 0;
    int taken = 0;
    for (NodeId i = 0; i < p.n && taken < nice_; ++i) {
      if (!plan.is_faulty(i, 0)) {
        nice_mask_ |= 1u << i;
        ++taken;
      }
    }
  }
  AdversaryActions step(const HistoryView& v) override {
    AdversaryActions a;
    for (auto [s, d] : controlled_ports(v.now)) {
      if (!((nice_mask_ >> d) & 1u)) continue;
      if (!started_ || shadow_switched(v, s)) {
        a.writes.push_back({v.now + forward_delay(), s, d,
                            encode_output((*v.outputs)[s])});
      }
    }
    started_ = true;
    flip(v, a, [&](NodeId, NodeId d) { return !((nice_mask_ >> d) & 1u); });
    return a;
  }

 private:
  int nice_;
  std::uint32_t nice_mask_ = 0;
  bool started_ = false;
};

// Shadow output with the init signal toggling every `toggle` ticks and the
// resynchronization signal stuck at supp.
class InitSpammer : public AdversaryStrategy {
 public:
  explicit InitSpammer(Time toggle) : toggle_(toggle) {}
  std::string name() const override { return "init-spammer"; }
  AdversaryActions step(const HistoryView& v) override {
    AdversaryActions a;
    const Time period =
        toggle_ > 0 ? toggle_ : static_cast<Time>(params_.d);
    const bool tick = v.now >= next_;
    if (tick) {
      init_ = !init_;
      next_ = v.now + period;
    }
    for (auto [s, d] : controlled_ports(v.now)) {
      if (!plan_->is_faulty(s, v.now)) continue;
      if (tick || shadow_switched(v, s)) {
        NodeOutput o = (*v.outputs)[s];
        o[Machine::rinit] = static_cast<std::uint8_t>(
            init_ ? InitState::init : InitState::wait);
        o[Machine::rmain] = static_cast<std::uint8_t>(kRSupp + s);
        a.writes.push_back({v.now + 1, s, d, encode_output(o)});
      }
    }
    a.wake = next_;
    return a;
  }

 private:
  Time toggle_;
  Time next_ = 0;
  bool init_ = false;
};

// Clocks pinned to opposite extremes: even nodes at rate 1, odd at theta.
class WorstDrift : public RandomFlip {
 public:
  std::string name() const override { return "worst-drift"; }
  std::optional<std::int64_t> clock_rate(NodeId node, int) override {
    if (node % 2 == 0) return kLocalScale;
    return static_cast<std::int64_t>(
        std::floor(params_.theta * static_cast<double>(kLocalScale)));
  }
};

// Every correct channel at the largest admissible delay.
class MaxDelay : public RandomFlip {
 public:
  std::string name() const override { return "max-delay"; }
  std::optional<Time> delay(NodeId, NodeId, Time) override {
    return static_cast<Time>(params_.d) - 1;
  }
};

// Adaptive: corrupts every node the moment it generates an init signal,
// then lets it behave arbitrarily.
class InitKiller : public RandomFlip {
 public:
  std::string name() const override { return "adaptive-init-killer"; }
  AdversaryActions step(const HistoryView& v) override {
    AdversaryActions a;
    int budget = v.plan->budget_left();
    for (const SwitchNote& s : *v.switches_now) {
      if (budget <= 0) break;
      if (s.machine == Machine::rinit &&
          s.to == static_cast<std::uint8_t>(InitState::init) &&
          !v.plan->is_faulty(s.node, v.now)) {
        a.corrupt.push_back(s.node);
        --budget;
      }
    }
    flip(v, a, [](NodeId, NodeId) { return true; });
    return a;
  }
};

}  // namespace

void RecordingStrategy::attach(const Params& p, const FaultPlan& plan,
                               std::uint64_t seed) {
  AdversaryStrategy::attach(p, plan, seed);
  inner_->attach(p, plan, seed);
}

AdversaryActions RecordingStrategy::step(const HistoryView& view) {
  AdversaryActions a = inner_->step(view);
  log_.steps.emplace_back(view.now, a);
  return a;
}

std::optional<std::int64_t> RecordingStrategy::clock_rate(NodeId node,
                                                          int segment) {
  auto r = inner_->clock_rate(node, segment);
  log_.rates[{node, segment}] = r;
  return r;
}

std::optional<Time> RecordingStrategy::delay(NodeId src, NodeId dst,
                                             Time send) {
  auto r = inner_->delay(src, dst, send);
  log_.delays.push_back(r);
  return r;
}

AdversaryActions TranscriptStrategy::step(const HistoryView& view) {
  if (next_step_ < log_.steps.size() &&
      log_.steps[next_step_].first == view.now) {
    return log_.steps[next_step_++].second;
  }
  return {};
}

std::optional<std::int64_t> TranscriptStrategy::clock_rate(NodeId node,
                                                           int segment) {
  auto it = log_.rates.find({node, segment});
  return it == log_.rates.end() ? std::nullopt : it->second;
}

std::optional<Time> TranscriptStrategy::delay(NodeId, NodeId, Time) {
  if (next_delay_ < log_.delays.size()) return log_.delays[next_delay_++];
  return std::nullopt;
}

std::vector<std::string> strategy_names() {
  return {"silent",      "crash",       "random-flip",
          "play-nice-subset", "init-spammer", "worst-drift",
          "max-delay",   "adaptive-init-killer"};
}

std::unique_ptr<AdversaryStrategy> make_strategy(
    const std::string& name, const std::map<std::string, std::string>& o) {
  if (name == "silent") return std::make_unique<Silent>();
  if (name == "crash") return std::make_unique<Crash>(opt_time(o, "crash_time", 0));
  if (name == "random-flip") return std::make_unique<RandomFlip>();
  if (name == "play-nice-subset") {
    return std::make_unique<PlayNice>(static_cast<int>(opt_time(o, "nice", -1)));
  }
  if (name == "init-spammer") {
    return std::make_unique<InitSpammer>(opt_time(o, "toggle", 0));
  }
  if (name == "worst-drift") return std::make_unique<WorstDrift>();
  if (name == "max-delay") return std::make_unique<MaxDelay>();
  if (name == "adaptive-init-killer") return std::make_unique<InitKiller>();
  throw ConfigError("unknown adversary strategy: " + name);
}

}  // namespace fatal
