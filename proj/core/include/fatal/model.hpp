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


#ifndef FATAL_MODEL_HPP_
#define FATAL_MODEL_HPP_

#include <algorithm>
#include <random>
#include <utility>
#include <vector>

#include "fatal/common.hpp"

namespace fatal {

/**
 * Timed event trace over a finite alphabet.
 *
 * The state at time t is the state of the latest event at or before t. Events
 * are kept in strictly increasing time order and the first event is at 0.
 */
template <class State>
class SignalTrace {
 public:
  using Event = std::pair<State, Time>;

  SignalTrace() = default;

  explicit SignalTrace(std::vector<Event> events) : events_(std::move(events)) {
    validate();
  }

  void append(State s, Time t) {
    if (events_.empty() && t != 0) {
      throw StructuralError("signal trace must start at time 0");
    }
    if (!events_.empty() && t <= events_.back().second) {
      throw StructuralError("signal trace events must be strictly increasing");
    }
    events_.emplace_back(s, t);
  }

  // Appends only if the state differs from the current one.
  bool append_switch(State s, Time t) {
    if (!events_.empty() && events_.back().first == s) return false;
    append(s, t);
    return true;
  }

  const State& state_at(Time t) const {
    if (events_.empty() || events_.front().second != 0) {
      throw StructuralError("signal trace has no event at time 0");
    }
    if (t < 0) throw StructuralError("query time before 0");
    auto it = std::upper_bound(
        events_.begin(), events_.end(), t,
        [](Time q, const Event& e) { return q < e.second; });
    return std::prev(it)->first;
  }

  SignalTrace normalized() const {
    SignalTrace out;
    for (const auto& e : events_) {
      if (out.events_.empty() || !(out.events_.back().first == e.first)) {
        out.events_.push_back(e);
      }
    }
    return out;
  }

  // Times at which the normalized trace switches to s (excluding time 0).
  std::vector<Time> switches_to(const State& s) const {
    std::vector<Time> out;
    for (std::size_t k = 1; k < events_.size(); ++k) {
      if (events_[k].first == s && !(events_[k - 1].first == s)) {
        out.push_back(events_[k].second);
      }
    }
    return out;
  }

  const std::vector<Event>& events() const { return events_; }
  bool empty() const { return events_.empty(); }

 private:
  void validate() const {
    if (events_.empty() || events_.front().second != 0) {
      throw StructuralError("signal trace has no event at time 0");
    }
    for (std::size_t k = 1; k < events_.size(); ++k) {
      if (events_[k].second <= events_[k - 1].second) {
        throw StructuralError("signal trace events must be strictly increasing");
      }
    }
  }

  std::vector<Event> events_;
};

/**
 * Drifting local clock with a piecewise-constant rate.
 *
 * Rates are integers in micro-ticks per tick (1'000'000 is rate 1), so local
 * time is exact.
 */
class Clock {
 public:
  struct Segment {
    Time start;
    std::int64_t rate;
    LocalTime local_at_start;
  };

  explicit Clock(double theta, std::int64_t rate = kLocalScale);

  // Switches to a new rate at time start; start must exceed the previous one.
  void add_segment(Time start, std::int64_t rate);

  LocalTime local_at(Time t) const;

  // Earliest t with local_at(t) >= target.
  Time time_reaching(LocalTime target) const;

  double theta() const { return theta_; }
  const std::vector<Segment>& segments() const { return segments_; }

  static std::int64_t rate_from(double r) {
    return static_cast<std::int64_t>(r * static_cast<double>(kLocalScale) + 0.5);
  }

 private:
  void check_rate(std::int64_t rate) const;

  double theta_;
  std::vector<Segment> segments_;
};

/**
 * Correct FIFO channel with bounded delay.
 *
 * Delivery time is send time plus the sampled delay, clamped upward to stay
 * strictly after the previous delivery.
 */
class Channel {
 public:
  Channel(NodeId src, NodeId dst, Time d) : src_(src), dst_(dst), d_(d) {}

  Time deliver(Time send, Time delay_sample);

  // Forget the monotonicity history, used when a faulty channel turns correct.
  void reset_clamp() { last_delivery_ = -1; last_send_ = -1; }

  NodeId src() const { return src_; }
  NodeId dst() const { return dst_; }
  Time d() const { return d_; }
  Time last_delivery() const { return last_delivery_; }

 private:
  NodeId src_;
  NodeId dst_;
  Time d_;
  Time last_send_ = -1;
  Time last_delivery_ = -1;
};

/**
 * Watchdog timeout measured on a local clock. A reset at t expires at the
 * earliest time when the local time elapsed since t reaches the duration.
 */
class TimeoutPort {
 public:
  explicit TimeoutPort(LocalTime duration = 0) : duration_(duration) {}

  void reset(Time t, const Clock& clock) {
    last_reset_ = t;
    expiry_ = clock.time_reaching(clock.local_at(t) + duration_);
  }

  // Puts the port into a state with the given expiry without a reset event.
  void force_expiry(Time expiry) { expiry_ = expiry; }

  bool expired_at(Time t) const { return t >= expiry_; }
  Time expiry() const { return expiry_; }
  Time last_reset() const { return last_reset_; }
  LocalTime duration() const { return duration_; }

 private:
  LocalTime duration_;
  Time last_reset_ = -1;
  Time expiry_ = 0;
};

// Expiry times of a timeout reset at the given (sorted) times; later resets
// cancel pending expiries.
std::vector<Time> timeout_expiries(LocalTime duration, const Clock& clock,
                                   const std::vector<Time>& resets,
                                   Time horizon);

/**
 * Timeout whose duration is drawn uniformly from [lo, hi] local units on
 * every reset. The drawn duration is kept private; only the resulting expiry
 * time is visible, and only to the engine that owns the port.
 */
class RandomizedTimeoutPort {
 public:
  RandomizedTimeoutPort(LocalTime lo, LocalTime hi, std::uint64_t stream_seed);

  void reset(Time t, const Clock& clock);

  // Initial phase: a pending expiry at the given time.
  void force_expiry(Time expiry) { expiry_ = expiry; }

  bool expired_at(Time t) const { return t >= expiry_; }
  Time expiry() const { return expiry_; }
  LocalTime lo() const { return lo_; }
  LocalTime hi() const { return hi_; }

 private:
  LocalTime lo_;
  LocalTime hi_;
  std::mt19937_64 rng_;
  LocalTime drawn_ = 0;
  Time expiry_ = 0;
};

/**
 * Latched observation of a subject in a watched state.
 *
 * Set-dominant: a reset while the subject is still observed in the watched
 * state leaves the flag set.
 */
class MemoryFlag {
 public:
  // Returns true if the flag switched to 1.
  bool observe(bool watched_now) {
    if (watched_now && !value_) {
      value_ = true;
      return true;
    }
    return false;
  }

  void reset(bool watched_now) { value_ = watched_now; }
  bool value() const { return value_; }

 private:
  bool value_ = false;
};

}  // namespace fatal

#endif  // FATAL_MODEL_HPP_
