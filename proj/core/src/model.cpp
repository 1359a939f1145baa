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


#include "fatal/model.hpp"

#include <boost/random/uniform_int_distribution.hpp>
#include <string>

namespace fatal {

Clock::Clock(double theta, std::int64_t rate) : theta_(theta) {
  if (!(theta >= 1.0)) throw ConfigError("clock drift bound must be >= 1");
  check_rate(rate);
  segments_.push_back({0, rate, 0});
}

void Clock::check_rate(std::int64_t rate) const {
  const double hi = theta_ * static_cast<double>(kLocalScale) + 1e-6;
  if (rate < kLocalScale || static_cast<double>(rate) > hi) {
    throw ConfigError("clock rate " + std::to_string(rate) +
                      " outside [1, theta]");
  }
}

void Clock::add_segment(Time start, std::int64_t rate) {
  check_rate(rate);
  const Segment& last = segments_.back();
  if (start <= last.start) {
    throw ConfigError("clock segments must have increasing start times");
  }
  if (rate == last.rate) return;
  segments_.push_back({start, rate, local_at(start)});
}

LocalTime Clock::local_at(Time t) const {
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](Time q, const Segment& s) { return q < s.start; });
  const Segment& s = *std::prev(it);
  return s.local_at_start + (t - s.start) * s.rate;
}

Time Clock::time_reaching(LocalTime target) const {
  if (target <= 0) return 0;
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), target,
      [](LocalTime q, const Segment& s) { return q <= s.local_at_start; });
  const Segment& s = *std::prev(it);
  const LocalTime rem = target - s.local_at_start;
  return s.start + (rem + s.rate - 1) / s.rate;
}

Time Channel::deliver(Time send, Time delay_sample) {
  if (send < last_send_) {
    throw SimulationInvariantError("channel send times must be nondecreasing");
  }
  Time t = send + delay_sample;
  if (t <= last_delivery_) t = last_delivery_ + 1;
  if (t - send >= d_ || t < send) {
    throw SimulationInvariantError(
        "FIFO order cannot be kept within the delay bound on channel " +
        std::to_string(src_) + "->" + std::to_string(dst_));
  }
  last_send_ = send;
  last_delivery_ = t;
  return t;
}

std::vector<Time> timeout_expiries(LocalTime duration, const Clock& clock,
                                   const std::vector<Time>& resets,
                                   Time horizon) {
  std::vector<Time> out;
  for (std::size_t k = 0; k < resets.size(); ++k) {
    const Time e = clock.time_reaching(clock.local_at(resets[k]) + duration);
    const Time next = k + 1 < resets.size() ? resets[k + 1] : kNever;
    if (e < next && e <= horizon) out.push_back(e);
  }
  return out;
}

RandomizedTimeoutPort::RandomizedTimeoutPort(LocalTime lo, LocalTime hi,
                                             std::uint64_t stream_seed)
    : lo_(lo), hi_(hi), rng_(stream_seed) {
  if (lo < 0 || hi < lo) throw ConfigError("randomized timeout interval");
}

void RandomizedTimeoutPort::reset(Time t, const Clock& clock) {
  boost::random::uniform_int_distribution<LocalTime> dist(lo_, hi_);
  drawn_ = dist(rng_);
  expiry_ = clock.time_reaching(clock.local_at(t) + drawn_);
}

}  // namespace fatal
