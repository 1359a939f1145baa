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

#include <algorithm>
#include <cmath>
#include <random>
#include <type_traits>

#include "fatal/adversary.hpp"
#include "fatal/model.hpp"

namespace fatal {
namespace {

using Sig = SignalTrace<char>;

TEST(Signal, SingleEvent) {
  Sig s({{'A', 0}});
  EXPECT_EQ(s.state_at(5), 'A');
}

TEST(Signal, EventAtQueryTime) {
  Sig s({{'A', 0}, {'B', 3}});
  EXPECT_EQ(s.state_at(3), 'B');
  EXPECT_EQ(s.state_at(2), 'A');
}

TEST(Signal, IdempotentEventMatchesNormalized) {
  Sig raw({{'A', 0}, {'A', 2}, {'B', 3}});
  Sig norm({{'A', 0}, {'B', 3}});
  EXPECT_EQ(raw.state_at(2), 'A');
  for (Time t = 0; t <= 10; ++t) EXPECT_EQ(raw.state_at(t), norm.state_at(t));
  EXPECT_EQ(raw.normalized().events(), norm.events());
}

TEST(Signal, NormalizeExamples) {
  EXPECT_EQ(Sig({{'A', 0}}).normalized().events(), Sig({{'A', 0}}).events());
  Sig s({{'A', 0}, {'A', 2}, {'B', 3}, {'B', 4}});
  const std::vector<Sig::Event> want{{'A', 0}, {'B', 3}};
  EXPECT_EQ(s.normalized().events(), want);
}

TEST(Signal, NormalizeRandomDenseGrid) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Sig::Event> ev{{'A', 0}};
    Time t = 0;
    for (int k = 0; k < 40; ++k) {
      t += 1 + static_cast<Time>(rng() % 5);
      ev.emplace_back(static_cast<char>('A' + rng() % 3), t);
    }
    Sig s(ev);
    Sig n = s.normalized();
    for (Time q = 0; q <= t + 3; ++q) ASSERT_EQ(s.state_at(q), n.state_at(q));
    const auto& ne = n.events();
    for (std::size_t k = 1; k < ne.size(); ++k) {
      ASSERT_NE(ne[k].first, ne[k - 1].first);
    }
  }
}

TEST(Signal, MalformedTraces) {
  EXPECT_THROW(Sig({{'A', 1}}), StructuralError);
  EXPECT_THROW(Sig({{'A', 0}, {'B', 0}}), StructuralError);
  Sig empty;
  EXPECT_THROW(empty.state_at(0), StructuralError);
}

TEST(ClockTest, LocalTime) {
  Clock one(1.2);
  EXPECT_EQ(one.local_at(100), 100 * kLocalScale);
  Clock fast(1.2, Clock::rate_from(1.2));
  EXPECT_EQ(fast.local_at(100), 120 * kLocalScale);
  Clock two(1.2);
  two.add_segment(50, Clock::rate_from(1.2));
  EXPECT_EQ(two.local_at(100), 110 * kLocalScale);
}

TEST(ClockTest, RateOutsideEnvelope) {
  EXPECT_THROW(Clock(1.2, Clock::rate_from(1.3)), ConfigError);
  EXPECT_THROW(Clock(1.2, Clock::rate_from(0.9)), ConfigError);
  Clock c(1.2);
  EXPECT_THROW(c.add_segment(10, Clock::rate_from(1.25)), ConfigError);
}

TEST(ClockTest, DriftEnvelopeProperty) {
  std::mt19937_64 rng(3);
  Clock c(1.2);
  Time t = 0;
  for (int k = 0; k < 30; ++k) {
    t += 1 + static_cast<Time>(rng() % 100);
    c.add_segment(t, kLocalScale + static_cast<std::int64_t>(rng() % 200001));
  }
  for (int k = 0; k < 500; ++k) {
    Time a = static_cast<Time>(rng() % 3000), b = static_cast<Time>(rng() % 3000);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const double r = static_cast<double>(c.local_at(b) - c.local_at(a)) /
                     (static_cast<double>(b - a) * kLocalScale);
    ASSERT_GE(r, 1.0);
    ASSERT_LE(r, 1.2 + 1e-12);
  }
}

TEST(ChannelTest, ZeroDelayOnIdleChannel) {
  Channel ch(0, 1, 1000);
  EXPECT_EQ(ch.deliver(7, 0), 7);
}

TEST(ChannelTest, ClampingKeepsOrder) {
  Channel ch(0, 1, 1000);
  EXPECT_EQ(ch.deliver(0, 900), 900);
  // 1 + 50 would overtake the first message.
  EXPECT_EQ(ch.deliver(1, 50), 901);
}

TEST(ChannelTest, EnvelopeBreachIsInvariantError) {
  Channel ch(0, 1, 1000);
  ch.deliver(0, 999);
  EXPECT_THROW(ch.deliver(0, 0), SimulationInvariantError);
}

TEST(ChannelTest, RandomSchedulesKeepFifoAndBound) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    Channel ch(2, 3, 1000);
    Time send = 0, last = -1;
    for (int k = 0; k < 200; ++k) {
      send += 1 + static_cast<Time>(rng() % 300);
      const Time got = ch.deliver(send, static_cast<Time>(rng() % 1000));
      ASSERT_GT(got, last);
      ASSERT_GE(got - send, 0);
      ASSERT_LT(got - send, 1000);
      last = got;
    }
  }
}

TEST(Timeout, ExpiryRateOne) {
  Clock c(1.25);
  TimeoutPort p(10 * kLocalScale);
  p.reset(0, c);
  EXPECT_EQ(p.expiry(), 10);
  EXPECT_FALSE(p.expired_at(9));
  EXPECT_TRUE(p.expired_at(10));
}

TEST(Timeout, ExpiryFastClock) {
  Clock c(1.25, Clock::rate_from(1.25));
  TimeoutPort p(10 * kLocalScale);
  p.reset(0, c);
  EXPECT_EQ(p.expiry(), 8);
}

TEST(Timeout, LastResetWins) {
  Clock c(1.25);
  const auto e = timeout_expiries(10 * kLocalScale, c, {0, 5}, 100);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0], 15);
}

// One-sample Kolmogorov-Smirnov statistic against U[0, 1].
double ks_statistic(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double dmax = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double x = std::clamp(xs[k], 0.0, 1.0);
    dmax = std::max({dmax, (k + 1) / n - x, x - k / n});
  }
  return dmax;
}

TEST(RandomizedTimeout, UniformDurations) {
  // Rate-1 clock: expiry - reset is the drawn duration rounded up to a tick.
  const Time hi = 1'000'000;
  RandomizedTimeoutPort p(0, hi * kLocalScale, 12345);
  Clock c(1.2);
  std::vector<double> xs;
  const int N = 4000;
  for (int k = 0; k < N; ++k) {
    const Time t = static_cast<Time>(k) * 2 * hi;
    p.reset(t, c);
    xs.push_back(static_cast<double>(p.expiry() - t) / static_cast<double>(hi));
  }
  // Critical value at significance 0.01.
  EXPECT_LT(ks_statistic(xs), 1.628 / std::sqrt(static_cast<double>(N)));
}

TEST(RandomizedTimeout, IndependentStreams) {
  RandomizedTimeoutPort a(0, 1000 * kLocalScale, 1);
  RandomizedTimeoutPort b(0, 1000 * kLocalScale, 2);
  Clock c(1.2);
  int same = 0;
  for (int k = 0; k < 100; ++k) {
    a.reset(k * 2000, c);
    b.reset(k * 2000, c);
    same += a.expiry() == b.expiry();
  }
  EXPECT_LT(same, 10);
}

template <class T>
concept ExposesDraw = requires(const T& t) { t.drawn(); } ||
                      requires(const T& t) { t.drawn_duration(); } ||
                      requires(const T& t) { t.drawn_; };

TEST(Opacity, NoDrawnDurationAccessor) {
  static_assert(!ExposesDraw<RandomizedTimeoutPort>);
  static_assert(!ExposesDraw<HistoryView>);
  // The strategy callback sees a history view and nothing else.
  static_assert(std::is_same_v<
                decltype(&AdversaryStrategy::step),
                AdversaryActions (AdversaryStrategy::*)(const HistoryView&)>);
}

TEST(Flag, SetDominantLatch) {
  MemoryFlag f;
  EXPECT_FALSE(f.value());
  EXPECT_TRUE(f.observe(true));
  EXPECT_FALSE(f.observe(true));
  EXPECT_FALSE(f.observe(false));
  EXPECT_TRUE(f.value());
  f.reset(true);  // subject still observed: stays set
  EXPECT_TRUE(f.value());
  f.reset(false);
  EXPECT_FALSE(f.value());
}

}  // namespace
}  // namespace fatal
