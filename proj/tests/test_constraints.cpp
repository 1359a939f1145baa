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

#include "fatal/constraints.hpp"

namespace fatal {
namespace {

bool has(const std::vector<Violation>& v, const std::string& rel) {
  return std::any_of(v.begin(), v.end(),
                     [&](const Violation& x) { return x.relation == rel; });
}

Params params(double theta, double d = 1, int n = 4, int f = 1,
              double alpha = 1) {
  Params p;
  p.theta = theta;
  p.d = d;
  p.n = n;
  p.f = f;
  p.alpha = alpha;
  return p;
}

TEST(Lambda, Values) {
  EXPECT_DOUBLE_EQ(lambda_of(1.0), 0.8);
  // sqrt((25*1.1 - 9) / (25*1.1)) = sqrt(18.5 / 27.5)
  EXPECT_NEAR(lambda_of(1.1), 0.82020, 5e-6);
  for (double th = 1.001; th < 1.25; th += 0.01) {
    EXPECT_GT(lambda_of(th), 0.8);
    EXPECT_LT(lambda_of(th), 1.0);
  }
}

TEST(Derived, DeltaG) {
  TimeoutAssignment a;
  a.T1 = 4.4;
  const DerivedConstants c = derived_constants(params(1.1), a);
  EXPECT_NEAR(c.Delta_g, 18.04, 1e-12);
  EXPECT_NEAR(c.delta_s, 2 * 4.4 + 3, 1e-12);
}

TEST(ThetaMax, RootOfCubic) {
  const double t = theta_max();
  EXPECT_NEAR(t, 1.247, 5e-4);
  EXPECT_LT(std::fabs(t * t * t + t * t - 2 * t - 1), 1e-8);
  auto cubic = [](double x) { return x * x * x + x * x - 2 * x - 1; };
  EXPECT_LT(cubic(1.2), 0);
  EXPECT_GT(cubic(1.3), 0);
}

TEST(Solve, ReferenceInstancePassesCheck) {
  const Params p = params(1.2);
  const TimeoutAssignment a = solve(p);
  EXPECT_TRUE(check(p, a).empty());
  EXPECT_DOUBLE_EQ(a.T1, 4 * 1.2);
  EXPECT_DOUBLE_EQ(a.T4, a.T3);
}

TEST(Solve, ThetaAboveMaxIsInfeasible) {
  EXPECT_THROW(solve(params(1.3)), InfeasibleError);
  try {
    solve(params(1.3));
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("1.247"), std::string::npos);
  }
}

TEST(Solve, AlphaBelowOneIsPrecondition) {
  EXPECT_THROW(solve(params(1.2, 1, 4, 1, 0.5)), InfeasibleError);
  EXPECT_THROW(solve(params(1.2, 1, 4, 1, alpha_sup(1.2))), InfeasibleError);
}

TEST(Check, HalvedT2) {
  const Params p = params(1.2);
  TimeoutAssignment a = solve(p);
  a.T2 /= 2;
  const auto v = check(p, a);
  EXPECT_TRUE(has(v, "T2"));
  EXPECT_TRUE(has(v, "lambda"));
}

TEST(Check, AllZero) {
  const auto v = check(params(1.2), TimeoutAssignment{});
  EXPECT_TRUE(has(v, "T1"));
}

TEST(Check, SolveIsSoundOnRandomInputs) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  const double tmax = theta_max();
  for (int k = 0; k < 1000; ++k) {
    Params p;
    p.theta = 1.0 + (tmax - 1.0) * (0.001 + 0.998 * u(rng));
    p.d = 1 + std::floor(u(rng) * 5000);
    p.n = 1 + static_cast<int>(rng() % 32);
    const int fmax = (p.n + 2) / 3 - 1;
    p.f = fmax > 0 ? static_cast<int>(rng() % (fmax + 1)) : 0;
    p.alpha = 1 + (alpha_sup(p.theta) - 1) * 0.999 * u(rng);
    const TimeoutAssignment a = solve(p);
    const auto v = check(p, a);
    ASSERT_TRUE(v.empty()) << "theta=" << p.theta << " n=" << p.n
                           << " f=" << p.f << " alpha=" << p.alpha
                           << " violates " << v.front().relation;
  }
}

TEST(Solve, RedundantTermsAreDominated) {
  for (double th : {1.01, 1.1, 1.2, 1.24}) {
    const Params p = params(th, 1000);
    const TimeoutAssignment a = solve(p);
    const DerivedConstants c = derived_constants(p, a);
    const double d = p.d;
    // Left term of the T2 relation.
    EXPECT_LT(a.T1 + c.Delta_g - (4 * th * th + 16 * th + 5) * d,
              (3 * th + 1 - 1 / th) * a.T1 + a.T5);
    // Second term of the R1 relation.
    EXPECT_LT((2 * th + 4 - 3 / th) * a.T1 + 2 * a.T4 + a.T5 - c.Delta_s -
                  c.Delta_g + 17 * d,
              a.T7 + (4 * th + 8) * d);
    // The strict T6 relation follows from the non-strict one.
    EXPECT_GT(th * (c.delta_s_tilde - (1 - 1 / th) * a.T1 + a.T2 + 2 * d),
              th * c.Delta_s);
  }
}

TEST(Solve, R2FormsAgreeAtMinimalT1) {
  for (double th : {1.05, 1.15, 1.24}) {
    const Params p = params(th, 1000, 7, 2);
    const TimeoutAssignment a = solve(p);
    const DerivedConstants c = derived_constants(p, a);
    EXPECT_NEAR(c.R2_bound, c.R2_bound_substituted, 1e-9 * c.R2_bound);
  }
}

TEST(Solve, GridRoundsUpAndStaysFeasible) {
  const Params p = params(1.1, 1000);
  SolveOptions o;
  o.grid = 1;
  const TimeoutAssignment a = solve(p, o);
  EXPECT_TRUE(check(p, a, o.grid).empty());
  EXPECT_DOUBLE_EQ(a.T2, std::ceil(a.T2));
  EXPECT_DOUBLE_EQ(a.T3, std::ceil(a.T3));
}

TEST(Bound, Probabilities) {
  const Params p = params(1.2, 1, 4, 1);
  const TimeoutAssignment a = solve(p);
  EXPECT_DOUBLE_EQ(stabilization_bound(p, a, 0).prob_strong, 0.0);
  const StabilizationBound b = stabilization_bound(p, a, 3);
  EXPECT_NEAR(b.prob_strong, 1 - std::pow(2.0, -9), 1e-15);
  EXPECT_NEAR(b.prob_strong, 0.99805, 1e-5);
  EXPECT_NEAR(b.prob_weak, 1 - 2 * std::pow(2.0, -9), 1e-15);
  EXPECT_NEAR(b.prob_adaptive, 1 - 2 * std::exp(-4.5), 1e-15);
}

TEST(Bound, MonotoneInKAndN) {
  const Params p = params(1.1, 1000, 7, 2);
  const TimeoutAssignment a = solve(p);
  double prev = -1;
  for (int k = 0; k < 6; ++k) {
    const double T = stabilization_bound(p, a, k).T;
    EXPECT_GT(T, prev);
    prev = T;
  }
  double r2 = 0, tk = 0;
  for (int n = 4; n <= 13; ++n) {
    const Params q = params(1.1, 1000, n, 1);
    const TimeoutAssignment b = solve(q);
    EXPECT_GT(b.R2, r2);
    EXPECT_GT(stabilization_bound(q, b, 2).T, tk);
    r2 = b.R2;
    tk = stabilization_bound(q, b, 2).T;
  }
}

TEST(Ratio, NeverExceedsSupremum) {
  for (double th : {1.01, 1.05, 1.1, 1.15, 1.2, 1.24}) {
    for (double frac : {0.0, 0.5, 0.999}) {
      for (double x : {0.0, 1e3, 1e5, 1e7, 1e9}) {
        Params p = params(th, 1);
        p.alpha = 1 + (alpha_sup(th) - 1) * frac;
        p.boost_x = x;
        const TimeoutAssignment a = solve(p);
        ASSERT_TRUE(check(p, a).empty());
        EXPECT_LT(pulse_ratio(p, a), ratio_sup(th));
      }
    }
  }
}

TEST(Ratio, BoostIncreasesRatio) {
  Params p = params(1.2, 1);
  p.alpha = 1 + (alpha_sup(1.2) - 1) * 0.999;
  double prev = 0;
  for (double x : {0.0, 1e2, 1e4, 1e6}) {
    p.boost_x = x;
    const double r = pulse_ratio(p, solve(p));
    EXPECT_GT(r, prev);
    prev = r;
  }
}

// Shifting T3, T6, T5 and T2 by the boost multiples of x keeps the relations
// among them, but T5 and everything derived later must be recomputed.
TEST(Ratio, ShiftWithoutRederivingBreaksT5) {
  const Params p = params(1.2, 1);
  const TimeoutAssignment base = solve(p);
  const double th = p.theta, al = p.alpha, x = 1000;
  TimeoutAssignment a = base;
  a.T3 += x;
  a.T4 = al * a.T3;
  a.T6 += x / th;
  a.T5 += (th * al - 1 / th) * x;
  a.T2 += th * (th * al - 1 / th) * x;
  const auto v = check(p, a);
  EXPECT_TRUE(has(v, "T5"));
  EXPECT_FALSE(has(v, "T2"));
  EXPECT_FALSE(has(v, "T3"));
  EXPECT_FALSE(has(v, "T6"));
}

}  // namespace
}  // namespace fatal
