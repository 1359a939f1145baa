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


#include "fatal/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fatal {

void Params::validate_basic() const {
  if (!(theta >= 1.0)) throw ConfigError("theta must be >= 1");
  if (!(d > 0)) throw ConfigError("d must be positive");
  if (n < 1 || n > kMaxNodes) throw ConfigError("n must be in [1, 32]");
  if (f < 0) throw ConfigError("f must be nonnegative");
  if (n < 3 * f + 1) throw ConfigError("n must be at least 3f+1");
  if (k < 0) throw ConfigError("k must be nonnegative");
  if (boost_x < 0) throw ConfigError("boost_x must be nonnegative");
}

double lambda_of(double theta) {
  return std::sqrt((25.0 * theta - 9.0) / (25.0 * theta));
}

double theta_max() {
  auto g = [](double x) { return x * x * x + x * x - 2 * x - 1; };
  double lo = 1.0, hi = 2.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double alpha_sup(double theta) {
  return (2 * theta + 1) / (theta * theta * theta + theta * theta);
}

double ratio_sup(double theta) {
  const double t3 = theta * theta * theta;
  return (t3 + 2 * theta + 1) / (2 * t3 * theta + t3);
}

double pulse_ratio(const Params& p, const TimeoutAssignment& a) {
  return (a.T2 + a.T4) / (p.theta * (a.T2 + a.T3 + 4 * p.d));
}

DerivedConstants derived_constants(const Params& p,
                                   const TimeoutAssignment& a) {
  const double th = p.theta, d = p.d;
  DerivedConstants c;
  c.lambda = lambda_of(th);
  c.Delta_g = (th + 3) * a.T1;
  c.Delta_s = a.T2 / th - 2 * a.T1 - d;
  c.delta_s = 2 * a.T1 + 3 * d;
  c.delta_s_tilde = (th + 2 - 1 / th) * a.T1 + 4 * d;
  c.hatE3 = th * (a.R2 + 3 * d) + 8 * (1 - c.lambda) * a.R2 + d;
  const double nf = p.n - p.f;
  c.R2_bound = 2 * th * (a.R1 + (th + 2) * a.T1 + a.T2 / th + (8 * th + 9) * d) *
               nf / (1 - c.lambda);
  c.R2_bound_substituted =
      2 * th * (a.R1 + a.T2 / th + (4 * th * th + 16 * th + 9) * d) * nf /
      (1 - c.lambda);
  return c;
}

void check_preconditions(const Params& p) {
  p.validate_basic();
  const double tm = theta_max();
  if (!(p.theta > 1.0)) {
    throw InfeasibleError("theta must exceed 1");
  }
  if (!(p.theta < tm)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "theta=%.6g is not below theta_max=%.4f (positive root of "
                  "2*theta+1 = theta^3+theta^2)",
                  p.theta, tm);
    throw InfeasibleError(buf);
  }
  const double asup = alpha_sup(p.theta);
  if (!(p.alpha >= 1.0) || !(p.alpha < asup)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "alpha=%.6g outside admissible range [1, %.6f)", p.alpha,
                  asup);
    throw InfeasibleError(buf);
  }
}

namespace {

struct Core {
  double T2, T3, T4, T5, T6;
};

// Tight completion of the system for a given T2: minimal T3 (plus the boost),
// the largest T6 that T3 still admits, then T4 and T5. Returns the T2 the
// completion requires.
double required_T2(const Params& p, double T1, double T2, Core* out) {
  const double th = p.theta, d = p.d;
  const double Dg = (th + 3) * T1;
  const double dts = (th + 2 - 1 / th) * T1 + 4 * d;
  const double b3 = (2 * th * th + 3 * th - 1) * T1 + 5 * th * d;
  const double T6min = th * (dts - (1 - 1 / th) * T1 + T2 + 2 * d);
  const double T3 =
      std::max((th - 1) * T2 + th * (2 * T1 + (2 * th + 4) * d),
               b3 - T2 + th * T6min) +
      p.boost_x;
  const double T6 = std::max(T6min, (T3 + T2 - b3) / th);
  const double T4 = p.alpha * T3;
  const double T5 =
      std::max(th * (T4 + 7 * d) - T3 + (th - 1) * T2,
               (th * th + th - 2) * T1 + th * (T2 + T4 + 9 * d) - T6);
  if (out) *out = {T2, T3, T4, T5, T6};
  return th * std::max(T1 + Dg - (4 * th * th + 16 * th + 5) * d,
                       (3 * th + 1 - 1 / th) * T1 + T5);
}

void complete_tail(const Params& p, TimeoutAssignment& a) {
  const double th = p.theta, d = p.d;
  const DerivedConstants c = derived_constants(p, a);
  a.T7 = th * (a.T2 + a.T4 + a.T5 + c.Delta_s + c.delta_s_tilde - c.Delta_g +
               d) +
         a.T6 - 4 * d;
  a.R1 = th * std::max(a.T7 + (4 * th + 8) * d,
                       (2 * th + 4 - 3 / th) * a.T1 + 2 * a.T4 + a.T5 -
                           c.Delta_s - c.Delta_g + 17 * d);
  const DerivedConstants c2 = derived_constants(p, a);
  a.R2 = c2.R2_bound;
  a.R3_lo = th * (a.R2 + 3 * d);
  a.R3_hi = a.R3_lo + 8 * (1 - c2.lambda) * a.R2;
}

double round_up(double v, double g) {
  if (g <= 0) return v;
  return std::ceil(v / g - 1e-9) * g;
}

}  // namespace

TimeoutAssignment solve(const Params& p, const SolveOptions& opts) {
  check_preconditions(p);
  const double th = p.theta, d = p.d;
  const double lam = lambda_of(th);
  TimeoutAssignment a;
  a.T1 = 4 * th * d;

  // Smallest T2 meeting the lambda relation.
  const double Dg = (th + 3) * a.T1;
  const double L = th * (2 * a.T1 + d + (Dg + 2 * a.T1 + 3 * d) / (1 - lam));

  // required_T2 is piecewise affine and increasing in T2; find its least
  // fixed point above L with secant steps.
  double T2 = L;
  for (int it = 0; it < 200; ++it) {
    const double v = required_T2(p, a.T1, T2, nullptr);
    const double g = v - T2;
    if (g <= 1e-12 * std::max(1.0, T2)) break;
    const double s = (required_T2(p, a.T1, T2 + d, nullptr) - v) / d;
    if (s >= 1.0) {
      throw InfeasibleError("no fixed point for T2 (slope >= 1)");
    }
    T2 += g / (1 - s);
  }
  Core core;
  if (required_T2(p, a.T1, T2, &core) > T2 * (1 + 1e-9)) {
    throw InfeasibleError("T2 iteration did not converge");
  }
  a.T2 = core.T2;
  a.T3 = core.T3;
  a.T4 = core.T4;
  a.T5 = core.T5;
  a.T6 = core.T6;
  complete_tail(p, a);

  if (opts.grid > 0) {
    const double g = opts.grid;
    a.T1 = round_up(a.T1, g);
    double T2g = round_up(a.T2, g);
    for (int it = 0; it < 100000; ++it) {
      Core cg;
      required_T2(p, a.T1, T2g, &cg);
      TimeoutAssignment b = a;
      b.T2 = T2g;
      b.T6 = round_up(cg.T6, g);
      // T3 must cover the T6 rounding.
      const double b3 = (2 * th * th + 3 * th - 1) * b.T1 + 5 * th * d;
      b.T3 = round_up(std::max(cg.T3, b3 - b.T2 + th * b.T6), g);
      b.T4 = round_up(std::max(p.alpha * b.T3, b.T3), g);
      b.T5 = round_up(
          std::max(th * (b.T4 + 7 * d) - b.T3 + (th - 1) * b.T2,
                   (th * th + th - 2) * b.T1 + th * (b.T2 + b.T4 + 9 * d) -
                       b.T6),
          g);
      complete_tail(p, b);
      b.T7 = round_up(b.T7, g);
      b.R1 = round_up(std::max(b.R1, th * (b.T7 + (4 * th + 8) * d)), g);
      b.R2 = round_up(derived_constants(p, b).R2_bound, g);
      b.R3_lo = round_up(th * (b.R2 + 3 * d), g);
      b.R3_hi = round_up(b.R3_lo + 8 * (1 - lam) * b.R2, g);
      if (check(p, b, g).empty()) return b;
      T2g += g;
    }
    throw InfeasibleError("grid rounding did not reach a feasible point");
  }
  return a;
}

std::vector<Violation> check(const Params& p, const TimeoutAssignment& a,
                             double grid) {
  const double th = p.theta, d = p.d;
  const DerivedConstants c = derived_constants(p, a);
  std::vector<Violation> out;
  auto ge = [&](const char* name, double lhs, double rhs, const char* what) {
    const double tol = 1e-9 * std::max(1.0, std::fabs(rhs));
    if (!(lhs >= rhs - tol)) out.push_back({name, lhs, rhs, what});
  };

  ge("T1", a.T1, th * 4 * d, "T1 >= 4 theta d");
  ge("T2", a.T2,
     th * std::max(a.T1 + c.Delta_g - (4 * th * th + 16 * th + 5) * d,
                   (3 * th + 1 - 1 / th) * a.T1 + a.T5),
     "T2 >= theta max{T1+Dg-(4th^2+16th+5)d, (3th+1-1/th)T1+T5}");
  ge("T3", a.T3,
     std::max((th - 1) * a.T2 + th * (2 * a.T1 + (2 * th + 4) * d),
              (2 * th * th + 3 * th - 1) * a.T1 - a.T2 + th * (a.T6 + 5 * d)),
     "T3 >= max{...}");
  ge("T4", a.T4, a.T3, "T4 >= T3");
  ge("T5", a.T5,
     std::max(th * (a.T4 + 7 * d) - a.T3 + (th - 1) * a.T2,
              (th * th + th - 2) * a.T1 + th * (a.T2 + a.T4 + 9 * d) - a.T6),
     "T5 >= max{...}");
  {
    const double rhs =
        th * (c.delta_s_tilde - (1 - 1 / th) * a.T1 + a.T2 + 2 * d);
    ge("T6", a.T6, rhs, "T6 >= theta(dts-(1-1/theta)T1+T2+2d)");
    if (!(a.T6 > th * c.Delta_s)) {
      out.push_back({"T6", a.T6, th * c.Delta_s, "T6 > theta Delta_s"});
    }
  }
  ge("T7", a.T7,
     th * (a.T2 + a.T4 + a.T5 + c.Delta_s + c.delta_s_tilde - c.Delta_g + d) +
         a.T6 - 4 * d,
     "T7 >= theta(T2+T4+T5+Ds+dts-Dg+d)+T6-4d");
  ge("R1", a.R1,
     th * std::max(a.T7 + (4 * th + 8) * d,
                   (2 * th + 4 - 3 / th) * a.T1 + 2 * a.T4 + a.T5 -
                       c.Delta_s - c.Delta_g + 17 * d),
     "R1 >= theta max{...}");
  ge("R2", a.R2, c.R2_bound, "R2 >= 2theta(R1+(theta+2)T1+T2/theta+(8theta+9)d)(n-f)/(1-lambda)");
  {
    const double lo = th * (a.R2 + 3 * d);
    const double hi = lo + 8 * (1 - c.lambda) * a.R2;
    const double tol =
        grid > 0 ? grid * (1 + 1e-9) : 1e-9 * std::max(1.0, hi);
    if (std::fabs(a.R3_lo - lo) > tol || std::fabs(a.R3_hi - hi) > tol) {
      out.push_back({"R3", a.R3_lo, lo, "R3 interval endpoints"});
    }
  }
  if (!(c.Delta_s > 0) ||
      !(c.lambda <= (c.Delta_s - c.Delta_g - c.delta_s) / c.Delta_s +
                        1e-12)) {
    out.push_back({"lambda", c.lambda,
                   c.Delta_s > 0
                       ? (c.Delta_s - c.Delta_g - c.delta_s) / c.Delta_s
                       : -1.0,
                   "lambda <= (Ds-Dg-ds)/Ds"});
  }
  return out;
}

StabilizationBound stabilization_bound(const Params& p,
                                       const TimeoutAssignment& a, int k) {
  const DerivedConstants c = derived_constants(p, a);
  StabilizationBound b;
  b.T = c.T_of_k(k, a, p.theta);
  const double e = static_cast<double>(k) * (p.n - p.f);
  b.prob_strong = 1.0 - std::pow(2.0, -e);
  b.prob_weak = 1.0 - (p.f + 1) * std::pow(2.0, -e);
  b.prob_adaptive = 1.0 - (p.f + 1) * std::exp(-e / 2.0);
  return b;
}

std::string format_assignment(const Params& p, const TimeoutAssignment& a) {
  std::ostringstream os;
  char buf[96];
  auto line = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", k, v);
    os << buf;
  };
  os << "[params]\n";
  line("theta", p.theta);
  line("d", p.d);
  os << "n = " << p.n << "\nf = " << p.f << "\n";
  line("alpha", p.alpha);
  line("boost_x", p.boost_x);
  os << "k = " << p.k << "\n\n[timeouts]\nmode = explicit\n";
  line("T1", a.T1);
  line("T2", a.T2);
  line("T3", a.T3);
  line("T4", a.T4);
  line("T5", a.T5);
  line("T6", a.T6);
  line("T7", a.T7);
  line("R1", a.R1);
  line("R2", a.R2);
  line("R3_lo", a.R3_lo);
  line("R3_hi", a.R3_hi);
  return os.str();
}

}  // namespace fatal
