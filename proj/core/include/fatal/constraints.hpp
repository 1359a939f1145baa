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


#ifndef FATAL_CONSTRAINTS_HPP_
#define FATAL_CONSTRAINTS_HPP_

#include <string>
#include <vector>

#include "fatal/common.hpp"

namespace fatal {

struct Params {
  double theta = 1.1;  // drift bound
  double d = 1000;     // maximum delay, in ticks
  int n = 4;
  int f = 1;
  double alpha = 1.0;    // T4 = alpha * T3
  double boost_x = 0.0;  // extra T3 beyond the minimal solution, in ticks
  int k = 3;             // stabilization confidence parameter

  // Throws ConfigError on n < 3f+1 or nonpositive values.
  void validate_basic() const;
};

// Durations in ticks of reference time, measured on local clocks.
struct TimeoutAssignment {
  double T1 = 0, T2 = 0, T3 = 0, T4 = 0, T5 = 0, T6 = 0, T7 = 0;
  double R1 = 0, R2 = 0;
  double R3_lo = 0, R3_hi = 0;
};

struct DerivedConstants {
  double lambda = 0;
  double Delta_g = 0;
  double Delta_s = 0;
  double delta_s = 0;
  double delta_s_tilde = 0;
  double hatE3 = 0;
  // Lower bound on R2 as stated in the constraint system, and the same bound
  // after substituting T1 = 4 theta d.
  double R2_bound = 0;
  double R2_bound_substituted = 0;

  double T_of_k(int k, const TimeoutAssignment& a, double theta) const {
    return (k + 2) * hatE3 + a.R1 / theta;
  }
};

struct Violation {
  std::string relation;  // "T1", "T2", ..., "R3", "lambda"
  double lhs = 0;
  double rhs = 0;
  std::string detail;
};

struct SolveOptions {
  // Round lower-bounded quantities up to multiples of grid (0 disables).
  double grid = 0;
};

struct StabilizationBound {
  double T = 0;
  double prob_strong = 0;
  double prob_weak = 0;
  double prob_adaptive = 0;
};

double lambda_of(double theta);

// Root of theta^3 + theta^2 - 2 theta - 1 on (1, 2).
double theta_max();

// Supremum of admissible alpha: (2 theta + 1) / (theta^3 + theta^2).
double alpha_sup(double theta);

// The advertised supremum of (T2 + T4) / (theta (T2 + T3 + 4d)).
double ratio_sup(double theta);

double pulse_ratio(const Params& p, const TimeoutAssignment& a);

DerivedConstants derived_constants(const Params& p, const TimeoutAssignment& a);

// Throws InfeasibleError naming the violated precondition.
void check_preconditions(const Params& p);

TimeoutAssignment solve(const Params& p, const SolveOptions& opts = {});

// Relations of the constraint system that a violates; empty iff feasible.
std::vector<Violation> check(const Params& p, const TimeoutAssignment& a,
                             double grid = 0);

StabilizationBound stabilization_bound(const Params& p,
                                       const TimeoutAssignment& a, int k);

std::string format_assignment(const Params& p, const TimeoutAssignment& a);

}  // namespace fatal

#endif  // FATAL_CONSTRAINTS_HPP_
