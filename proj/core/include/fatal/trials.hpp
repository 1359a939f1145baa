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


#ifndef FATAL_TRIALS_HPP_
#define FATAL_TRIALS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fatal/config.hpp"
#include "fatal/verifier.hpp"

namespace fatal {

struct TrialResult {
  std::uint64_t seed = 0;
  std::optional<Time> stabilization_time;
  bool pass = false;  // verifier reported no violation
  int violations = 0;
  std::string first_violation;
  std::string summary;
  std::vector<bool> within;  // per entry of SweepSummary::ks
};

struct KRow {
  int k = 0;
  double T_k = 0;
  int within = 0;
  double fraction = 0;
  double bound = 0;
  double p_value = 1;  // P(X <= within) under the bound
  bool pass = true;    // one-sided test does not reject at alpha
};

struct SweepSummary {
  int trials = 0;
  int stabilized = 0;
  int verifier_pass = 0;
  double mean = 0;  // over stabilized trials
  double q50 = 0, q90 = 0, q99 = 0, max = 0;
  std::vector<int> ks;
  std::vector<KRow> rows;
  double bin_width = 0;
  std::vector<int> histogram;
  std::vector<TrialResult> results;

  std::string format() const;
};

// One-sided binomial test of H0: p >= bound. Returns P(X <= x | N, bound).
double binomial_lower_tail(int x, int n, double bound);

// Probability bound attached to k for this configuration.
double success_bound(const SimConfig& cfg, int k);

TrialResult run_trial(const SimConfig& cfg, const std::vector<int>& ks,
                      std::uint64_t seed);

/**
 * Runs `trials` independent executions with seeds cfg.seed + i. jobs <= 0
 * uses the hardware concurrency. Results are stored by trial index, so the
 * summary does not depend on scheduling. An optional callback sees each
 * finished trial (called under a lock).
 */
SweepSummary run_trials(const SimConfig& cfg, int trials, int jobs = 0,
                        const std::function<void(int, const TrialResult&)>&
                            progress = nullptr,
                        double alpha = 0.01);

}  // namespace fatal

#endif  // FATAL_TRIALS_HPP_
