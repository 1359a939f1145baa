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


#include "fatal/trials.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/distributions/binomial.hpp>

#include "fatal/engine.hpp"

namespace fatal {

namespace {

double quantile(const std::vector<Time>& sorted, double q) {
  if (sorted.empty()) return 0;
  const auto i = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(sorted.size())) - 1);
  return static_cast<double>(sorted[std::min(i, sorted.size() - 1)]);
}

double T_for(const SimConfig& cfg, int k) {
  const DerivedConstants dc = derived_constants(cfg.params, cfg.timeouts);
  double T = dc.T_of_k(k, cfg.timeouts, cfg.params.theta);
  if (!cfg.faults.channels.empty()) {
    T += cfg.timeouts.T2 + cfg.timeouts.T4 + 5 * cfg.params.d;
  }
  return T;
}

}  // namespace

double binomial_lower_tail(int x, int n, double bound) {
  if (n <= 0) return 1;
  if (bound <= 0) return 1;
  if (bound >= 1) return x >= n ? 1 : 0;
  boost::math::binomial_distribution<double> b(n, bound);
  return boost::math::cdf(b, static_cast<double>(x));
}

double success_bound(const SimConfig& cfg, int k) {
  const StabilizationBound b = stabilization_bound(cfg.params, cfg.timeouts, k);
  double p = b.prob_strong;
  if (cfg.faults.adaptive) {
    p = b.prob_adaptive;
  } else if (!cfg.faults.channels.empty()) {
    p = b.prob_weak;
  }
  return std::max(0.0, p);
}

TrialResult run_trial(const SimConfig& cfg, const std::vector<int>& ks,
                      std::uint64_t seed) {
  SimConfig c = cfg;
  c.seed = seed;
  const ExecutionTrace tr = run(c);
  const VerifierReport rep = verify(tr);
  TrialResult r;
  r.seed = seed;
  if (rep.stabilized) r.stabilization_time = rep.stabilization_time;
  r.pass = rep.pass();
  r.violations = static_cast<int>(rep.violations.size());
  if (!rep.violations.empty()) r.first_violation = rep.violations.front().kind;
  r.summary = rep.summary_line();
  for (int k : ks) {
    r.within.push_back(rep.stabilized &&
                       static_cast<double>(rep.stabilization_time) <=
                           T_for(c, k));
  }
  return r;
}

SweepSummary run_trials(
    const SimConfig& cfg, int trials, int jobs,
    const std::function<void(int, const TrialResult&)>& progress,
    double alpha) {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  SweepSummary s;
  s.trials = trials;
  s.ks = cfg.ks.empty() ? std::vector<int>{cfg.params.k} : cfg.ks;
  s.results.resize(trials);

  if (jobs <= 0) {
    jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  jobs = std::min(jobs, trials);
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= trials) return;
      try {
        TrialResult r = run_trial(cfg, s.ks, cfg.seed + static_cast<std::uint64_t>(i));
        std::lock_guard<std::mutex> lk(mu);
        s.results[i] = std::move(r);
        if (progress) progress(i, s.results[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
        next = trials;
        return;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);

  std::vector<Time> times;
  for (const TrialResult& r : s.results) {
    if (r.stabilization_time) times.push_back(*r.stabilization_time);
    if (r.pass) ++s.verifier_pass;
  }
  std::sort(times.begin(), times.end());
  s.stabilized = static_cast<int>(times.size());
  if (!times.empty()) {
    double sum = 0;
    for (Time t : times) sum += static_cast<double>(t);
    s.mean = sum / static_cast<double>(times.size());
    s.q50 = quantile(times, 0.5);
    s.q90 = quantile(times, 0.9);
    s.q99 = quantile(times, 0.99);
    s.max = static_cast<double>(times.back());
    const int bins = 10;
    s.bin_width = std::max(1.0, std::ceil((s.max + 1) / bins));
    s.histogram.assign(bins, 0);
    for (Time t : times) {
      const int b = std::min(bins - 1,
                             static_cast<int>(static_cast<double>(t) / s.bin_width));
      ++s.histogram[b];
    }
  }
  for (std::size_t j = 0; j < s.ks.size(); ++j) {
    KRow row;
    row.k = s.ks[j];
    row.T_k = T_for(cfg, row.k);
    for (const TrialResult& r : s.results) row.within += r.within[j] ? 1 : 0;
    row.fraction = static_cast<double>(row.within) / trials;
    row.bound = success_bound(cfg, row.k);
    row.p_value = binomial_lower_tail(row.within, trials, row.bound);
    row.pass = row.p_value >= alpha;
    s.rows.push_back(row);
  }
  return s;
}

std::string SweepSummary::format() const {
  std::ostringstream os;
  char buf[256];
  os << "trials = " << trials << "\nstabilized = " << stabilized
     << "\nverifier_pass = " << verifier_pass << "\n";
  std::snprintf(buf, sizeof buf,
                "mean = %.1f\nq50 = %.0f\nq90 = %.0f\nq99 = %.0f\nmax = %.0f\n",
                mean, q50, q90, q99, max);
  os << buf;
  os << "\n  k          T(k)  within  fraction   bound   p-value  verdict\n";
  for (const KRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%3d %13.1f %7d %9.4f %7.4f %9.4g  %s\n",
                  r.k, r.T_k, r.within, r.fraction, r.bound, r.p_value,
                  r.pass ? "pass" : "reject");
    os << buf;
  }
  if (!histogram.empty()) {
    os << "\nhistogram (stabilization time)\n";
    for (std::size_t b = 0; b < histogram.size(); ++b) {
      std::snprintf(buf, sizeof buf, "[%10.0f, %10.0f) %d\n",
                    bin_width * static_cast<double>(b),
                    bin_width * static_cast<double>(b + 1), histogram[b]);
      os << buf;
    }
  }
  return os.str();
}

}  // namespace fatal
