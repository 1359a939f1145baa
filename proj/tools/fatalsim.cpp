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


// fatalsim: solve timeout systems, run and verify simulations, run sweeps.
//
// Exit codes: 0 pass, 1 property violation, 2 infeasible or usage error,
// 3 engine fault.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fatal/config.hpp"
#include "fatal/constraints.hpp"
#include "fatal/engine.hpp"
#include "fatal/protocol.hpp"
#include "fatal/trace.hpp"
#include "fatal/trials.hpp"
#include "fatal/verifier.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;
constexpr int kEngineFault = 3;

std::string derived_block(const fatal::Params& p,
                          const fatal::TimeoutAssignment& a) {
  const fatal::DerivedConstants dc = fatal::derived_constants(p, a);
  const fatal::StabilizationBound b = fatal::stabilization_bound(p, a, p.k);
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "# lambda = %.17g\n# Delta_g = %.17g\n# Delta_s = %.17g\n"
                "# delta_s = %.17g\n# delta_s_tilde = %.17g\n# hatE3 = %.17g\n"
                "# T(k) = %.17g\n# P(stabilized by T(k)) >= %.17g\n"
                "# ratio = %.17g (supremum %.17g)\n",
                dc.lambda, dc.Delta_g, dc.Delta_s, dc.delta_s,
                dc.delta_s_tilde, dc.hatE3, b.T, b.prob_strong,
                fatal::pulse_ratio(p, a), fatal::ratio_sup(p.theta));
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw fatal::ConfigError("cannot write " + path);
  os << text;
}

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

int report_exit(const fatal::VerifierReport& r) {
  return r.pass() ? kPass : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and verifier for the FATAL pulse synchronization "
               "protocol"};
  app.require_subcommand(1);

  // solve
  fatal::Params sp;
  double sgrid = 0;
  std::string sout = "-";
  auto* solve = app.add_subcommand("solve", "Solve the timeout constraints");
  solve->add_option("--theta", sp.theta, "Drift bound")->capture_default_str();
  solve->add_option("--d", sp.d, "Maximum delay")->capture_default_str();
  solve->add_option("--n", sp.n, "Number of nodes")->capture_default_str();
  solve->add_option("--f", sp.f, "Fault bound")->capture_default_str();
  solve->add_option("--alpha", sp.alpha, "T4 / T3")->capture_default_str();
  solve->add_option("--boost-x", sp.boost_x, "Extra T3")->capture_default_str();
  solve->add_option("--k", sp.k, "Stabilization parameter")
      ->capture_default_str();
  solve->add_option("--grid", sgrid, "Round timeouts up to this grid");
  solve->add_option("-o,--output", sout, "Output file (- for stdout)");

  // check
  std::string cpath;
  auto* chk = app.add_subcommand("check", "Check a timeout assignment");
  chk->add_option("file", cpath, "Assignment or scenario file")->required();

  // simulate
  std::string mcfg, mtrace, mreport;
  std::optional<std::uint64_t> mseed;
  std::optional<fatal::Time> mhorizon;
  bool mfull = false;
  auto* sim = app.add_subcommand("simulate", "Run one simulation and verify it");
  sim->add_option("config", mcfg, "Scenario file")->required();
  sim->add_option("--seed", mseed, "Override the seed");
  sim->add_option("--horizon", mhorizon, "Override the horizon (ticks)");
  sim->add_option("--trace", mtrace, "Trace output (default <stem>.trace)");
  sim->add_option("--report", mreport,
                  "Report output (default <stem>.report, - for stdout)");
  sim->add_flag("--full", mfull, "Record ports, flags and timeouts");

  // sweep
  std::string wcfg;
  int wtrials = -1;
  int wjobs = 0;
  std::vector<int> wks;
  std::optional<std::uint64_t> wseed;
  bool wverbose = false;
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo stabilization sweep");
  sweep->add_option("config", wcfg, "Scenario file")->required();
  sweep->add_option("--trials", wtrials, "Number of trials (default from file)");
  sweep->add_option("--k", wks, "Values of k to report")->delimiter(',');
  sweep->add_option("--jobs", wjobs, "Parallel jobs (0: all cores)");
  sweep->add_option("--seed", wseed, "Base seed");
  sweep->add_flag("-v,--verbose", wverbose, "Print one line per trial");

  // verify
  std::string vpath, vreport = "-";
  int vk = -1;
  auto* ver = app.add_subcommand("verify", "Verify a trace file");
  ver->add_option("trace", vpath, "Trace file")->required();
  ver->add_option("--k", vk, "Stabilization parameter (default from trace)");
  ver->add_option("--report", vreport, "Report output (- for stdout)");

  // tables
  std::string tcfg;
  auto* tab = app.add_subcommand("tables", "Print the transition tables");
  tab->add_option("config", tcfg, "Scenario file (default parameters if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*solve) {
      fatal::check_preconditions(sp);
      sp.validate_basic();
      const fatal::TimeoutAssignment a =
          fatal::solve(sp, fatal::SolveOptions{sgrid});
      write_text(sout, fatal::format_assignment(sp, a) + derived_block(sp, a));
      return kPass;
    }
    if (*chk) {
      fatal::SimConfig c = fatal::load_config(cpath);
      if (c.solve_timeouts) {
        std::cerr << "check: file has no explicit timeouts\n";
        return kUsage;
      }
      const auto v = fatal::check(c.params, c.timeouts, c.grid);
      for (const auto& x : v) {
        std::printf("violated %s: %.17g vs %.17g %s\n", x.relation.c_str(),
                    x.lhs, x.rhs, x.detail.c_str());
      }
      if (v.empty()) {
        std::printf("feasible\n%s", derived_block(c.params, c.timeouts).c_str());
        return kPass;
      }
      return kUsage;
    }
    if (*sim) {
      fatal::SimConfig c = fatal::load_config(mcfg);
      if (mseed) c.seed = *mseed;
      if (mhorizon) {
        c.horizon_auto = false;
        c.horizon = *mhorizon;
      }
      if (mfull) c.record = fatal::RecordLevel::full;
      c.resolve();
      const fatal::ExecutionTrace tr = fatal::run(c);
      const std::string stem = stem_of(mcfg);
      fatal::save_trace(mtrace.empty() ? stem + ".trace" : mtrace, tr);
      const fatal::VerifierReport r = fatal::verify(tr);
      write_text(mreport.empty() ? stem + ".report" : mreport, r.format());
      std::cout << r.summary_line() << "\n";
      return report_exit(r);
    }
    if (*sweep) {
      fatal::SimConfig c = fatal::load_config(wcfg);
      if (wseed) c.seed = *wseed;
      if (!wks.empty()) c.ks = wks;
      const int trials = wtrials >= 0 ? wtrials : c.trials;
      if (trials < 1) {
        std::cerr << "sweep: --trials must be at least 1\n";
        return kUsage;
      }
      c.resolve();
      std::cout << "# seeds " << c.seed << " .. " << c.seed + trials - 1 << "\n";
      const auto progress = [&](int i, const fatal::TrialResult& r) {
        if (wverbose) std::cout << "trial " << i << " " << r.summary << "\n";
      };
      const fatal::SweepSummary s =
          fatal::run_trials(c, trials, wjobs > 0 ? wjobs : c.jobs, progress);
      std::cout << s.format();
      for (const auto& row : s.rows) {
        if (!row.pass) return kViolation;
      }
      return kPass;
    }
    if (*ver) {
      const fatal::ExecutionTrace tr = fatal::load_trace(vpath);
      fatal::VerifyOptions o;
      o.k = vk;
      const fatal::VerifierReport r = fatal::verify(tr, o);
      write_text(vreport, r.format());
      if (vreport != "-") std::cout << r.summary_line() << "\n";
      return report_exit(r);
    }
    if (*tab) {
      fatal::SimConfig c;
      if (!tcfg.empty()) c = fatal::load_config(tcfg);
      c.resolve();
      std::cout << fatal::format_tables(
          fatal::build_tables(c.params, c.timeouts, c.fast_rejoin));
      return kPass;
    }
  } catch (const fatal::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kUsage;
  } catch (const fatal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const fatal::StructuralError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kUsage;
  } catch (const fatal::SimulationInvariantError& e) {
    std::cerr << "engine fault: " << e.what() << "\n";
    return kEngineFault;
  } catch (const fatal::ContainmentError& e) {
    std::cerr << "engine fault: " << e.what() << "\n";
    return kEngineFault;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEngineFault;
  }
  return kUsage;
}
