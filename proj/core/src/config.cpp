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


#include "fatal/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace fatal {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw ConfigError("");
    return x;
  } catch (...) {
    throw ConfigError("bad number for " + key + ": " + v);
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw ConfigError("");
    return x;
  } catch (...) {
    throw ConfigError("bad integer for " + key + ": " + v);
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw ConfigError("");
    return x;
  } catch (...) {
    throw ConfigError("bad integer for " + key + ": " + v);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("bad boolean for " + key + ": " + v);
}

// Durations may be given in ticks or as a multiple of d ("40d").
Time to_time(const std::string& key, const std::string& v, double d) {
  if (!v.empty() && v.back() == 'd') {
    return static_cast<Time>(
        std::llround(to_double(key, v.substr(0, v.size() - 1)) * d));
  }
  return static_cast<Time>(to_int(key, v));
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const std::set<std::string> kStrategyOptions = {
    "crash_time", "nice", "toggle"};

}  // namespace

std::string to_string(InitPolicy p) {
  switch (p) {
    case InitPolicy::random:
      return "random";
    case InitPolicy::synchronized:
      return "synchronized";
    case InitPolicy::accept:
      return "accept";
  }
  return "?";
}

std::string to_string(ClockPolicy p) {
  switch (p) {
    case ClockPolicy::constant:
      return "constant";
    case ClockPolicy::random:
      return "random";
    case ClockPolicy::extremes:
      return "extremes";
    case ClockPolicy::random_extremes:
      return "random_extremes";
  }
  return "?";
}

std::string to_string(DelayPolicy p) {
  switch (p) {
    case DelayPolicy::random:
      return "random";
    case DelayPolicy::max:
      return "max";
    case DelayPolicy::min:
      return "min";
    case DelayPolicy::half:
      return "half";
    case DelayPolicy::random_extremes:
      return "random_extremes";
  }
  return "?";
}

SimConfig parse_config(const std::string& text) {
  SimConfig c;
  // Two passes: params first so that "Nd" durations know d.
  struct Entry {
    std::string section, key, value;
    int line;
  };
  std::vector<Entry> entries;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  const std::set<std::string> sections = {"params", "timeouts", "faults",
                                          "clocks", "init",     "run",
                                          "darts"};
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section)) {
        throw ConfigError("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key outside section");
    }
    entries.push_back({section, trim(line.substr(0, eq)),
                       trim(line.substr(eq + 1)), lineno});
  }

  bool explicit_timeouts = false;
  std::set<std::string> seen_timeouts;
  for (int pass = 0; pass < 2; ++pass) {
    for (const Entry& e : entries) {
      if ((e.section == "params") != (pass == 0)) continue;
      const std::string& k = e.key;
      const std::string& v = e.value;
      const std::string where = "[" + e.section + "] " + k;
      Params& p = c.params;
      if (e.section == "params") {
        if (k == "theta") p.theta = to_double(where, v);
        else if (k == "d") p.d = to_double(where, v);
        else if (k == "n") p.n = static_cast<int>(to_int(where, v));
        else if (k == "f") p.f = static_cast<int>(to_int(where, v));
        else if (k == "alpha") p.alpha = to_double(where, v);
        else if (k == "boost_x") p.boost_x = to_double(where, v);
        else if (k == "k") p.k = static_cast<int>(to_int(where, v));
        else if (k == "fast_rejoin") c.fast_rejoin = to_bool(where, v);
        else throw ConfigError("unknown key " + where);
      } else if (e.section == "timeouts") {
        TimeoutAssignment& a = c.timeouts;
        if (k == "mode") {
          if (v == "solve") explicit_timeouts = false;
          else if (v == "explicit") explicit_timeouts = true;
          else throw ConfigError("bad value for " + where + ": " + v);
        } else if (k == "grid") {
          c.grid = to_double(where, v);
        } else {
          double* slot = nullptr;
          if (k == "T1") slot = &a.T1;
          else if (k == "T2") slot = &a.T2;
          else if (k == "T3") slot = &a.T3;
          else if (k == "T4") slot = &a.T4;
          else if (k == "T5") slot = &a.T5;
          else if (k == "T6") slot = &a.T6;
          else if (k == "T7") slot = &a.T7;
          else if (k == "R1") slot = &a.R1;
          else if (k == "R2") slot = &a.R2;
          else if (k == "R3_lo") slot = &a.R3_lo;
          else if (k == "R3_hi") slot = &a.R3_hi;
          else throw ConfigError("unknown key " + where);
          *slot = to_double(where, v);
          seen_timeouts.insert(k);
        }
      } else if (e.section == "faults") {
        FaultSpec& fs = c.faults;
        if (k == "mode") {
          if (v == "static") fs.adaptive = false;
          else if (v == "adaptive") fs.adaptive = true;
          else throw ConfigError("bad value for " + where + ": " + v);
        } else if (k == "budget") {
          fs.budget = static_cast<int>(to_int(where, v));
        } else if (k == "nodes") {
          fs.nodes.clear();
          for (const auto& s : split(v, ',')) {
            fs.nodes.push_back(static_cast<NodeId>(to_int(where, s)));
          }
        } else if (k == "channels") {
          fs.channels.clear();
          for (const auto& s : split(v, ',')) {
            const auto gt = s.find('>');
            if (gt == std::string::npos) {
              throw ConfigError("channel must be src>dst in " + where);
            }
            fs.channels.emplace_back(
                static_cast<NodeId>(to_int(where, trim(s.substr(0, gt)))),
                static_cast<NodeId>(to_int(where, trim(s.substr(gt + 1)))));
          }
        } else if (k == "strategy") {
          fs.strategy = v;
        } else if (kStrategyOptions.count(k)) {
          fs.options[k] = v;
        } else {
          throw ConfigError("unknown key " + where);
        }
      } else if (e.section == "clocks") {
        if (k == "policy") {
          if (v == "constant") c.clocks = ClockPolicy::constant;
          else if (v == "random") c.clocks = ClockPolicy::random;
          else if (v == "extremes") c.clocks = ClockPolicy::extremes;
          else if (v == "random_extremes") c.clocks = ClockPolicy::random_extremes;
          else throw ConfigError("bad value for " + where + ": " + v);
        } else if (k == "segment") {
          c.clock_segment = to_time(where, v, p.d);
        } else if (k == "delay") {
          if (v == "random") c.delays = DelayPolicy::random;
          else if (v == "max") c.delays = DelayPolicy::max;
          else if (v == "min") c.delays = DelayPolicy::min;
          else if (v == "half") c.delays = DelayPolicy::half;
          else if (v == "random_extremes") c.delays = DelayPolicy::random_extremes;
          else throw ConfigError("bad value for " + where + ": " + v);
        } else {
          throw ConfigError("unknown key " + where);
        }
      } else if (e.section == "init") {
        if (k == "policy") {
          if (v == "random") c.init = InitPolicy::random;
          else if (v == "synchronized") c.init = InitPolicy::synchronized;
          else if (v == "accept") c.init = InitPolicy::accept;
          else throw ConfigError("bad value for " + where + ": " + v);
        } else if (k == "seed") {
          c.seed = to_u64(where, v);
        } else if (k == "reset") {
          c.resets.clear();
          for (const auto& s : split(v, ',')) {
            const auto at = s.find('@');
            if (at == std::string::npos) {
              throw ConfigError("reset must be node@time in " + where);
            }
            c.resets.push_back(
                {static_cast<NodeId>(to_int(where, trim(s.substr(0, at)))),
                 to_time(where, trim(s.substr(at + 1)), p.d)});
          }
        } else {
          throw ConfigError("unknown key " + where);
        }
      } else if (e.section == "run") {
        if (k == "horizon") {
          if (v == "auto") {
            c.horizon_auto = true;
          } else {
            c.horizon_auto = false;
            c.horizon = to_time(where, v, p.d);
            if (c.horizon < 0) throw ConfigError("horizon must be >= 0");
          }
        } else if (k == "trials") {
          c.trials = static_cast<int>(to_int(where, v));
        } else if (k == "k") {
          c.ks.clear();
          for (const auto& s : split(v, ',')) {
            c.ks.push_back(static_cast<int>(to_int(where, s)));
          }
        } else if (k == "jobs") {
          c.jobs = static_cast<int>(to_int(where, v));
        } else if (k == "record") {
          if (v == "minimal") c.record = RecordLevel::minimal;
          else if (v == "full") c.record = RecordLevel::full;
          else throw ConfigError("bad value for " + where + ": " + v);
        } else {
          throw ConfigError("unknown key " + where);
        }
      } else if (e.section == "darts") {
        if (k == "script") {
          if (v == "off") c.darts = DartsScript::off;
          else if (v == "on") c.darts = DartsScript::on;
          else if (v == "periodic") c.darts = DartsScript::periodic;
          else throw ConfigError("bad value for " + where + ": " + v);
        } else if (k == "period") {
          c.darts_period = to_time(where, v, p.d);
        } else {
          throw ConfigError("unknown key " + where);
        }
      }
    }
  }
  c.solve_timeouts = !explicit_timeouts;
  if (explicit_timeouts && seen_timeouts.size() != 11) {
    throw ConfigError("explicit timeouts need T1..T7, R1, R2, R3_lo, R3_hi");
  }
  c.params.validate_basic();
  for (NodeId x : c.faults.nodes) {
    if (x < 0 || x >= c.params.n) throw ConfigError("faulty node out of range");
  }
  for (auto [a, b] : c.faults.channels) {
    if (a < 0 || a >= c.params.n || b < 0 || b >= c.params.n || a == b) {
      throw ConfigError("faulty channel out of range");
    }
  }
  for (const auto& r : c.resets) {
    if (r.node < 0 || r.node >= c.params.n || r.at < 0) {
      throw ConfigError("reset out of range");
    }
  }
  if (!c.faults.adaptive &&
      static_cast<int>(c.faults.nodes.size()) > c.params.f) {
    throw ConfigError("more static faulty nodes than f");
  }
  if (c.trials < 0) throw ConfigError("trials must be >= 0");
  if (c.darts == DartsScript::periodic && c.darts_period <= 0) {
    throw ConfigError("periodic DARTS script needs a positive period");
  }
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void SimConfig::resolve() {
  params.validate_basic();
  if (solve_timeouts) {
    timeouts = solve(params, SolveOptions{grid});
  } else {
    const auto v = check(params, timeouts, grid);
    if (!v.empty()) {
      throw InfeasibleError("explicit timeouts violate relation " +
                            v.front().relation);
    }
  }
  if (faults.adaptive && faults.budget == 0) faults.budget = params.f;
  if (ks.empty()) ks.push_back(params.k);
  if (clock_segment <= 0) clock_segment = 20 * d_ticks();
  if (horizon_auto) {
    int kmax = params.k;
    for (int k : ks) kmax = std::max(kmax, k);
    const DerivedConstants dc = derived_constants(params, timeouts);
    const double period = timeouts.T2 + timeouts.T4 + 7 * params.d;
    horizon = static_cast<Time>(
        std::ceil(dc.T_of_k(kmax, timeouts, params.theta) + 30 * period));
    horizon_auto = false;
  }
}

std::string format_config(const SimConfig& c) {
  std::ostringstream os;
  const Params& p = c.params;
  os << "[params]\n"
     << "theta = " << fmt(p.theta) << "\n"
     << "d = " << fmt(p.d) << "\n"
     << "n = " << p.n << "\n"
     << "f = " << p.f << "\n"
     << "alpha = " << fmt(p.alpha) << "\n"
     << "boost_x = " << fmt(p.boost_x) << "\n"
     << "k = " << p.k << "\n"
     << "fast_rejoin = " << (c.fast_rejoin ? "true" : "false") << "\n";
  os << "\n[timeouts]\n";
  if (c.solve_timeouts && c.timeouts.T1 == 0) {
    os << "mode = solve\n";
    if (c.grid > 0) os << "grid = " << fmt(c.grid) << "\n";
  } else {
    const TimeoutAssignment& a = c.timeouts;
    os << "mode = explicit\n";
    if (c.grid > 0) os << "grid = " << fmt(c.grid) << "\n";
    os << "T1 = " << fmt(a.T1) << "\nT2 = " << fmt(a.T2)
       << "\nT3 = " << fmt(a.T3) << "\nT4 = " << fmt(a.T4)
       << "\nT5 = " << fmt(a.T5) << "\nT6 = " << fmt(a.T6)
       << "\nT7 = " << fmt(a.T7) << "\nR1 = " << fmt(a.R1)
       << "\nR2 = " << fmt(a.R2) << "\nR3_lo = " << fmt(a.R3_lo)
       << "\nR3_hi = " << fmt(a.R3_hi) << "\n";
  }
  os << "\n[faults]\n"
     << "mode = " << (c.faults.adaptive ? "adaptive" : "static") << "\n";
  if (c.faults.adaptive) os << "budget = " << c.faults.budget << "\n";
  os << "nodes = ";
  for (std::size_t k = 0; k < c.faults.nodes.size(); ++k) {
    os << (k ? "," : "") << c.faults.nodes[k];
  }
  os << "\nchannels = ";
  for (std::size_t k = 0; k < c.faults.channels.size(); ++k) {
    os << (k ? "," : "") << c.faults.channels[k].first << ">"
       << c.faults.channels[k].second;
  }
  os << "\nstrategy = " << c.faults.strategy << "\n";
  for (const auto& [k, v] : c.faults.options) os << k << " = " << v << "\n";
  os << "\n[clocks]\n"
     << "policy = " << to_string(c.clocks) << "\n"
     << "segment = " << c.clock_segment << "\n"
     << "delay = " << to_string(c.delays) << "\n";
  os << "\n[init]\n"
     << "policy = " << to_string(c.init) << "\n"
     << "seed = " << c.seed << "\n";
  if (!c.resets.empty()) {
    os << "reset = ";
    for (std::size_t k = 0; k < c.resets.size(); ++k) {
      os << (k ? "," : "") << c.resets[k].node << "@" << c.resets[k].at;
    }
    os << "\n";
  }
  os << "\n[run]\n";
  if (c.horizon_auto) os << "horizon = auto\n";
  else os << "horizon = " << c.horizon << "\n";
  os << "trials = " << c.trials << "\n";
  if (!c.ks.empty()) {
    os << "k = ";
    for (std::size_t k = 0; k < c.ks.size(); ++k) os << (k ? "," : "") << c.ks[k];
    os << "\n";
  }
  if (c.jobs > 0) os << "jobs = " << c.jobs << "\n";
  os << "record = " << (c.record == RecordLevel::full ? "full" : "minimal")
     << "\n";
  os << "\n[darts]\nscript = "
     << (c.darts == DartsScript::off ? "off"
         : c.darts == DartsScript::on ? "on"
                                      : "periodic")
     << "\n";
  if (c.darts == DartsScript::periodic) {
    os << "period = " << c.darts_period << "\n";
  }
  return os.str();
}

}  // namespace fatal
