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


#include "fatal/verifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace fatal {

namespace {

constexpr std::uint8_t kAccept = static_cast<std::uint8_t>(CoreState::accept);
constexpr std::uint8_t kSleep = static_cast<std::uint8_t>(CoreState::sleep);
constexpr std::uint8_t kSleepWaking =
    static_cast<std::uint8_t>(CoreState::sleep_waking);
constexpr std::uint8_t kPropose = static_cast<std::uint8_t>(CoreState::propose);
constexpr std::uint8_t kJoin = static_cast<std::uint8_t>(CoreState::join);

std::vector<NodeId> members(NodeSet w, int n) {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < n; ++i) {
    if ((w >> i) & 1u) out.push_back(i);
  }
  return out;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string set_string(NodeSet w, int n) {
  std::string s;
  for (NodeId i : members(w, n)) {
    if (!s.empty()) s += ",";
    s += std::to_string(i);
  }
  return s.empty() ? "-" : s;
}

// Integer range covered by an interval with real endpoints.
std::pair<Time, Time> grid(double a, double b, bool a_open, bool b_open) {
  const Time lo = a_open ? static_cast<Time>(std::floor(a)) + 1
                         : static_cast<Time>(std::ceil(a));
  const Time hi = b_open ? static_cast<Time>(std::ceil(b)) - 1
                         : static_cast<Time>(std::floor(b));
  return {lo, hi};
}

// Times of v inside the integer range [lo, hi].
std::vector<Time> within(const std::vector<Time>& v, Time lo, Time hi) {
  auto a = std::lower_bound(v.begin(), v.end(), lo);
  auto b = std::upper_bound(v.begin(), v.end(), hi);
  return std::vector<Time>(a, b);
}

bool any_within(const std::vector<Time>& v, Time lo, Time hi) {
  auto a = std::lower_bound(v.begin(), v.end(), lo);
  return a != v.end() && *a <= hi;
}

}  // namespace

TraceIndex::TraceIndex(const ExecutionTrace& trace)
    : n_(trace.config.params.n),
      horizon_(trace.config.horizon),
      d_(trace.config.d_ticks()),
      params_(trace.config.params),
      timeouts_(trace.config.timeouts),
      dc_(derived_constants(trace.config.params, trace.config.timeouts)),
      init_(trace.config.init),
      signals_(n_),
      accepts_(n_),
      loops_(n_),
      faulty_since_(n_, kNever) {
  for (const TraceRecord& r : trace.records) {
    if (r.node < 0 || r.node >= n_) {
      throw StructuralError("trace record for unknown node");
    }
    switch (r.kind) {
      case RecordKind::state: {
        if (r.sub >= kMachineCount) throw StructuralError("bad machine id");
        auto& s = signals_[r.node][r.sub];
        const auto v = static_cast<std::uint8_t>(r.value);
        if (!s.empty() && s.events().back().second == r.t) {
          if (s.events().back().first != v) {
            throw StructuralError("two states for one machine at one time");
          }
          break;
        }
        s.append_switch(v, r.t);
        break;
      }
      case RecordKind::loop:
        loops_[r.node].emplace_back(static_cast<Time>(r.value), r.t);
        break;
      case RecordKind::fault:
        if (r.aux < 0) {
          faulty_since_[r.node] = std::min(faulty_since_[r.node], r.t);
        } else {
          faulty_channels_.emplace_back(r.aux, r.node);
        }
        break;
      case RecordKind::reset:
        resets_.emplace_back(r.node, r.t);
        break;
      default:
        break;
    }
  }
  for (NodeId i = 0; i < n_; ++i) {
    for (int m = 0; m < kMachineCount; ++m) {
      if (signals_[i][m].empty()) {
        throw StructuralError("trace lacks the initial state of node " +
                              std::to_string(i));
      }
    }
    accepts_[i] = switches_to(i, Machine::core, kAccept);
    std::sort(loops_[i].begin(), loops_[i].end());
  }
}

std::vector<Time> TraceIndex::switches_to(NodeId i, Machine m,
                                          std::uint8_t s) const {
  return signal(i, m).switches_to(s);
}

std::vector<Time> TraceIndex::switch_times(NodeId i, Machine m) const {
  std::vector<Time> out;
  const auto& ev = signal(i, m).events();
  for (std::size_t k = 1; k < ev.size(); ++k) out.push_back(ev[k].second);
  return out;
}

bool TraceIndex::in_state_during(NodeId i, Machine m, std::uint8_t s, Time a,
                                 Time b, bool a_open, bool b_open) const {
  const Time lo = std::max<Time>(0, a_open ? a + 1 : a);
  const Time hi = b_open ? b - 1 : b;
  if (lo > hi) return false;
  const auto& sig = signal(i, m);
  if (sig.state_at(lo) == s) return true;
  const auto& ev = sig.events();
  auto it = std::upper_bound(
      ev.begin(), ev.end(), lo,
      [](Time q, const std::pair<std::uint8_t, Time>& e) { return q < e.second; });
  for (; it != ev.end() && it->second <= hi; ++it) {
    if (it->first == s) return true;
  }
  return false;
}

std::optional<Time> TraceIndex::loop_delivery(NodeId i, Time sent) const {
  const auto& v = loops_[i];
  auto it = std::lower_bound(v.begin(), v.end(), std::make_pair(sent, Time{0}));
  if (it != v.end() && it->first == sent) return it->second;
  return std::nullopt;
}

PulseBounds PulseBounds::strong(const Params& p, const TimeoutAssignment& a) {
  PulseBounds b;
  const double d = p.d;
  b.first_window = 3 * d;
  b.skew = 2 * d;
  b.gap_lo = (a.T2 + a.T3) / p.theta - 2 * d;
  b.gap_hi = a.T2 + a.T4 + 7 * d;
  b.first_gap_lo = (a.T2 + a.T3) / p.theta - 3 * d;
  return b;
}

PulseBounds PulseBounds::weak(const Params& p, const TimeoutAssignment& a) {
  PulseBounds b;
  const double d = p.d;
  b.first_window = 3 * d;
  b.skew = 3 * d;
  b.gap_lo = (a.T2 + a.T3) / p.theta - 3 * d;
  b.gap_hi = a.T2 + a.T4 + 8 * d;
  b.first_gap_lo = b.gap_lo;
  return b;
}

std::vector<Time> find_points(const TraceIndex& idx, NodeSet w, Time window,
                              Time from) {
  const auto nodes = members(w, idx.n());
  if (nodes.empty()) return {};
  std::vector<Time> all;
  for (NodeId i : nodes) {
    const auto& a = idx.accepts(i);
    all.insert(all.end(), std::lower_bound(a.begin(), a.end(), from), a.end());
  }
  std::sort(all.begin(), all.end());
  std::vector<Time> out;
  std::size_t k = 0;
  while (k < all.size()) {
    const Time t = all[k];
    bool ok = true;
    for (NodeId i : nodes) {
      if (!any_within(idx.accepts(i), t, t + window - 1)) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++k;
      continue;
    }
    out.push_back(t);
    while (k < all.size() && all[k] < t + window) ++k;
  }
  return out;
}

std::vector<Time> find_stabilization_points(const TraceIndex& idx, NodeSet w) {
  return find_points(idx, w, 2 * idx.d());
}

std::vector<Time> find_quasi_points(const TraceIndex& idx, NodeSet w) {
  return find_points(idx, w, 3 * idx.d());
}

bool has_point_in(const TraceIndex& idx, NodeSet w, Time window, Time lo,
                  Time hi) {
  const auto nodes = members(w, idx.n());
  if (nodes.empty()) return false;
  for (NodeId c : nodes) {
    for (Time t : within(idx.accepts(c), lo + 1, hi)) {
      bool ok = true;
      for (NodeId i : nodes) {
        if (!any_within(idx.accepts(i), t, t + window - 1)) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    }
  }
  return false;
}

SkewAccuracy check_skew_accuracy(const TraceIndex& idx, NodeSet w, Time from,
                                 const PulseBounds& b, bool stop_at_first) {
  SkewAccuracy res;
  const auto nodes = members(w, idx.n());
  const Time horizon = idx.horizon();
  std::vector<std::vector<Time>> p;
  for (NodeId i : nodes) {
    const auto& a = idx.accepts(i);
    p.emplace_back(std::lower_bound(a.begin(), a.end(), from), a.end());
  }
  res.gap_min = std::numeric_limits<double>::infinity();
  auto fail = [&](Finding f, Time restart) {
    res.pass = false;
    if (res.violations.empty()) res.restart_after = restart;
    res.violations.push_back(std::move(f));
    return stop_at_first;
  };
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (p[k].empty() || p[k][0] >= from + b.first_window) {
      fail({"start", nodes[k], from, "no accept within the starting window"},
           from);
      res.gap_min = 0;
      return res;
    }
  }
  res.rounds = 1;
  std::vector<Time> round_start{from};
  for (std::size_t r = 1;; ++r) {
    Time lo = kNever, hi = -1;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (p[k].size() > r) {
        lo = std::min(lo, p[k][r]);
        hi = std::max(hi, p[k][r]);
      }
    }
    if (hi < 0) break;
    round_start.push_back(lo);
    const Time restart = round_start[r - 1];
    bool stop = false;
    for (std::size_t k = 0; k < nodes.size() && !stop; ++k) {
      if (p[k].size() > r) continue;
      const double due = std::min(p[k][r - 1] + b.gap_hi,
                                  static_cast<double>(lo) + b.skew);
      if (due < static_cast<double>(horizon)) {
        stop = fail({"missing-pulse", nodes[k], p[k][r - 1],
                     "round " + std::to_string(r) + " never reached"},
                    restart);
      }
    }
    const double skew = static_cast<double>(hi - lo);
    res.skew_max = std::max(res.skew_max, skew);
    if (!stop && skew > b.skew) {
      stop = fail({"skew", -1, lo,
                   "round " + std::to_string(r) + " spread " + fmt(skew)},
                  restart);
    }
    for (std::size_t k = 0; k < nodes.size() && !stop; ++k) {
      if (p[k].size() <= r) continue;
      const double g = static_cast<double>(p[k][r] - p[k][r - 1]);
      res.gap_min = std::min(res.gap_min, g);
      res.gap_max = std::max(res.gap_max, g);
      const double glo = r == 1 ? b.first_gap_lo : b.gap_lo;
      if (g < glo || g > b.gap_hi) {
        stop = fail({"accuracy", nodes[k], p[k][r],
                     "gap " + fmt(g) + " outside [" + fmt(glo) + ", " +
                         fmt(b.gap_hi) + "]"},
                    restart);
      }
    }
    if (stop) return res;
    ++res.rounds;
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (p[k].back() + b.gap_hi < static_cast<double>(horizon)) {
      if (fail({"missing-pulse", nodes[k], p[k].back(),
                "no pulse after the last one"},
               round_start.back())) {
        return res;
      }
    }
  }
  if (!std::isfinite(res.gap_min)) res.gap_min = 0;
  return res;
}

std::optional<Time> stabilization_time(const TraceIndex& idx, NodeSet w,
                                       const PulseBounds& b) {
  const auto qs = find_quasi_points(idx, w);
  std::size_t k = 0;
  while (k < qs.size()) {
    const SkewAccuracy r = check_skew_accuracy(idx, w, qs[k], b, true);
    if (r.pass) return qs[k];
    const Time next = std::max(r.restart_after, qs[k] + 1);
    ++k;
    while (k < qs.size() && qs[k] < next) ++k;
  }
  return std::nullopt;
}

std::pair<std::vector<Time>, std::vector<Time>> find_resync_points(
    const TraceIndex& idx, NodeSet w) {
  const auto nodes = members(w, idx.n());
  std::pair<std::vector<Time>, std::vector<Time>> out;
  if (nodes.empty()) return out;
  std::vector<std::vector<Time>> sr;
  std::vector<Time> all;
  for (NodeId i : nodes) {
    sr.push_back(idx.switches_to(i, Machine::rmain, kRSuppResync));
    all.insert(all.end(), sr.back().begin(), sr.back().end());
  }
  std::sort(all.begin(), all.end());
  const Time d = idx.d();
  const double T1 = idx.timeouts().T1;
  const double th = idx.params().theta;
  std::size_t k = 0;
  while (k < all.size()) {
    const Time s = all[k];
    bool ok = true;
    for (const auto& v : sr) {
      if (!any_within(v, s, s + 2 * d - 1)) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++k;
      continue;
    }
    const Time t = s - 1;
    out.first.push_back(t);
    bool good = true;
    const auto [slo, shi] = grid(static_cast<double>(t) - (th + 3) * T1,
                                 static_cast<double>(t), true, true);
    const auto [jlo, jhi] = grid(static_cast<double>(t) - T1 - d,
                                 static_cast<double>(t + 4 * d), false, true);
    for (NodeId i : nodes) {
      if (any_within(idx.switches_to(i, Machine::core, kSleep), slo, shi) ||
          idx.in_state_during(i, Machine::core, kJoin, jlo, jhi, false,
                              false)) {
        good = false;
        break;
      }
    }
    if (good) out.second.push_back(t);
    while (k < all.size() && all[k] < s + 2 * d) ++k;
  }
  return out;
}

std::vector<MetastabilityEvent> check_metastability_freedom(
    const TraceIndex& idx, NodeId node, Machine m, Time lo, Time hi) {
  std::vector<MetastabilityEvent> out;
  const auto& ev = idx.signal(node, m).events();
  for (std::size_t k = 1; k + 1 < ev.size(); ++k) {
    const Time t = ev[k].second;
    if (t < lo) continue;
    if (t >= hi) break;
    const Time next = ev[k + 1].second;
    const auto del = idx.loop_delivery(node, t);
    if (del && *del > next) out.push_back({node, m, t, *del, next});
  }
  return out;
}

SleepCheck check_sleep_windows(const TraceIndex& idx, NodeSet w, Time lo,
                               Time hi) {
  SleepCheck res;
  const auto nodes = members(w, idx.n());
  const int n = idx.n(), f = idx.params().f;
  const double T1 = idx.timeouts().T1, th = idx.params().theta;
  const double d = static_cast<double>(idx.d());
  const DerivedConstants& dc = idx.derived();
  std::vector<Time> sleeps, wakes;
  for (NodeId i : nodes) {
    const auto s = idx.switches_to(i, Machine::core, kSleep);
    sleeps.insert(sleeps.end(), s.begin(), s.end());
    const auto sw = idx.switches_to(i, Machine::core, kSleepWaking);
    wakes.insert(wakes.end(), sw.begin(), sw.end());
  }
  std::sort(sleeps.begin(), sleeps.end());
  std::sort(wakes.begin(), wakes.end());
  for (Time ts : sleeps) {
    if (static_cast<double>(ts) < lo + T1 + d || ts > hi) continue;
    const double tplus = std::min(static_cast<double>(ts) + dc.Delta_s,
                                  static_cast<double>(hi));
    const auto [jlo, jhi] =
        grid(static_cast<double>(ts) - T1 - d, tplus, false, false);
    bool join_free = true;
    for (NodeId i : nodes) {
      if (idx.in_state_during(i, Machine::core, kJoin, jlo, jhi, false,
                              false)) {
        join_free = false;
        break;
      }
    }
    if (!join_free) {
      ++res.not_applicable;
      continue;
    }
    ++res.applicable;

    // Support: n-2f nodes that accepted recently and stay away from propose
    // and accept for a while.
    const auto [alo, ahi] =
        grid(static_cast<double>(ts) - T1 - d, static_cast<double>(ts), true, true);
    const auto [plo, phi] =
        grid(static_cast<double>(ts), tplus, true, true);
    int support = 0;
    for (NodeId i : nodes) {
      if (!idx.in_state_during(i, Machine::core, kAccept, alo, ahi, false,
                               false)) {
        continue;
      }
      if (plo <= phi &&
          (idx.in_state_during(i, Machine::core, kPropose, plo, phi, false,
                               false) ||
           any_within(idx.accepts(i), plo, phi))) {
        continue;
      }
      ++support;
    }
    if (support < n - 2 * f) {
      res.violations.push_back({"sleep-support", -1, ts,
                                "only " + std::to_string(support) +
                                    " supporting nodes"});
    }

    const auto in_win = within(sleeps, ts, static_cast<Time>(std::floor(tplus)));
    if (!in_win.empty() &&
        static_cast<double>(in_win.back() - in_win.front()) > 2 * T1 + 3 * d) {
      res.violations.push_back(
          {"sleep-span", -1, ts,
           "sleep switches span " +
               fmt(static_cast<double>(in_win.back() - in_win.front()))});
    }
    const auto [blo, bhi] = grid(static_cast<double>(ts) - (th + 1) * T1 - d,
                                 static_cast<double>(ts), true, true);
    if (!any_within(sleeps, blo, bhi)) {
      const double wend =
          std::min(tplus + (1 + 1 / th) * T1, static_cast<double>(hi));
      const auto ww = within(wakes, ts, static_cast<Time>(std::floor(wend)));
      if (!ww.empty() &&
          static_cast<double>(ww.back() - ww.front()) > dc.delta_s_tilde) {
        res.violations.push_back(
            {"sleep-waking-span", -1, ts,
             "sleep_waking switches span " +
                 fmt(static_cast<double>(ww.back() - ww.front()))});
      }
    }
  }
  return res;
}

std::vector<CoherentWindow> coherency_windows(const TraceIndex& idx) {
  const int n = idx.n(), f = idx.params().f;
  const Time L = idx.init_policy() == InitPolicy::random
                     ? static_cast<Time>(std::ceil(idx.derived().hatE3))
                     : 0;
  NodeSet correct = 0;
  for (NodeId i = 0; i < n; ++i) {
    if (idx.faulty_since(i) == kNever) correct |= 1u << i;
  }
  std::vector<std::uint32_t> bad(n, 0);
  for (auto [s, d] : idx.faulty_channels()) {
    bad[s] |= 1u << d;
    bad[d] |= 1u << s;
  }
  auto clean = [&](NodeSet s) {
    for (NodeId i : members(s, n)) {
      if (bad[i] & s) return false;
    }
    return true;
  };
  Time start = L;
  for (auto [i, t] : idx.resets()) {
    if ((correct >> i) & 1u) start = std::max(start, t + L);
  }
  std::vector<CoherentWindow> out;
  const bool weak = !clean(correct);
  bool ok = true;
  if (weak) {
    // Every node needs a clean (n-f)-subset around it.
    for (NodeId i : members(correct, n)) {
      bool found = false;
      for (NodeSet s = correct; s && !found; s = (s - 1) & correct) {
        if (((s >> i) & 1u) && std::popcount(s) == n - f && clean(s)) {
          found = true;
        }
      }
      if (!found) ok = false;
    }
  }
  if (ok && start <= idx.horizon()) {
    out.push_back({correct, start, idx.horizon(), weak});
  }
  for (NodeId i = 0; i < n; ++i) {
    const Time c = idx.faulty_since(i);
    if (c != kNever && c > L && clean(correct | (1u << i))) {
      out.push_back({correct | (1u << i), L, c, false});
    }
  }
  return out;
}

std::vector<Finding> check_stability_chain(const TraceIndex& idx, NodeSet w,
                                           Time t, int* rounds) {
  std::vector<Finding> out;
  const auto nodes = members(w, idx.n());
  const Time d = idx.d();
  const double th = idx.params().theta;
  const TimeoutAssignment& a = idx.timeouts();
  const double lo_gap = (a.T2 + a.T3) / th;
  const double hi_gap = a.T2 + a.T4 + 5 * static_cast<double>(d);
  int r = 0;
  while (true) {
    for (NodeId i : nodes) {
      const auto c = within(idx.accepts(i), t, t + 3 * d - 1);
      if (c.size() != 1) {
        out.push_back({"stability-i", i, t,
                       std::to_string(c.size()) + " accepts in [t, t+3d)"});
      }
    }
    if (!out.empty()) break;
    // Next stabilization point after the current round.
    const auto next = find_points(idx, w, 2 * d, t + 3 * d);
    const double limit = static_cast<double>(t) + hi_gap;
    if (next.empty()) {
      if (limit + 4 * d <= static_cast<double>(idx.horizon())) {
        out.push_back({"stability-ii", -1, t, "no next stabilization point"});
      }
      break;
    }
    const Time tn = next.front();
    if (static_cast<double>(tn) <= t + lo_gap ||
        static_cast<double>(tn) >= limit) {
      out.push_back({"stability-ii", -1, t,
                     "next stabilization point at " + std::to_string(tn)});
      break;
    }
    for (NodeId i : nodes) {
      if (any_within(idx.accepts(i), t + 3 * d, tn - 1)) {
        out.push_back({"stability-ii", i, t, "accept before the next point"});
      }
      for (const auto& e : check_metastability_freedom(
               idx, i, Machine::core, t + 4 * d, tn + 4 * d)) {
        out.push_back({"stability-iii", i, e.t,
                       "loopback at " + std::to_string(e.delivery) +
                           " after next switch at " + std::to_string(e.next)});
      }
    }
    if (!out.empty()) break;
    ++r;
    if (tn + 4 * d > idx.horizon()) break;
    t = tn;
  }
  if (rounds) *rounds = r;
  return out;
}

VerifierReport verify(const ExecutionTrace& trace, const VerifyOptions& opts) {
  const TraceIndex idx(trace);
  VerifierReport rep;
  rep.config_text = format_config(trace.config);
  rep.seed = trace.config.seed;
  rep.horizon = idx.horizon();
  const int n = idx.n();
  const Params& p = idx.params();
  const TimeoutAssignment& a = idx.timeouts();
  const Time d = idx.d();

  rep.windows = coherency_windows(idx);
  NodeSet correct = 0;
  for (NodeId i = 0; i < n; ++i) {
    if (idx.faulty_since(i) == kNever) correct |= 1u << i;
  }
  rep.weak = !idx.faulty_channels().empty();
  rep.nodes = opts.nodes.value_or(correct);
  rep.coherent_from = rep.windows.empty() ? idx.horizon() + 1
                                          : rep.windows.front().start;
  if (opts.coherent_from) rep.coherent_from = *opts.coherent_from;
  rep.k = opts.k >= 0 ? opts.k : p.k;
  rep.T_k = idx.derived().T_of_k(rep.k, a, p.theta);
  if (rep.weak) rep.T_k += a.T2 + a.T4 + 5 * p.d;

  for (NodeId i = 0; i < n; ++i) rep.pulses.push_back(idx.accepts(i));
  rep.quasi_points = find_quasi_points(idx, rep.nodes);
  rep.stabilization_points = find_stabilization_points(idx, rep.nodes);
  std::tie(rep.resync_points, rep.good_resync_points) =
      find_resync_points(idx, rep.nodes);

  const PulseBounds b =
      rep.weak ? PulseBounds::weak(p, a) : PulseBounds::strong(p, a);
  rep.conclusive = static_cast<double>(idx.horizon()) >=
                   rep.T_k + a.T2 + a.T4 + 8 * p.d;
  const auto st = stabilization_time(idx, rep.nodes, b);
  if (st) {
    rep.stabilized = true;
    rep.stabilization_time = *st;
    rep.within_bound = static_cast<double>(*st) <= rep.T_k;
    const SkewAccuracy sa = check_skew_accuracy(idx, rep.nodes, *st, b, false);
    rep.rounds = sa.rounds;
    rep.skew_max = sa.skew_max;
    rep.accuracy_min = sa.gap_min;
    rep.accuracy_max = sa.gap_max;
    if (!rep.within_bound && rep.conclusive) {
      rep.violations.push_back({"stabilization", -1, *st,
                                "stabilized after T(k) = " + fmt(rep.T_k)});
    }
    for (NodeId i : members(rep.nodes, n)) {
      for (const auto& e : check_metastability_freedom(
               idx, i, Machine::core, *st + 4 * d, idx.horizon())) {
        rep.metastability_events.push_back(e);
        rep.violations.push_back({"metastability", i, e.t,
                                  "loopback at " + std::to_string(e.delivery) +
                                      " after next switch at " +
                                      std::to_string(e.next)});
      }
    }
  } else if (rep.conclusive) {
    rep.violations.push_back(
        {"stabilization", -1, 0, "no stabilization point up to the horizon"});
  }

  if (!rep.weak && rep.coherent_from <= idx.horizon()) {
    const double reach = a.R1 / p.theta - 3 * p.d;
    for (Time tg : rep.good_resync_points) {
      if (tg < rep.coherent_from) continue;
      if (static_cast<double>(tg) + a.R1 / p.theta >
          static_cast<double>(idx.horizon())) {
        break;
      }
      ++rep.resync_checked;
      if (!has_point_in(idx, rep.nodes, 3 * d, tg,
                        static_cast<Time>(std::floor(tg + reach)))) {
        rep.violations.push_back(
            {"resync-stabilization", -1, tg,
             "no quasi-stabilization point within R1/theta - 3d"});
      }
    }
    const SleepCheck sc =
        check_sleep_windows(idx, rep.nodes, rep.coherent_from, idx.horizon());
    rep.sleep_applicable = sc.applicable;
    rep.sleep_not_applicable = sc.not_applicable;
    rep.violations.insert(rep.violations.end(), sc.violations.begin(),
                          sc.violations.end());
  }
  return rep;
}

std::string VerifierReport::format() const {
  std::ostringstream os;
  std::istringstream cfg(config_text);
  std::string line;
  os << "# resolved configuration\n";
  while (std::getline(cfg, line)) os << (line.empty() ? "#" : "# " + line) << "\n";
  const int n = static_cast<int>(pulses.size());
  os << "[report]\n"
     << "result = " << (pass() ? "pass" : "fail") << "\n"
     << "seed = " << seed << "\n"
     << "horizon = " << horizon << "\n"
     << "mode = " << (weak ? "weak" : "strong") << "\n"
     << "nodes = " << set_string(nodes, n) << "\n"
     << "coherent_from = " << coherent_from << "\n"
     << "k = " << k << "\n"
     << "T_k = " << fmt(T_k) << "\n"
     << "conclusive = " << (conclusive ? "true" : "false") << "\n"
     << "stabilized = " << (stabilized ? "true" : "false") << "\n";
  if (stabilized) {
    os << "stabilization_time = " << stabilization_time << "\n"
       << "within_T_k = " << (within_bound ? "true" : "false") << "\n"
       << "rounds = " << rounds << "\n"
       << "skew_max = " << fmt(skew_max) << "\n"
       << "accuracy_min = " << fmt(accuracy_min) << "\n"
       << "accuracy_max = " << fmt(accuracy_max) << "\n";
  }
  os << "quasi_points = " << quasi_points.size() << "\n"
     << "stabilization_points = " << stabilization_points.size() << "\n"
     << "resync_points = " << resync_points.size() << "\n"
     << "good_resync_points = " << good_resync_points.size() << "\n"
     << "resync_checked = " << resync_checked << "\n"
     << "sleep_windows = " << sleep_applicable << "\n"
     << "sleep_windows_not_applicable = " << sleep_not_applicable << "\n"
     << "metastability_events = " << metastability_events.size() << "\n"
     << "violations = " << violations.size() << "\n";
  os << "[pulses]\n";
  for (int i = 0; i < n; ++i) {
    os << "node" << i << " = " << pulses[i].size();
    if (!pulses[i].empty()) {
      os << " first " << pulses[i].front() << " last " << pulses[i].back();
    }
    os << "\n";
  }
  os << "[windows]\n";
  for (const CoherentWindow& w : windows) {
    os << set_string(w.nodes, n) << " [" << w.start << ", " << w.end << "]"
       << (w.weak ? " weak" : "") << "\n";
  }
  os << "[violations]\n";
  for (const Finding& f : violations) {
    os << f.kind << " t=" << f.t;
    if (f.node >= 0) os << " node=" << f.node;
    os << " " << f.detail << "\n";
  }
  return os.str();
}

std::string VerifierReport::summary_line() const {
  std::ostringstream os;
  os << (pass() ? "PASS" : "FAIL") << " seed=" << seed;
  if (stabilized) {
    os << " stabilized=" << stabilization_time << " T_k=" << fmt(T_k)
       << " skew=" << fmt(skew_max) << " gaps=[" << fmt(accuracy_min) << ","
       << fmt(accuracy_max) << "]";
  } else {
    os << " stabilized=no";
  }
  os << " violations=" << violations.size();
  if (!violations.empty()) os << " first=" << violations.front().kind;
  return os.str();
}

}  // namespace fatal
