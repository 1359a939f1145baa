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


#include <benchmark/benchmark.h>

#include "fatal/constraints.hpp"
#include "fatal/engine.hpp"
#include "fatal/verifier.hpp"

namespace {

fatal::SimConfig config(int n, int f, bool byzantine) {
  fatal::SimConfig c;
  c.params.n = n;
  c.params.f = f;
  c.horizon_auto = false;
  c.horizon = 100'000'000;
  if (byzantine) {
    for (int i = 0; i < f; ++i) c.faults.nodes.push_back(n - 1 - i);
    c.faults.strategy = "random-flip";
  }
  c.resolve();
  return c;
}

void BM_Solve(benchmark::State& state) {
  fatal::Params p;
  p.theta = 1.2;
  for (auto _ : state) benchmark::DoNotOptimize(fatal::solve(p));
}
BENCHMARK(BM_Solve);

void BM_Run(benchmark::State& state) {
  const auto c = config(static_cast<int>(state.range(0)),
                        static_cast<int>(state.range(1)), state.range(2) != 0);
  std::size_t records = 0;
  for (auto _ : state) {
    const auto tr = fatal::run(c);
    records = tr.records.size();
  }
  state.counters["records"] = static_cast<double>(records);
}
BENCHMARK(BM_Run)
    ->Args({4, 1, 0})
    ->Args({4, 1, 1})
    ->Args({7, 2, 1})
    ->Unit(benchmark::kMillisecond);

void BM_Verify(benchmark::State& state) {
  const auto tr = fatal::run(config(4, 1, false));
  for (auto _ : state) benchmark::DoNotOptimize(fatal::verify(tr));
}
BENCHMARK(BM_Verify)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
