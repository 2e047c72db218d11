// Copyright 2026 The sigtree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sigtree/emd.h"
#include "sigtree/palette.h"
#include "sigtree/signature.h"

namespace {

using namespace sigtree;

// Image-style signatures: up to four colors, one bit per used block.
std::vector<Signature> make_signatures(std::size_t count, std::size_t colors) {
  std::mt19937_64 rng(5);
  std::vector<Signature> out;
  for (std::size_t i = 0; i < count; ++i) {
    Signature s(16, 8);
    for (std::size_t c = 0; c < colors; ++c) s.set(rng() % 16, 1 + rng() % 8);
    if (s.is_zero()) s.set(0, 8);
    out.push_back(Signature::from_bits(s.to_bits(), 16, 8));
  }
  return out;
}

void BM_EmdSignatures(benchmark::State& state) {
  const CostMatrix cost = cost_matrix(default_palette());
  auto sigs = make_signatures(256, static_cast<std::size_t>(state.range(0)));
  // Drop signatures that picked the same block twice.
  std::erase_if(sigs, [](const Signature& s) {
    for (std::size_t j = 0; j < s.bins(); ++j) {
      if (s.block_popcount(j) > 1) return true;
    }
    return false;
  });
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& a = sigs[i % sigs.size()];
    const auto& b = sigs[(i * 7 + 3) % sigs.size()];
    benchmark::DoNotOptimize(emd_signatures(a, b, cost));
    ++i;
  }
}
BENCHMARK(BM_EmdSignatures)->Arg(1)->Arg(2)->Arg(4);

void BM_TransportDense(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c(n * n), s(n), d(n);
  for (double& x : c) x = u(rng);
  for (double& x : s) x = u(rng);
  for (double& x : d) x = u(rng);
  const CostMatrix cost(n, n, c);
  for (auto _ : state) benchmark::DoNotOptimize(transport_cost(s, d, cost));
}
BENCHMARK(BM_TransportDense)->Arg(4)->Arg(16)->Arg(64);

void BM_SolveTransportWithFlows(benchmark::State& state) {
  const CostMatrix cost = cost_matrix(default_palette());
  std::mt19937_64 rng(7);
  std::vector<double> s(16), d(16);
  for (double& x : s) x = static_cast<double>(rng() % 9);
  for (double& x : d) x = static_cast<double>(rng() % 9);
  for (auto _ : state) benchmark::DoNotOptimize(solve_transport(s, d, cost));
}
BENCHMARK(BM_SolveTransportWithFlows);

}  // namespace

BENCHMARK_MAIN();
