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

#include <map>
#include <random>
#include <vector>

#include "sigtree/engine.h"
#include "sigtree/synthetic.h"

namespace {

using namespace sigtree;

std::vector<Signature> synthetic_signatures(std::size_t count, std::uint64_t seed) {
  const IndexConfig cfg;
  std::mt19937_64 rng(seed);
  std::vector<Signature> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(
        encode(histogram(synthetic_image(rng, cfg.palette), cfg.palette), cfg.bits_per_color));
  }
  return out;
}

const Index& shared_index(std::size_t n) {
  static std::map<std::size_t, Index> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    const IndexConfig cfg;
    const auto images = synthetic_corpus(n, 42, cfg.palette);
    it = cache.emplace(n, build_index(images, cfg).index).first;
  }
  return it->second;
}

void BM_TreeBuild(benchmark::State& state) {
  const IndexConfig cfg;
  const auto sigs = synthetic_signatures(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    STree tree(cfg.tree_params(), cost_matrix(cfg.palette));
    for (std::size_t i = 0; i < sigs.size(); ++i) tree.insert(sigs[i], i);
    benchmark::DoNotOptimize(tree.height());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TreeBuild)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

template <int Mode>
void BM_Query(benchmark::State& state) {
  const Index& index = shared_index(static_cast<std::size_t>(state.range(0)));
  const auto queries = synthetic_signatures(64, 2);
  std::size_t i = 0, emds = 0;
  for (auto _ : state) {
    QueryResult r;
    if constexpr (Mode == 2) {
      r = index.linear_scan_signature(queries[i++ % queries.size()], 10);
    } else {
      const SearchOptions opt{Mode == 0 ? SearchMode::kSinglePath : SearchMode::kMultiPath,
                              false};
      r = index.query_signature(queries[i++ % queries.size()], 10, opt);
    }
    emds += r.emd_evaluations;
  }
  state.counters["emd_per_query"] =
      benchmark::Counter(static_cast<double>(emds) / static_cast<double>(state.iterations()));
}
BENCHMARK(BM_Query<0>)->Name("BM_QuerySinglePath")->Arg(1000)->Arg(10000);
BENCHMARK(BM_Query<1>)->Name("BM_QueryMultiPath")->Arg(1000)->Arg(10000);
BENCHMARK(BM_Query<2>)->Name("BM_LinearScan")->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
