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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sigtree/engine.h"

namespace sigtree {

struct BenchOptions {
  std::vector<std::size_t> sizes;
  std::size_t queries = 50;
  IndexConfig config;
  std::uint64_t seed = 42;
  std::size_t k = 10;
  // Use images from this directory instead of a synthetic corpus. Queries are
  // then sampled from the corpus itself.
  std::optional<std::filesystem::path> corpus_dir;
};

// One row per corpus size. Query columns are per-query means.
struct BenchRow {
  std::size_t size = 0;
  std::uint64_t build_emd_comparisons = 0;
  double build_ms = 0.0;
  double query_emd_single = 0.0;
  double query_emd_multi = 0.0;
  double query_emd_linear = 0.0;
  double query_ms_each = 0.0;  // single-path
  double recall_single = 0.0;
  double recall_multi = 0.0;
  // Not in the CSV; kept for checking the cost bound per query.
  std::uint64_t max_query_emd_single = 0;
  std::uint64_t max_query_emd_linear = 0;
  std::uint64_t min_query_emd_linear = 0;
  std::size_t height = 0;
  std::size_t max_node = 0;
  double linear_ms_each = 0.0;
};

inline constexpr const char* kBenchCsvHeader =
    "size,build_emd_comparisons,build_ms,query_emd_comparisons_single,"
    "query_emd_comparisons_multi,query_emd_comparisons_linear,query_ms_each,"
    "recall_at_10_vs_linear";

// Sizes must be strictly ascending.
std::vector<BenchRow> run_bench(const BenchOptions& options);
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

// Fraction of `truth`'s top-k distances matched by `candidate`: a candidate
// hit counts if its distance does not exceed the k-th ground-truth distance.
// Ties at the cut-off make any tied oid an equally correct answer.
double recall_at_k(const QueryResult& candidate, const QueryResult& truth, std::size_t k);

}  // namespace sigtree
