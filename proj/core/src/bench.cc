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

#include "sigtree/bench.h"

#include <algorithm>
#include <chrono>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sigtree/error.h"
#include "sigtree/synthetic.h"

namespace sigtree {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

double recall_at_k(const QueryResult& candidate, const QueryResult& truth, std::size_t k) {
  const std::size_t want = std::min(k, truth.hits.size());
  if (want == 0) return 1.0;
  const double cutoff = truth.hits[want - 1].distance;
  std::size_t good = 0;
  for (std::size_t i = 0; i < std::min(k, candidate.hits.size()); ++i) {
    if (candidate.hits[i].distance <= cutoff + 1e-12) ++good;
  }
  return static_cast<double>(std::min(good, want)) / static_cast<double>(want);
}

std::vector<BenchRow> run_bench(const BenchOptions& options) {
  if (options.sizes.empty()) throw Error(ErrorCode::kInvalidArgument, "no corpus sizes given");
  for (std::size_t i = 0; i < options.sizes.size(); ++i) {
    if (options.sizes[i] == 0 || (i > 0 && options.sizes[i] <= options.sizes[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "corpus sizes must be positive and ascending");
    }
  }
  if (options.queries == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one query");
  options.config.check();

  // Supplied corpora are decoded once and shared by every row.
  std::vector<NamedImage> supplied;
  if (options.corpus_dir) {
    for (const auto& p : list_images(*options.corpus_dir)) {
      try {
        supplied.push_back(NamedImage{p.string(), decode_image(p)});
      } catch (const Error& e) {
        spdlog::warn("skipping {}: {}", p.string(), e.what());
      }
      if (supplied.size() == options.sizes.back()) break;
    }
    if (supplied.empty()) throw Error(ErrorCode::kNoValidImages, "corpus directory is empty");
  }

  std::vector<BenchRow> rows;
  for (std::size_t size : options.sizes) {
    std::vector<NamedImage> corpus;
    std::vector<RawImage> queries;
    if (options.corpus_dir) {
      if (size > supplied.size()) {
        spdlog::warn("corpus has only {} images; skipping size {}", supplied.size(), size);
        continue;
      }
      corpus.assign(supplied.begin(), supplied.begin() + static_cast<std::ptrdiff_t>(size));
      std::mt19937_64 rng(options.seed ^ size);
      for (std::size_t q = 0; q < options.queries; ++q) {
        queries.push_back(corpus[rng() % corpus.size()].image);
      }
    } else {
      corpus = synthetic_corpus(size, options.seed, options.config.palette);
      // Queries come from an independent stream so they are not corpus members.
      std::mt19937_64 rng(options.seed * 0x9e3779b97f4a7c15ULL + 1);
      for (std::size_t q = 0; q < options.queries; ++q) {
        queries.push_back(synthetic_image(rng, options.config.palette));
      }
    }

    BenchRow row;
    row.size = size;
    row.max_node = options.config.max_node;
    const auto build_start = Clock::now();
    BuildResult built = build_index(std::span<const NamedImage>(corpus), options.config);
    row.build_ms = elapsed_ms(build_start);
    row.build_emd_comparisons = built.report.emd_comparisons;
    row.height = built.index.tree().height();
    const Index& index = built.index;

    row.min_query_emd_linear = std::numeric_limits<std::uint64_t>::max();
    double single_ms = 0.0;
    double linear_ms = 0.0;
    for (const RawImage& img : queries) {
      const Signature sig = index.encode_image(img);
      QueryResult truth = index.linear_scan_signature(sig, options.k);
      linear_ms += truth.wall_ms;

      const QueryResult single = index.query_signature(
          sig, options.k, SearchOptions{SearchMode::kSinglePath, options.config.strict_coverage});
      single_ms += single.wall_ms;
      const QueryResult multi = index.query_signature(
          sig, options.k, SearchOptions{SearchMode::kMultiPath, options.config.strict_coverage});

      row.query_emd_single += static_cast<double>(single.emd_evaluations);
      row.query_emd_multi += static_cast<double>(multi.emd_evaluations);
      row.query_emd_linear += static_cast<double>(truth.emd_evaluations);
      row.max_query_emd_single = std::max(row.max_query_emd_single, single.emd_evaluations);
      row.max_query_emd_linear = std::max(row.max_query_emd_linear, truth.emd_evaluations);
      row.min_query_emd_linear = std::min(row.min_query_emd_linear, truth.emd_evaluations);
      row.recall_single += recall_at_k(single, truth, options.k);
      row.recall_multi += recall_at_k(multi, truth, options.k);
    }
    const double nq = static_cast<double>(queries.size());
    row.query_emd_single /= nq;
    row.query_emd_multi /= nq;
    row.query_emd_linear /= nq;
    row.recall_single /= nq;
    row.recall_multi /= nq;
    row.query_ms_each = single_ms / nq;
    row.linear_ms_each = linear_ms / nq;
    spdlog::info(
        "size {}: height {}, build {:.1f} ms, single {:.1f} / multi {:.1f} / linear {:.0f} EMDs, "
        "recall@{} single {:.3f} multi {:.3f}",
        size, row.height, row.build_ms, row.query_emd_single, row.query_emd_multi,
        row.query_emd_linear, options.k, row.recall_single, row.recall_multi);
    rows.push_back(row);
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << kBenchCsvHeader << '\n';
  for (const BenchRow& r : rows) {
    out << fmt::format("{},{},{:.3f},{:.3f},{:.3f},{:.3f},{:.4f},{:.4f}\n", r.size,
                       r.build_emd_comparisons, r.build_ms, r.query_emd_single, r.query_emd_multi,
                       r.query_emd_linear, r.query_ms_each, r.recall_single);
  }
}

}  // namespace sigtree
