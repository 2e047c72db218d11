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

#include "sigtree/cli.h"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "sigtree/bench.h"
#include "sigtree/emd.h"
#include "sigtree/engine.h"
#include "sigtree/error.h"
#include "sigtree/image.h"

namespace sigtree::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kSynopsis =
    "usage:\n"
    "  sigtree index --input DIR --out FILE [--bits-per-color 8] [--max-node 6]\n"
    "                [--min-node 2] [--dominant-threshold 0] [--palette CSV] [--seed 42]\n"
    "  sigtree query --index FILE --image PATH [--k 10] [--mode single|multi]\n"
    "                [--strict-coverage] [--json]\n"
    "  sigtree bench --sizes 100,1000,10000 [--queries 50] [--out report.csv] [--seed 42]\n"
    "                [--corpus DIR] [--bits-per-color 8] [--max-node 6] [--min-node 2]\n"
    "  sigtree validate --index FILE\n"
    "  sigtree emd --hist-a CSV --hist-b CSV [--palette CSV] [--flow]\n"
    "  sigtree palette --dump [--palette CSV]\n";

// Thrown for argument combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TreeFlags {
  std::size_t bits_per_color = 8;
  std::size_t max_node = 6;
  std::size_t min_node = 2;
};

void add_tree_flags(CLI::App* cmd, TreeFlags& f) {
  cmd->add_option("--bits-per-color", f.bits_per_color, "Bits per color block")
      ->check(CLI::Range(1, 65535));
  cmd->add_option("--max-node", f.max_node, "Maximum entries per node (M)")
      ->check(CLI::Range(2, 65535));
  cmd->add_option("--min-node", f.min_node, "Minimum entries per non-root node")
      ->check(CLI::Range(1, 65535));
}

Palette palette_from(const std::string& file) {
  return file.empty() ? default_palette() : Palette::load(file);
}

// Reads histogram values from a CSV file: either one row of values or one
// `name,value` row per color. Lines starting with '#' are skipped.
std::vector<double> read_hist_csv(const std::string& path, std::size_t expected) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      std::string f = fields[i];
      f.erase(0, f.find_first_not_of(" \t\r"));
      f.erase(f.find_last_not_of(" \t\r") + 1);
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || *end != '\0') {
        if (i == 0 && fields.size() > 1) continue;  // color label
        throw Error(ErrorCode::kDecodeError, fmt::format("{}: '{}' is not a number", path, f));
      }
      values.push_back(v);
    }
  }
  if (values.size() != expected) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("{}: {} values, palette has {}", path, values.size(), expected));
  }
  return values;
}

// Out-of-range parameter combinations are usage errors.
void check_config(const IndexConfig& cfg) {
  try {
    cfg.check();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

int cmd_index(const fs::path& input, const fs::path& out, const TreeFlags& tf,
              double threshold, const std::string& palette, std::uint64_t seed,
              std::ostream& os) {
  IndexConfig cfg{palette_from(palette)};
  cfg.bits_per_color = tf.bits_per_color;
  cfg.max_node = tf.max_node;
  cfg.min_node = tf.min_node;
  cfg.dominant_threshold = threshold;
  cfg.seed = seed;
  check_config(cfg);
  if (!fs::is_directory(input)) {
    throw Error(ErrorCode::kIoError, input.string() + " is not a directory");
  }
  const BuildResult r = build_index(list_images(input), cfg);
  save_index(r.index, out);
  os << fmt::format("indexed {} images, skipped {}, {} EMD comparisons, {:.1f} ms, height {}\n",
                    r.report.indexed, r.report.skipped, r.report.emd_comparisons,
                    r.report.build_ms, r.index.tree().height());
  return kExitOk;
}

int cmd_query(const fs::path& index_path, const fs::path& image, std::size_t k,
              const std::string& mode, bool strict, bool json, std::ostream& os) {
  const Index index = load_index(index_path);
  const SearchOptions opts{mode == "multi" ? SearchMode::kMultiPath : SearchMode::kSinglePath,
                           strict};
  const QueryResult r = index.query(decode_image(image), k, opts);
  spdlog::info("{} candidates, {} EMD evaluations, {} coverage tests, {:.3f} ms",
               r.candidate_count, r.emd_evaluations, r.coverage_tests, r.wall_ms);
  if (json) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < r.hits.size(); ++i) {
      rows.push_back({{"rank", i + 1},
                      {"oid", r.hits[i].oid},
                      {"path", r.hits[i].path},
                      {"distance", r.hits[i].distance}});
    }
    os << rows.dump(2) << "\n";
    return kExitOk;
  }
  os << fmt::format("{:>4}  {:>8}  {:>12}  {}\n", "rank", "oid", "distance", "path");
  for (std::size_t i = 0; i < r.hits.size(); ++i) {
    os << fmt::format("{:>4}  {:>8}  {:>12.6f}  {}\n", i + 1, r.hits[i].oid,
                      r.hits[i].distance, r.hits[i].path);
  }
  return kExitOk;
}

int cmd_validate(const fs::path& index_path, std::ostream& os) {
  const Index index = load_index(index_path);
  std::vector<std::string> issues = index.tree().validate();
  if (index.tree().size() != index.size()) {
    issues.push_back(fmt::format("count: tree holds {} signatures, path table {}",
                                 index.tree().size(), index.size()));
  }
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index.records()[i].oid != i) {
      issues.push_back(fmt::format("path table: record {} has oid {}", i,
                                   index.records()[i].oid));
    }
  }
  for (const auto& s : issues) os << s << "\n";
  if (issues.empty()) {
    os << "OK, 0 violations\n";
    return kExitOk;
  }
  os << fmt::format("FAIL, {} violations\n", issues.size());
  return kExitData;
}

int cmd_bench(const std::vector<std::size_t>& sizes, std::size_t queries,
              const std::string& out, std::uint64_t seed, const std::string& corpus,
              const TreeFlags& tf, std::ostream& os) {
  if (!std::is_sorted(sizes.begin(), sizes.end()) ||
      std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end()) {
    throw UsageError("--sizes must be strictly ascending");
  }
  BenchOptions opt;
  opt.sizes = sizes;
  opt.queries = queries;
  opt.seed = seed;
  opt.config.bits_per_color = tf.bits_per_color;
  opt.config.max_node = tf.max_node;
  opt.config.min_node = tf.min_node;
  opt.config.seed = seed;
  check_config(opt.config);
  if (!corpus.empty()) opt.corpus_dir = corpus;
  const auto rows = run_bench(opt);
  if (out.empty() || out == "-") {
    write_bench_csv(os, rows);
    return kExitOk;
  }
  std::ofstream file(out);
  if (!file) throw Error(ErrorCode::kIoError, "cannot write " + out);
  write_bench_csv(file, rows);
  if (!file.flush()) throw Error(ErrorCode::kIoError, "cannot write " + out);
  return kExitOk;
}

int cmd_emd(const std::string& a_path, const std::string& b_path, const std::string& palette,
            bool flow, std::ostream& os) {
  const Palette p = palette_from(palette);
  const CostMatrix cost = cost_matrix(p);
  const auto a = read_hist_csv(a_path, p.size());
  const auto b = read_hist_csv(b_path, p.size());
  os << fmt::format("{:.6f}\n", emd(a, b, cost));
  if (flow) {
    const FlowPlan plan = solve_transport(a, b, cost);
    for (std::size_t i = 0; i < plan.rows; ++i) {
      for (std::size_t j = 0; j < plan.cols; ++j) {
        if (plan.flow(i, j) > 0) {
          os << fmt::format("{:<12} -> {:<12} {:>12.6f}\n", p[i].name, p[j].name,
                            plan.flow(i, j));
        }
      }
    }
    os << fmt::format("total cost {:.6f}, total flow {:.6f}\n", plan.total_cost,
                      plan.total_flow);
  }
  return kExitOk;
}

}  // namespace

void configure_logging() {
  if (!spdlog::get("sigtree")) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("sigtree"));
  }
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("SIGTREE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept a real level name.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Color-signature image index", "sigtree"};
  app.require_subcommand(1, 1);

  TreeFlags tf;
  std::string input, index_out, palette, index_file, image, mode = "single", bench_out, corpus;
  std::string hist_a, hist_b;
  double threshold = 0.0;
  std::uint64_t seed = 42;
  std::size_t k = 10, queries = 50;
  std::vector<std::size_t> sizes;
  bool json = false, strict = false, dump = false, flow = false;

  auto* index = app.add_subcommand("index", "Build an index from a directory of images");
  index->add_option("--input", input, "Directory of images")->required();
  index->add_option("--out", index_out, "Index file to write")->required();
  add_tree_flags(index, tf);
  index->add_option("--dominant-threshold", threshold, "Drop colors below this fraction")
      ->check(CLI::Range(0.0, 1.0));
  index->add_option("--palette", palette, "Palette CSV (name,R,G,B per line)");
  index->add_option("--seed", seed, "Seed recorded in the index");

  auto* query = app.add_subcommand("query", "Query an index with an image");
  query->add_option("--index", index_file, "Index file")->required();
  query->add_option("--image", image, "Query image")->required();
  query->add_option("--k", k, "Number of results")->check(CLI::PositiveNumber);
  query->add_option("--mode", mode, "Tree search mode")
      ->check(CLI::IsMember({"single", "multi"}));
  query->add_flag("--strict-coverage", strict, "Return nothing when no entry covers the query");
  query->add_flag("--json", json, "JSON output");

  auto* bench = app.add_subcommand("bench", "Tree versus linear scan benchmark");
  bench->add_option("--sizes", sizes, "Comma-separated corpus sizes")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  bench->add_option("--queries", queries, "Queries per size")->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "CSV report (default stdout)");
  bench->add_option("--seed", seed, "Corpus and query seed");
  bench->add_option("--corpus", corpus, "Image directory to sample instead of synthetic images");
  add_tree_flags(bench, tf);

  auto* validate = app.add_subcommand("validate", "Check an index's tree invariants");
  validate->add_option("--index", index_file, "Index file")->required();

  auto* emd_cmd = app.add_subcommand("emd", "EMD between two histogram CSV files");
  emd_cmd->add_option("--hist-a", hist_a, "First histogram")->required();
  emd_cmd->add_option("--hist-b", hist_b, "Second histogram")->required();
  emd_cmd->add_option("--palette", palette, "Palette CSV");
  emd_cmd->add_flag("--flow", flow, "Print the optimal flow");

  auto* pal = app.add_subcommand("palette", "Print the palette");
  pal->add_flag("--dump", dump, "Write the palette as CSV")->required();
  pal->add_option("--palette", palette, "Palette CSV to load instead of the default");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "sigtree: " << e.what() << "\n" << kSynopsis;
    return kExitUsage;
  }

  try {
    if (index->parsed()) return cmd_index(input, index_out, tf, threshold, palette, seed, out);
    if (query->parsed()) return cmd_query(index_file, image, k, mode, strict, json, out);
    if (bench->parsed()) return cmd_bench(sizes, queries, bench_out, seed, corpus, tf, out);
    if (validate->parsed()) return cmd_validate(index_file, out);
    if (emd_cmd->parsed()) return cmd_emd(hist_a, hist_b, palette, flow, out);
    palette_from(palette).write(out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "sigtree: " << e.what() << "\n" << kSynopsis;
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "sigtree: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace sigtree::cli
