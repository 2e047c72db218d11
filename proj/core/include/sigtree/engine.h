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
#include <span>
#include <string>
#include <vector>

#include "sigtree/emd.h"
#include "sigtree/image.h"
#include "sigtree/palette.h"
#include "sigtree/signature.h"
#include "sigtree/stree.h"

namespace sigtree {

struct IndexConfig {
  Palette palette = default_palette();
  std::size_t bits_per_color = 8;
  std::size_t max_node = 6;
  std::size_t min_node = 2;
  double dominant_threshold = 0.0;
  SearchMode mode = SearchMode::kSinglePath;
  bool strict_coverage = false;
  std::uint64_t seed = 42;

  // Throws kInvalidArgument on out-of-range parameters.
  void check() const;
  STreeParams tree_params() const;

  friend bool operator==(const IndexConfig&, const IndexConfig&) = default;
};

struct CorpusRecord {
  Oid oid = 0;
  std::string path;
  Histogram histogram;
  Signature signature;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

struct RankedHit {
  Oid oid = 0;
  double distance = 0.0;
  std::string path;

  friend bool operator==(const RankedHit&, const RankedHit&) = default;
};

struct QueryResult {
  // Ascending distance, ties by ascending oid.
  std::vector<RankedHit> hits;
  std::size_t candidate_count = 0;
  // Includes the re-ranking EMDs, not only the tree descent.
  std::uint64_t emd_evaluations = 0;
  std::uint64_t coverage_tests = 0;
  double wall_ms = 0.0;
};

struct BuildReport {
  std::size_t indexed = 0;
  std::size_t skipped = 0;
  std::uint64_t emd_comparisons = 0;
  double build_ms = 0.0;
};

// An image to index together with the path recorded for it.
struct NamedImage {
  std::string path;
  RawImage image;
};

class Index {
 public:
  explicit Index(IndexConfig config);

  // Histogram, then signature, then tree insert. Oids are handed out in call
  // order starting at 0.
  Oid add(std::string path, const RawImage& image);

  Signature encode_image(const RawImage& image) const;

  QueryResult query(const RawImage& image, std::size_t k) const;
  QueryResult query(const RawImage& image, std::size_t k, SearchOptions options) const;
  QueryResult query_signature(const Signature& sig, std::size_t k,
                              SearchOptions options) const;

  // Exact EMD against every stored signature.
  QueryResult linear_scan(const RawImage& image, std::size_t k) const;
  QueryResult linear_scan_signature(const Signature& sig, std::size_t k) const;

  const IndexConfig& config() const noexcept { return config_; }
  const CostMatrix& cost() const noexcept { return cost_; }
  const STree& tree() const noexcept { return tree_; }
  const std::vector<CorpusRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  // Index file layout, all integers little-endian:
  //   "STR1", u32 version, config block, palette block, path table,
  //   u64 tree byte length, tree, u32 CRC-32 of everything before it.
  std::vector<std::uint8_t> serialize() const;
  static Index deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const Index& a, const Index& b);

 private:
  IndexConfig config_;
  CostMatrix cost_;
  STree tree_;
  std::vector<CorpusRecord> records_;
};

inline constexpr std::uint32_t kIndexFormatVersion = 1;

void save_index(const Index& index, const std::filesystem::path& path);
// Throws kIndexNotFound, kIoError, kCorruptIndex or kVersionMismatch.
Index load_index(const std::filesystem::path& path);

struct BuildResult {
  Index index;
  BuildReport report;
};

// Sorts paths, decodes each file and indexes the ones that decode. Failures
// are logged and skipped; kNoValidImages if nothing survives.
BuildResult build_index(std::vector<std::filesystem::path> paths, const IndexConfig& config);
// Indexes already-decoded images in the given order.
BuildResult build_index(std::span<const NamedImage> images, const IndexConfig& config);

// Image files directly inside `dir`, sorted.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace sigtree
