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

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "sigtree/binary_io.h"
#include "sigtree/emd.h"
#include "sigtree/signature.h"

namespace sigtree {

using Oid = std::uint64_t;

struct STreeParams {
  std::size_t bins = 16;
  std::size_t bits_per_block = 8;
  std::size_t max_entries = 6;  // M
  std::size_t min_entries = 2;  // m, 1 <= m <= M / 2
};

enum class SearchMode { kSinglePath, kMultiPath };

struct SearchOptions {
  SearchMode mode = SearchMode::kSinglePath;
  // Drop the minimal-EMD fallback taken when no entry of an internal node
  // covers the query; such queries then return nothing.
  bool strict_coverage = false;
};

struct SearchStats {
  std::uint64_t emd_evaluations = 0;
  std::uint64_t coverage_tests = 0;
  std::uint64_t nodes_visited = 0;
  std::uint64_t fallbacks = 0;
};

struct LeafHit {
  Signature sig;
  Oid oid = 0;
};

struct SearchResult {
  std::vector<LeafHit> hits;
  SearchStats stats;
};

// Balanced signature tree. Leaves hold (signature, oid); internal entries
// hold the union of the child's signatures and a link to the child. Descent
// during insert and search follows the entry with minimal EMD to the
// signature, with unions weighted by BlockRule::kSummed.
//
// Inserts are single-writer. A built tree is safe to search concurrently:
// per-search counters are returned with the result and the tree-wide totals
// are atomics.
class STree {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kNoNode = 0xffffffffu;

  struct Entry {
    Signature sig;
    std::uint64_t target = 0;  // child NodeId for internal nodes, Oid for leaves
  };

  struct Node {
    bool leaf = true;
    NodeId parent = kNoNode;
    std::vector<Entry> entries;
  };

  STree(STreeParams params, CostMatrix cost);
  STree(const STree& other);
  STree& operator=(const STree& other);
  STree(STree&&) noexcept;
  STree& operator=(STree&&) noexcept;
  ~STree();

  // Throws kDimensionMismatch or kDuplicateOid.
  void insert(const Signature& sig, Oid oid);

  SearchResult search(const Signature& query, SearchOptions options = {}) const;

  // Empty list means healthy. Each message starts with the violation kind:
  // "occupancy", "leaf depth", "union mismatch", "parent link",
  // "malformed leaf", "shape", "duplicate oid", "count", "unreachable".
  std::vector<std::string> validate() const;

  // Recomputes the entry pointing at `id` in its parent as the union of the
  // node's signatures, then repeats for each ancestor.
  void union_signature_up(NodeId id);

  // Splits a node holding M + 1 entries around the pair of entries with the
  // largest EMD between them. Throws kNotOverfull otherwise.
  void split_node(NodeId id);

  const STreeParams& params() const noexcept { return params_; }
  const CostMatrix& cost() const noexcept { return cost_; }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  // Edges from root to a leaf; a lone leaf root has height 0.
  std::size_t height() const;
  NodeId root() const noexcept { return root_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  // EMD evaluations spent by insert, including splits.
  std::uint64_t build_emd_evaluations() const noexcept { return build_emd_; }
  std::uint64_t split_count() const noexcept { return splits_; }
  std::uint64_t total_search_emd_evaluations() const noexcept { return search_emd_.load(); }
  std::uint64_t total_search_coverage_tests() const noexcept { return search_cov_.load(); }

  // All leaf entries in pre-order.
  std::vector<LeafHit> leaf_entries() const;

  // Pre-order: kind byte (0 leaf, 1 internal), u16 entry count, entries.
  // Leaf entry = signature + u64 oid; internal entry = signature + u64 byte
  // offset of the child relative to the start of this section.
  void serialize(ByteWriter& out) const;
  // Throws kCorruptIndex on malformed input or a tree that fails validate().
  static STree deserialize(std::span<const std::uint8_t> section, STreeParams params,
                           CostMatrix cost);

  // Test hook for fault injection.
  Node& mutable_node(NodeId id) { return nodes_.at(id); }

 private:
  double distance(const Signature& a, const Signature& b) const;
  void check_shape(const Signature& sig) const;
  std::size_t entry_index_in_parent(NodeId id) const;
  Signature node_union(NodeId id) const;
  NodeId new_node(bool leaf, NodeId parent);

  STreeParams params_;
  CostMatrix cost_;
  std::vector<Node> nodes_;
  NodeId root_ = kNoNode;
  std::size_t count_ = 0;
  std::unordered_set<Oid> oids_;

  std::uint64_t build_emd_ = 0;
  std::uint64_t splits_ = 0;
  mutable std::atomic<std::uint64_t> search_emd_{0};
  mutable std::atomic<std::uint64_t> search_cov_{0};
};

}  // namespace sigtree
