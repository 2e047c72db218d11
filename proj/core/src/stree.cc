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

#include "sigtree/stree.h"

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>

#include "sigtree/error.h"

namespace sigtree {

STree::STree(STreeParams params, CostMatrix cost) : params_(params), cost_(std::move(cost)) {
  if (params_.max_entries < 2) {
    throw Error(ErrorCode::kInvalidArgument, "max node size M must be at least 2");
  }
  if (params_.max_entries > 0xffff) {
    throw Error(ErrorCode::kInvalidArgument, "max node size M must fit in 16 bits");
  }
  if (params_.min_entries < 1 || 2 * params_.min_entries > params_.max_entries) {
    throw Error(ErrorCode::kInvalidArgument, "min node size m must satisfy 1 <= m <= M/2");
  }
  if (cost_.rows() != params_.bins || cost_.cols() != params_.bins) {
    throw Error(ErrorCode::kDimensionMismatch, "cost matrix does not match bin count");
  }
  // Validates bins and bits per block.
  Signature probe(params_.bins, params_.bits_per_block);
  root_ = new_node(true, kNoNode);
}

STree::STree(const STree& other)
    : params_(other.params_),
      cost_(other.cost_),
      nodes_(other.nodes_),
      root_(other.root_),
      count_(other.count_),
      oids_(other.oids_),
      build_emd_(other.build_emd_),
      splits_(other.splits_),
      search_emd_(other.search_emd_.load()),
      search_cov_(other.search_cov_.load()) {}

STree& STree::operator=(const STree& other) {
  if (this != &other) {
    STree copy(other);
    *this = std::move(copy);
  }
  return *this;
}

STree::STree(STree&& other) noexcept
    : params_(other.params_),
      cost_(std::move(other.cost_)),
      nodes_(std::move(other.nodes_)),
      root_(other.root_),
      count_(other.count_),
      oids_(std::move(other.oids_)),
      build_emd_(other.build_emd_),
      splits_(other.splits_),
      search_emd_(other.search_emd_.load()),
      search_cov_(other.search_cov_.load()) {}

STree& STree::operator=(STree&& other) noexcept {
  params_ = other.params_;
  cost_ = std::move(other.cost_);
  nodes_ = std::move(other.nodes_);
  root_ = other.root_;
  count_ = other.count_;
  oids_ = std::move(other.oids_);
  build_emd_ = other.build_emd_;
  splits_ = other.splits_;
  search_emd_.store(other.search_emd_.load());
  search_cov_.store(other.search_cov_.load());
  return *this;
}

STree::~STree() = default;

STree::NodeId STree::new_node(bool leaf, NodeId parent) {
  if (nodes_.size() >= kNoNode) throw Error(ErrorCode::kInvalidArgument, "too many nodes");
  nodes_.push_back(Node{leaf, parent, {}});
  return static_cast<NodeId>(nodes_.size() - 1);
}

void STree::check_shape(const Signature& sig) const {
  if (sig.bins() != params_.bins || sig.bits_per_block() != params_.bits_per_block) {
    throw Error(ErrorCode::kDimensionMismatch, "signature shape does not match the tree");
  }
}

double STree::distance(const Signature& a, const Signature& b) const {
  // Two empty signatures carry no color at all; treat them as identical.
  if (a.is_zero() && b.is_zero()) return 0.0;
  return emd_signatures(a, b, cost_, BlockRule::kSummed);
}

std::size_t STree::entry_index_in_parent(NodeId id) const {
  const NodeId p = nodes_[id].parent;
  const auto& entries = nodes_[p].entries;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].target == id) return i;
  }
  throw std::logic_error("node missing from its parent");
}

Signature STree::node_union(NodeId id) const {
  Signature s(params_.bins, params_.bits_per_block);
  for (const Entry& e : nodes_[id].entries) s |= e.sig;
  return s;
}

void STree::insert(const Signature& sig, Oid oid) {
  check_shape(sig);
  position_weights(sig, BlockRule::kOneHot);  // rejects multi-bit blocks
  if (oids_.contains(oid)) {
    throw Error(ErrorCode::kDuplicateOid, "oid " + std::to_string(oid) + " already indexed");
  }

  NodeId v = root_;
  while (!nodes_[v].leaf) {
    const auto& entries = nodes_[v].entries;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const double d = distance(entries[i].sig, sig);
      ++build_emd_;
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    v = static_cast<NodeId>(entries[best].target);
  }

  nodes_[v].entries.push_back(Entry{sig, oid});
  oids_.insert(oid);
  ++count_;
  union_signature_up(v);
  if (nodes_[v].entries.size() > params_.max_entries) split_node(v);
}

void STree::union_signature_up(NodeId id) {
  while (nodes_.at(id).parent != kNoNode) {
    const NodeId p = nodes_[id].parent;
    nodes_[p].entries[entry_index_in_parent(id)].sig = node_union(id);
    id = p;
  }
}

void STree::split_node(NodeId id) {
  if (nodes_.at(id).entries.size() <= params_.max_entries) {
    throw Error(ErrorCode::kNotOverfull, "node " + std::to_string(id) + " holds " +
                                             std::to_string(nodes_[id].entries.size()) +
                                             " entries, M = " +
                                             std::to_string(params_.max_entries));
  }
  std::vector<Entry> entries = std::move(nodes_[id].entries);
  nodes_[id].entries.clear();
  const std::size_t n = entries.size();

  // Seeds: the most distant pair, first pair in lexicographic order on ties.
  std::size_t alpha = 0;
  std::size_t beta = 1;
  double widest = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(entries[i].sig, entries[j].sig);
      ++build_emd_;
      if (d > widest) {
        widest = d;
        alpha = i;
        beta = j;
      }
    }
  }

  std::vector<Entry> group_a{entries[alpha]};
  std::vector<Entry> group_b{entries[beta]};
  std::size_t unassigned = n - 2;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == alpha || i == beta) continue;
    // A group that needs every remaining entry to reach m gets them.
    if (group_a.size() + unassigned <= params_.min_entries) {
      group_a.push_back(std::move(entries[i]));
    } else if (group_b.size() + unassigned <= params_.min_entries) {
      group_b.push_back(std::move(entries[i]));
    } else {
      const double da = distance(entries[i].sig, group_a.front().sig);
      const double db = distance(entries[i].sig, group_b.front().sig);
      build_emd_ += 2;
      if (da < db) {
        group_a.push_back(std::move(entries[i]));
      } else {
        group_b.push_back(std::move(entries[i]));
      }
    }
    --unassigned;
  }

  const bool leaf = nodes_[id].leaf;
  const NodeId parent = nodes_[id].parent;
  const NodeId sibling = new_node(leaf, parent);
  nodes_[id].entries = std::move(group_a);
  nodes_[sibling].entries = std::move(group_b);
  if (!leaf) {
    for (const Entry& e : nodes_[sibling].entries) {
      nodes_[static_cast<NodeId>(e.target)].parent = sibling;
    }
  }
  ++splits_;

  Signature s_a = node_union(id);
  Signature s_b = node_union(sibling);
  if (parent == kNoNode) {
    const NodeId r = new_node(false, kNoNode);
    nodes_[r].entries.push_back(Entry{std::move(s_a), id});
    nodes_[r].entries.push_back(Entry{std::move(s_b), sibling});
    nodes_[id].parent = r;
    nodes_[sibling].parent = r;
    root_ = r;
    return;
  }

  const std::size_t at = entry_index_in_parent(id);
  auto& parent_entries = nodes_[parent].entries;
  parent_entries[at].sig = std::move(s_a);
  parent_entries.insert(parent_entries.begin() + static_cast<std::ptrdiff_t>(at) + 1,
                        Entry{std::move(s_b), sibling});
  union_signature_up(parent);
  if (nodes_[parent].entries.size() > params_.max_entries) split_node(parent);
}

SearchResult STree::search(const Signature& query, SearchOptions options) const {
  SearchResult result;
  check_shape(query);
  if (count_ == 0) return result;
  SearchStats& st = result.stats;

  auto nearest = [&](const std::vector<Entry>& entries,
                     const std::vector<std::size_t>& candidates) {
    if (candidates.size() == 1) return candidates.front();
    std::size_t best = candidates.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i : candidates) {
      const double d = distance(entries[i].sig, query);
      ++st.emd_evaluations;
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };

  std::vector<NodeId> stack{root_};
  std::vector<std::size_t> passing;
  std::vector<std::size_t> all;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    ++st.nodes_visited;
    const Node& node = nodes_[v];
    if (node.leaf) {
      for (const Entry& e : node.entries) result.hits.push_back(LeafHit{e.sig, e.target});
      continue;
    }

    passing.clear();
    for (std::size_t i = 0; i < node.entries.size(); ++i) {
      ++st.coverage_tests;
      if (covers(node.entries[i].sig, query)) passing.push_back(i);
    }
    if (passing.empty()) {
      if (options.strict_coverage) continue;
      ++st.fallbacks;
      all.resize(node.entries.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      stack.push_back(static_cast<NodeId>(node.entries[nearest(node.entries, all)].target));
    } else if (options.mode == SearchMode::kSinglePath) {
      stack.push_back(static_cast<NodeId>(node.entries[nearest(node.entries, passing)].target));
    } else {
      // Reverse so children are visited in entry order.
      for (auto it = passing.rbegin(); it != passing.rend(); ++it) {
        stack.push_back(static_cast<NodeId>(node.entries[*it].target));
      }
    }
  }

  search_emd_.fetch_add(st.emd_evaluations, std::memory_order_relaxed);
  search_cov_.fetch_add(st.coverage_tests, std::memory_order_relaxed);
  return result;
}

std::size_t STree::height() const {
  std::size_t h = 0;
  NodeId v = root_;
  while (!nodes_[v].leaf && !nodes_[v].entries.empty()) {
    v = static_cast<NodeId>(nodes_[v].entries.front().target);
    ++h;
  }
  return h;
}

std::vector<LeafHit> STree::leaf_entries() const {
  std::vector<LeafHit> out;
  std::vector<NodeId> stack{root_};
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    const Node& node = nodes_[v];
    if (node.leaf) {
      for (const Entry& e : node.entries) out.push_back(LeafHit{e.sig, e.target});
    } else {
      for (auto it = node.entries.rbegin(); it != node.entries.rend(); ++it) {
        stack.push_back(static_cast<NodeId>(it->target));
      }
    }
  }
  return out;
}

std::vector<std::string> STree::validate() const {
  std::vector<std::string> issues;
  if (root_ >= nodes_.size()) {
    issues.push_back("unreachable: root link is dangling");
    return issues;
  }
  if (nodes_[root_].parent != kNoNode) issues.push_back("parent link: root has a parent");

  const std::size_t M = params_.max_entries;
  const std::size_t m = params_.min_entries;
  std::optional<std::size_t> leaf_depth;
  std::size_t leaf_entries = 0;
  std::unordered_set<Oid> seen_oids;
  std::vector<char> reached(nodes_.size(), 0);

  struct Frame {
    NodeId id;
    std::size_t depth;
  };
  std::vector<Frame> stack{{root_, 0}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (reached[f.id]) {
      issues.push_back("parent link: node " + std::to_string(f.id) + " reached twice");
      continue;
    }
    reached[f.id] = 1;
    const Node& node = nodes_[f.id];
    const std::string where = "node " + std::to_string(f.id);
    const std::size_t count = node.entries.size();

    if (f.id == root_) {
      if (node.leaf ? count > M : (count < 2 || count > M)) {
        issues.push_back("occupancy: root " + where + " holds " + std::to_string(count));
      }
    } else if (count < m || count > M) {
      issues.push_back("occupancy: " + where + " holds " + std::to_string(count) +
                       ", expected " + std::to_string(m) + ".." + std::to_string(M));
    }

    for (std::size_t i = 0; i < count; ++i) {
      const Entry& e = node.entries[i];
      const std::string at = where + " entry " + std::to_string(i);
      if (e.sig.bins() != params_.bins || e.sig.bits_per_block() != params_.bits_per_block) {
        issues.push_back("shape: " + at);
        continue;
      }
      if (node.leaf) {
        ++leaf_entries;
        for (std::size_t j = 0; j < e.sig.bins(); ++j) {
          if (e.sig.block_popcount(j) > 1) {
            issues.push_back("malformed leaf: " + at + " block " + std::to_string(j));
            break;
          }
        }
        if (!seen_oids.insert(e.target).second) {
          issues.push_back("duplicate oid: " + std::to_string(e.target));
        }
        continue;
      }
      if (e.target >= nodes_.size()) {
        issues.push_back("parent link: " + at + " points outside the tree");
        continue;
      }
      const auto child = static_cast<NodeId>(e.target);
      if (nodes_[child].parent != f.id) {
        issues.push_back("parent link: " + at + " child does not point back");
      }
      if (!(node_union(child) == e.sig)) {
        issues.push_back("union mismatch: " + at);
      }
      stack.push_back({child, f.depth + 1});
    }

    if (node.leaf) {
      if (!leaf_depth) {
        leaf_depth = f.depth;
      } else if (*leaf_depth != f.depth) {
        issues.push_back("leaf depth: " + where + " at depth " + std::to_string(f.depth) +
                         ", expected " + std::to_string(*leaf_depth));
      }
    }
  }

  if (leaf_entries != count_) {
    issues.push_back("count: tree holds " + std::to_string(leaf_entries) + " leaf entries, " +
                     std::to_string(count_) + " recorded");
  }
  for (std::size_t i = 0; i < reached.size(); ++i) {
    if (!reached[i]) issues.push_back("unreachable: node " + std::to_string(i));
  }
  return issues;
}

void STree::serialize(ByteWriter& out) const {
  // Pre-order with offsets computed up front, since children follow parents.
  std::vector<NodeId> order;
  std::vector<NodeId> stack{root_};
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    order.push_back(v);
    if (!nodes_[v].leaf) {
      const auto& entries = nodes_[v].entries;
      for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
        stack.push_back(static_cast<NodeId>(it->target));
      }
    }
  }
  const std::size_t sig_bytes = 4 + Signature(params_.bins, params_.bits_per_block).byte_size();
  std::vector<std::uint64_t> offset(nodes_.size(), 0);
  std::uint64_t pos = 0;
  for (NodeId v : order) {
    offset[v] = pos;
    pos += 3 + nodes_[v].entries.size() * (sig_bytes + 8);
  }
  for (NodeId v : order) {
    const Node& node = nodes_[v];
    out.u8(node.leaf ? 0 : 1);
    out.u16(static_cast<std::uint16_t>(node.entries.size()));
    for (const Entry& e : node.entries) {
      e.sig.serialize(out);
      out.u64(node.leaf ? e.target : offset[e.target]);
    }
  }
}

STree STree::deserialize(std::span<const std::uint8_t> section, STreeParams params,
                         CostMatrix cost) {
  STree tree(params, std::move(cost));
  tree.nodes_.clear();
  ByteReader in(section);

  // Offsets must strictly increase from parent to child, which rules out
  // cycles and bounds the recursion by the section size.
  std::function<NodeId(std::uint64_t, NodeId)> read_node = [&](std::uint64_t off,
                                                                NodeId parent) -> NodeId {
    in.seek(static_cast<std::size_t>(off));
    const std::uint8_t kind = in.u8();
    if (kind > 1) throw Error(ErrorCode::kCorruptIndex, "bad node kind");
    const std::size_t count = in.u16();
    if (count > params.max_entries) {
      throw Error(ErrorCode::kCorruptIndex, "node exceeds max entries");
    }
    const NodeId id = tree.new_node(kind == 0, parent);
    std::vector<std::pair<Signature, std::uint64_t>> raw;
    raw.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      Signature sig = Signature::deserialize(in);
      if (sig.bins() != params.bins || sig.bits_per_block() != params.bits_per_block) {
        throw Error(ErrorCode::kCorruptIndex, "signature shape does not match the index");
      }
      raw.emplace_back(std::move(sig), in.u64());
    }
    const std::size_t end = in.position();
    for (auto& [sig, target] : raw) {
      if (kind == 0) {
        tree.nodes_[id].entries.push_back(Entry{std::move(sig), target});
        continue;
      }
      if (target <= off || target >= section.size()) {
        throw Error(ErrorCode::kCorruptIndex, "child offset out of order");
      }
      const NodeId child = read_node(target, id);
      tree.nodes_[id].entries.push_back(Entry{std::move(sig), child});
    }
    in.seek(std::max(end, in.position()));
    return id;
  };

  tree.root_ = read_node(0, kNoNode);
  if (in.position() != section.size()) {
    throw Error(ErrorCode::kCorruptIndex, "trailing bytes after tree");
  }
  for (const Node& node : tree.nodes_) {
    if (!node.leaf) continue;
    for (const Entry& e : node.entries) {
      tree.oids_.insert(e.target);
      ++tree.count_;
    }
  }
  auto issues = tree.validate();
  if (!issues.empty()) throw Error(ErrorCode::kCorruptIndex, "tree invalid: " + issues.front());
  return tree;
}

}  // namespace sigtree
