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

#include "sigtree/emd.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "sigtree/error.h"

namespace sigtree {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "cost matrix value count does not match shape");
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "costs must be finite and non-negative");
    }
  }
}

CostMatrix CostMatrix::transposed() const {
  std::vector<double> t(values_.size());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t[j * rows_ + i] = values_[i * cols_ + j];
  }
  return CostMatrix(cols_, rows_, std::move(t));
}

CostMatrix cost_matrix(const Palette& palette) {
  const std::size_t n = palette.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Rgb a = palette[i].rgb;
      const Rgb b = palette[j].rgb;
      const double dr = static_cast<double>(a.r) - b.r;
      const double dg = static_cast<double>(a.g) - b.g;
      const double db = static_cast<double>(a.b) - b.b;
      d[i * n + j] = std::sqrt(dr * dr + dg * dg + db * db);
    }
  }
  return CostMatrix(n, n, std::move(d));
}

namespace {

constexpr std::size_t kDummy = std::numeric_limits<std::size_t>::max();

struct BasicCell {
  std::uint32_t row;
  std::uint32_t col;
  double flow;
};

// Transportation simplex over a balanced problem: least-cost initial basis,
// MODI potentials, and cycle pivots along the basis tree. Rows and columns
// with zero mass are removed up front; a zero-cost dummy row or column takes
// up any surplus. Buffers are reused across calls on the same thread.
class TransportSimplex {
 public:
  // Returns the optimal cost. Flows for real cells are left in basis().
  double run(std::span<const double> supply, std::span<const double> demand,
             const CostMatrix& cost, bool transposed);

  const std::vector<BasicCell>& basis() const { return basis_; }
  std::size_t original_row(std::size_t r) const { return row_map_[r]; }
  std::size_t original_col(std::size_t c) const { return col_map_[c]; }

 private:
  double c(std::size_t i, std::size_t j) const { return cost_[i * cols_ + j]; }
  void initial_basis();
  void compute_potentials();
  // Basic-cell indices on the tree path from column node `col` to row node `row`.
  void tree_path(std::size_t row, std::size_t col);

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_, b_, cost_;
  std::vector<std::size_t> row_map_, col_map_;
  std::vector<BasicCell> basis_;
  std::vector<std::int32_t> basic_of_cell_;
  std::vector<std::uint32_t> order_;
  std::vector<double> u_, v_;
  std::vector<std::int32_t> adj_head_, adj_next_, adj_edge_;
  std::vector<std::int32_t> parent_edge_, queue_;
  std::vector<char> seen_;
  std::vector<std::size_t> path_;
};

double TransportSimplex::run(std::span<const double> supply, std::span<const double> demand,
                             const CostMatrix& cost, bool transposed) {
  double total_a = 0.0;
  double total_b = 0.0;
  row_map_.clear();
  col_map_.clear();
  a_.clear();
  b_.clear();
  for (std::size_t i = 0; i < supply.size(); ++i) {
    if (supply[i] > 0.0) {
      row_map_.push_back(i);
      a_.push_back(supply[i]);
      total_a += supply[i];
    }
  }
  for (std::size_t j = 0; j < demand.size(); ++j) {
    if (demand[j] > 0.0) {
      col_map_.push_back(j);
      b_.push_back(demand[j]);
      total_b += demand[j];
    }
  }
  const double scale = std::max(total_a, total_b);
  if (total_a - total_b > 1e-12 * scale) {
    col_map_.push_back(kDummy);
    b_.push_back(total_a - total_b);
  } else if (total_b - total_a > 1e-12 * scale) {
    row_map_.push_back(kDummy);
    a_.push_back(total_b - total_a);
  }
  rows_ = a_.size();
  cols_ = b_.size();

  cost_.assign(rows_ * cols_, 0.0);
  double max_cost = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      const std::size_t oi = row_map_[i];
      const std::size_t oj = col_map_[j];
      if (oi == kDummy || oj == kDummy) continue;
      const double v = transposed ? cost(oj, oi) : cost(oi, oj);
      cost_[i * cols_ + j] = v;
      max_cost = std::max(max_cost, v);
    }
  }

  initial_basis();

  const double eps = 1e-11 * (1.0 + max_cost);
  const std::size_t cells = rows_ * cols_;
  const std::size_t bland_after = 50 * cells + 100;
  const std::size_t give_up = 200 * cells * (rows_ + cols_) + 10000;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > give_up) {
      throw std::logic_error("transportation simplex failed to converge");
    }
    compute_potentials();

    // Dantzig pricing first; switch to Bland's rule if degenerate pivots
    // drag on, which rules out cycling.
    const bool bland = iter >= bland_after;
    std::size_t enter = kDummy;
    double best = -eps;
    for (std::size_t cell = 0; cell < cells; ++cell) {
      if (basic_of_cell_[cell] >= 0) continue;
      const std::size_t i = cell / cols_;
      const std::size_t j = cell % cols_;
      const double reduced = cost_[cell] - u_[i] - v_[j];
      if (reduced < best) {
        enter = cell;
        if (bland) break;
        best = reduced;
      }
    }
    if (enter == kDummy) break;

    const std::size_t ei = enter / cols_;
    const std::size_t ej = enter % cols_;
    tree_path(ei, ej);

    // path_[0] touches the entering column and loses flow; signs alternate.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = kDummy;
    std::size_t leave_cell = kDummy;
    for (std::size_t k = 0; k < path_.size(); k += 2) {
      const BasicCell& bc = basis_[path_[k]];
      const std::size_t cell = std::size_t{bc.row} * cols_ + bc.col;
      if (bc.flow < theta || (bc.flow == theta && cell < leave_cell)) {
        theta = bc.flow;
        leave = path_[k];
        leave_cell = cell;
      }
    }
    for (std::size_t k = 0; k < path_.size(); ++k) {
      BasicCell& bc = basis_[path_[k]];
      bc.flow = (k % 2 == 0) ? std::max(0.0, bc.flow - theta) : bc.flow + theta;
    }
    basic_of_cell_[leave_cell] = -1;
    basis_[leave] = {static_cast<std::uint32_t>(ei), static_cast<std::uint32_t>(ej), theta};
    basic_of_cell_[enter] = static_cast<std::int32_t>(leave);
  }

  double total = 0.0;
  for (const BasicCell& bc : basis_) total += bc.flow * c(bc.row, bc.col);
  return total;
}

void TransportSimplex::initial_basis() {
  const std::size_t cells = rows_ * cols_;
  order_.resize(cells);
  std::iota(order_.begin(), order_.end(), 0u);
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::uint32_t x, std::uint32_t y) { return cost_[x] < cost_[y]; });

  std::vector<double>& rem_a = u_;
  std::vector<double>& rem_b = v_;
  rem_a.assign(a_.begin(), a_.end());
  rem_b.assign(b_.begin(), b_.end());
  seen_.assign(rows_ + cols_, 0);  // crossed-out lines
  basic_of_cell_.assign(cells, -1);
  basis_.clear();

  // Least-cost rule. Exactly one line is crossed per step (both on the last),
  // which leaves rows + cols - 1 basic cells forming a spanning tree even
  // when some of them carry zero flow.
  std::size_t rows_left = rows_;
  std::size_t cols_left = cols_;
  std::size_t ptr = 0;
  while (true) {
    while (seen_[order_[ptr] / cols_] || seen_[rows_ + order_[ptr] % cols_]) ++ptr;
    const std::size_t cell = order_[ptr];
    const std::size_t i = cell / cols_;
    const std::size_t j = cell % cols_;
    const double x = std::min(rem_a[i], rem_b[j]);
    rem_a[i] -= x;
    rem_b[j] -= x;
    basic_of_cell_[cell] = static_cast<std::int32_t>(basis_.size());
    basis_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), x});
    if (rows_left == 1 && cols_left == 1) break;
    const bool cross_row = rows_left > 1 && (cols_left == 1 || rem_a[i] <= rem_b[j]);
    if (cross_row) {
      seen_[i] = 1;
      --rows_left;
    } else {
      seen_[rows_ + j] = 1;
      --cols_left;
    }
  }
}

void TransportSimplex::compute_potentials() {
  const std::size_t nodes = rows_ + cols_;
  adj_head_.assign(nodes, -1);
  adj_next_.resize(2 * basis_.size());
  adj_edge_.resize(2 * basis_.size());
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    const std::size_t r = basis_[k].row;
    const std::size_t cnode = rows_ + basis_[k].col;
    adj_edge_[2 * k] = static_cast<std::int32_t>(k);
    adj_next_[2 * k] = adj_head_[r];
    adj_head_[r] = static_cast<std::int32_t>(2 * k);
    adj_edge_[2 * k + 1] = static_cast<std::int32_t>(k);
    adj_next_[2 * k + 1] = adj_head_[cnode];
    adj_head_[cnode] = static_cast<std::int32_t>(2 * k + 1);
  }

  u_.assign(rows_, 0.0);
  v_.assign(cols_, 0.0);
  seen_.assign(nodes, 0);
  queue_.clear();
  queue_.push_back(0);
  seen_[0] = 1;
  for (std::size_t q = 0; q < queue_.size(); ++q) {
    const std::size_t node = static_cast<std::size_t>(queue_[q]);
    for (std::int32_t a = adj_head_[node]; a >= 0; a = adj_next_[a]) {
      const BasicCell& bc = basis_[adj_edge_[a]];
      const std::size_t other = node < rows_ ? rows_ + bc.col : bc.row;
      if (seen_[other]) continue;
      seen_[other] = 1;
      if (node < rows_) {
        v_[bc.col] = c(bc.row, bc.col) - u_[bc.row];
      } else {
        u_[bc.row] = c(bc.row, bc.col) - v_[bc.col];
      }
      queue_.push_back(static_cast<std::int32_t>(other));
    }
  }
}

void TransportSimplex::tree_path(std::size_t row, std::size_t col) {
  const std::size_t nodes = rows_ + cols_;
  parent_edge_.assign(nodes, -1);
  seen_.assign(nodes, 0);
  queue_.clear();
  queue_.push_back(static_cast<std::int32_t>(row));
  seen_[row] = 1;
  const std::size_t target = rows_ + col;
  for (std::size_t q = 0; q < queue_.size() && !seen_[target]; ++q) {
    const std::size_t node = static_cast<std::size_t>(queue_[q]);
    for (std::int32_t a = adj_head_[node]; a >= 0; a = adj_next_[a]) {
      const BasicCell& bc = basis_[adj_edge_[a]];
      const std::size_t other = node < rows_ ? rows_ + bc.col : bc.row;
      if (seen_[other]) continue;
      seen_[other] = 1;
      parent_edge_[other] = adj_edge_[a];
      queue_.push_back(static_cast<std::int32_t>(other));
    }
  }
  path_.clear();
  std::size_t node = target;
  while (node != row) {
    const std::size_t k = static_cast<std::size_t>(parent_edge_[node]);
    path_.push_back(k);
    node = node < rows_ ? rows_ + basis_[k].col : basis_[k].row;
  }
}

TransportSimplex& workspace() {
  thread_local TransportSimplex simplex;
  return simplex;
}

struct Totals {
  double supply = 0.0;
  double demand = 0.0;
};

Totals check_masses(std::span<const double> supply, std::span<const double> demand,
                    const CostMatrix& cost) {
  if (supply.size() != cost.rows() || demand.size() != cost.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "masses are " + std::to_string(supply.size()) + "x" +
                    std::to_string(demand.size()) + " but costs are " +
                    std::to_string(cost.rows()) + "x" + std::to_string(cost.cols()));
  }
  Totals t;
  for (double s : supply) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::kInvalidArgument, "supply must be finite and non-negative");
    }
    t.supply += s;
  }
  for (double d : demand) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::kInvalidArgument, "demand must be finite and non-negative");
    }
    t.demand += d;
  }
  if (t.supply == 0.0 && t.demand == 0.0) {
    throw Error(ErrorCode::kZeroMass, "both sides of the transport problem are empty");
  }
  return t;
}

}  // namespace

FlowPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                         const CostMatrix& cost) {
  const Totals totals = check_masses(supply, demand, cost);
  FlowPlan plan;
  plan.rows = supply.size();
  plan.cols = demand.size();
  plan.flows.assign(plan.rows * plan.cols, 0.0);
  plan.total_flow = std::min(totals.supply, totals.demand);
  if (plan.total_flow == 0.0) return plan;

  TransportSimplex& simplex = workspace();
  plan.total_cost = simplex.run(supply, demand, cost, false);
  for (const BasicCell& bc : simplex.basis()) {
    const std::size_t i = simplex.original_row(bc.row);
    const std::size_t j = simplex.original_col(bc.col);
    if (i == kDummy || j == kDummy) continue;
    plan.flows[i * plan.cols + j] = bc.flow;
  }
  return plan;
}

double transport_cost(std::span<const double> supply, std::span<const double> demand,
                      const CostMatrix& cost) {
  const Totals totals = check_masses(supply, demand, cost);
  if (std::min(totals.supply, totals.demand) == 0.0) return 0.0;
  return workspace().run(supply, demand, cost, false);
}

double emd(std::span<const double> a, std::span<const double> b, const CostMatrix& cost) {
  const Totals totals = check_masses(a, b, cost);
  const double flow = std::min(totals.supply, totals.demand);
  if (flow == 0.0) return 0.0;
  // The heavier side supplies so that total demand never exceeds supply.
  const double total = totals.supply >= totals.demand ? workspace().run(a, b, cost, false)
                                                      : workspace().run(b, a, cost, true);
  return total / flow;
}

double emd_signatures(const Signature& a, const Signature& b, const CostMatrix& cost,
                      BlockRule rule) {
  require_same_shape(a, b);
  // Position weights are the percentage weights times m / 100; the ratio
  // cost / flow is unaffected and the solver works on small integers.
  const std::vector<double> wa = position_weights(a, rule);
  const std::vector<double> wb = position_weights(b, rule);
  return emd(wa, wb, cost);
}

}  // namespace sigtree
