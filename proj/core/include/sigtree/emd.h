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

#include <cstddef>
#include <span>
#include <vector>

#include "sigtree/palette.h"
#include "sigtree/signature.h"

namespace sigtree {

// Dense row-major ground-distance matrix.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  std::span<const double> values() const noexcept { return values_; }
  CostMatrix transposed() const;

  friend bool operator==(const CostMatrix&, const CostMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Euclidean RGB distance between every pair of palette colors.
CostMatrix cost_matrix(const Palette& palette);

struct FlowPlan {
  std::size_t rows = 0;  // supply bins
  std::size_t cols = 0;  // demand bins
  std::vector<double> flows;
  double total_cost = 0.0;
  // min(total supply, total demand)
  double total_flow = 0.0;

  double flow(std::size_t i, std::size_t j) const { return flows[i * cols + j]; }
};

// Minimum-cost transport of min(sum supply, sum demand) units with row sums
// bounded by supply and column sums bounded by demand. Solved exactly with
// the transportation simplex; a zero-cost dummy row or column absorbs any
// imbalance. Throws kZeroMass if both sides are empty and kInvalidArgument
// for negative masses or shape mismatch.
FlowPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                         const CostMatrix& cost);

// Optimal transport cost only; same contract as solve_transport without the
// flow matrix. This is the hot path used by the index.
double transport_cost(std::span<const double> supply, std::span<const double> demand,
                      const CostMatrix& cost);

// Normalized EMD: optimal cost divided by min(sum a, sum b). The lighter side
// is the consumer. Returns 0 if exactly one side is empty (nothing to move)
// and throws kZeroMass if both are.
double emd(std::span<const double> a, std::span<const double> b, const CostMatrix& cost);

// emd(weight_vector(a), weight_vector(b), cost)
double emd_signatures(const Signature& a, const Signature& b, const CostMatrix& cost,
                      BlockRule rule = BlockRule::kOneHot);

}  // namespace sigtree
