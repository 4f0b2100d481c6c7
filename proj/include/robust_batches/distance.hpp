//
// Copyright 2026 The robust_batches Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// A_k distance between distributions over {0, ..., ell-1}: the largest
// discrepancy |p(S) - q(S)| over sets S that are unions of at most k runs of
// consecutive bins. For k >= ceil(ell/2) every subset qualifies and the
// distance equals total variation.

#ifndef ROBUST_BATCHES_DISTANCE_HPP_
#define ROBUST_BATCHES_DISTANCE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "robust_batches/sets.hpp"

namespace robust_batches {

// Secondary criterion when two selections reach the same weight.
enum class RunTieBreak {
  kFewestElements,  // then lexicographically smallest member list
  kFewestRuns,      // then leftmost
};

struct RunSelection {
  double value = 0.0;  // sum of selected weights, in index order
  BinSubset members;
};

// Maximum-weight selection of at most k disjoint runs of positions
// (possibly empty). O(size * k) time.
RunSelection max_weight_runs(std::span<const double> weights, std::size_t k,
                             RunTieBreak tie = RunTieBreak::kFewestElements);

struct WitnessedDistance {
  double value = 0.0;  // |sum of d over witness|
  BinSubset witness;
};

// Best union of <= k runs for a signed vector d, maximizing |sum_{i in S} d_i|.
// The positive and negative sides are solved separately; ties prefer fewer
// bins, then the lexicographically smallest set.
WitnessedDistance best_k_interval_union(std::span<const double> d,
                                        std::size_t k);

// Throws DomainError if p or q is not a probability vector (sum 1 +- 1e-9,
// nonnegative entries) or if the lengths differ, and UsageError for k == 0.
double fk_distance(std::span<const double> p, std::span<const double> q,
                   std::size_t k);

WitnessedDistance fk_witness(std::span<const double> p,
                             std::span<const double> q, std::size_t k);

// Exhaustive version over all 2^ell subsets; refuses ell > 20.
double fk_distance_brute(std::span<const double> p, std::span<const double> q,
                         std::size_t k);

double tv_distance(std::span<const double> p, std::span<const double> q);

// Throws DomainError unless v is a probability vector within `tolerance`.
void require_distribution(std::span<const double> v, const char* what,
                          double tolerance = 1e-9);

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_DISTANCE_HPP_
