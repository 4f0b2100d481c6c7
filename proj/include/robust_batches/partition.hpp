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

// Data-driven interval partition of the real line and the discretization it
// induces.
//
// Given s pooled samples sorted as x_1 <= ... <= x_s and a target cell count
// ell, cut points are placed at every Delta-th order statistic with
// Delta = ceil(s / ell):
//
//   (-inf, x_D], (x_D, x_2D], ..., (x_{(ell-1)D}, +inf)
//
// Every cell then holds at most Delta of the samples when they are distinct,
// which makes the unions of cells a 2k*Delta/s cover of unions of k
// intervals (2k/ell when ell divides s). Repeated cut values are collapsed,
// so the realized cell count can be below the requested ell.

#ifndef ROBUST_BATCHES_PARTITION_HPP_
#define ROBUST_BATCHES_PARTITION_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "robust_batches/core.hpp"
#include "robust_batches/sets.hpp"

namespace robust_batches {

// Cells (-inf, c_1], (c_1, c_2], ..., (c_{ell-1}, +inf) for strictly
// increasing cut points c_j.
class IntervalPartition {
 public:
  // A single cell covering the real line.
  IntervalPartition() = default;

  // Throws UsageError unless boundaries are finite and strictly increasing.
  explicit IntervalPartition(std::vector<double> boundaries,
                             std::optional<std::uint64_t> source = std::nullopt);

  std::size_t ell() const { return boundaries_.size() + 1; }
  const std::vector<double>& boundaries() const { return boundaries_; }

  // Index of the cell containing x.
  std::size_t bin_of(double x) const;

  Interval cell(std::size_t j) const;

  // Fingerprint of the samples the partition was built from, if any.
  const std::optional<std::uint64_t>& source() const { return source_; }

  bool operator==(const IntervalPartition& other) const {
    return boundaries_ == other.boundaries_;
  }

 private:
  std::vector<double> boundaries_;
  std::optional<std::uint64_t> source_;
};

// ceil(2k sqrt(n) / beta), clamped to [1, s] where s is the pooled sample
// count. Throws DomainError unless k >= 1, n >= 1 and 0 < beta <= 0.4.
std::size_t choose_ell(std::size_t k, std::size_t n, double beta,
                       std::size_t s);

// Order-independent identity of a sorted sample vector.
std::uint64_t sample_fingerprint(std::span<const double> sorted_samples);

// Throws UsageError if the samples are not sorted or if s < ell.
IntervalPartition build_partition(std::span<const double> sorted_samples,
                                  std::size_t ell);

// Number of samples in each cell.
std::vector<std::size_t> cell_occupancy(std::span<const double> samples,
                                        const IntervalPartition& partition);

// Maps every batch to its bin counts. If the partition carries a source
// fingerprint it must match this collection's pooled samples.
DiscretizedCollection discretize(const BatchCollection& collection,
                                 const IntervalPartition& partition);

DiscretizedBatch discretize(std::span<const double> samples,
                            const IntervalPartition& partition);

// The union of the cells in `subset`, with runs of adjacent cells merged.
IntervalUnion lift_subset(const BinSubset& subset,
                          const IntervalPartition& partition);

// The cells lying entirely inside `set`; the cover witness for `set`.
BinSubset inner_cells(const IntervalUnion& set,
                      const IntervalPartition& partition);

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_PARTITION_HPP_
