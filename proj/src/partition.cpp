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

#include "robust_batches/partition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "robust_batches/error.hpp"

namespace robust_batches {

IntervalPartition::IntervalPartition(std::vector<double> boundaries,
                                     std::optional<std::uint64_t> source)
    : boundaries_(std::move(boundaries)), source_(source) {
  for (std::size_t i = 0; i < boundaries_.size(); ++i) {
    if (!std::isfinite(boundaries_[i])) {
      throw UsageError("IntervalPartition: boundaries must be finite");
    }
    if (i > 0 && !(boundaries_[i - 1] < boundaries_[i])) {
      throw UsageError("IntervalPartition: boundaries must strictly increase");
    }
  }
}

std::size_t IntervalPartition::bin_of(double x) const {
  // Cell j is (c_j, c_{j+1}]: the first cut point >= x closes x's cell.
  return static_cast<std::size_t>(
      std::lower_bound(boundaries_.begin(), boundaries_.end(), x) -
      boundaries_.begin());
}

Interval IntervalPartition::cell(std::size_t j) const {
  if (j >= ell()) throw UsageError("IntervalPartition: cell index out of range");
  Interval iv;
  if (j > 0) iv.lo = boundaries_[j - 1];
  if (j < boundaries_.size()) {
    iv.hi = boundaries_[j];
    iv.hi_closed = true;
  }
  return iv;
}

std::size_t choose_ell(std::size_t k, std::size_t n, double beta,
                       std::size_t s) {
  if (k == 0 || n == 0) throw DomainError("choose_ell: k and n must be >= 1");
  if (!(beta > 0.0) || beta > CorruptionParams::kMaxBeta) {
    throw DomainError("choose_ell: beta must lie in (0, 0.4]");
  }
  const double raw = 2.0 * static_cast<double>(k) *
                     std::sqrt(static_cast<double>(n)) / beta;
  // Decimal betas such as 0.4 are not exact in binary; without the slack
  // 2*2*10/0.4 would round up to 101.
  const double ell = std::ceil(raw - 1e-9 * std::max(1.0, raw));
  const auto clamped = static_cast<std::size_t>(std::max(1.0, ell));
  return std::min(clamped, std::max<std::size_t>(s, 1));
}

std::uint64_t sample_fingerprint(std::span<const double> sorted_samples) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (double x : sorted_samples) {
    auto bits = std::bit_cast<std::uint64_t>(x == 0.0 ? 0.0 : x);
    for (int i = 0; i < 8; ++i) {
      h ^= bits & 0xff;
      h *= 0x100000001b3ULL;
      bits >>= 8;
    }
  }
  return h;
}

IntervalPartition build_partition(std::span<const double> sorted_samples,
                                  std::size_t ell) {
  const std::size_t s = sorted_samples.size();
  if (ell == 0) throw UsageError("build_partition: ell must be >= 1");
  if (s < ell) {
    throw UsageError("build_partition: need at least ell = " +
                     std::to_string(ell) + " samples, got " + std::to_string(s));
  }
  if (!std::is_sorted(sorted_samples.begin(), sorted_samples.end())) {
    throw UsageError("build_partition: samples must be sorted");
  }
  const std::size_t delta = (s + ell - 1) / ell;
  std::vector<double> cuts;
  cuts.reserve(ell - 1);
  for (std::size_t j = 1; j < ell; ++j) {
    const std::size_t rank = std::min(j * delta, s);  // 1-based order statistic
    const double c = sorted_samples[rank - 1];
    if (cuts.empty() || cuts.back() < c) cuts.push_back(c);
  }
  return IntervalPartition(std::move(cuts), sample_fingerprint(sorted_samples));
}

std::vector<std::size_t> cell_occupancy(std::span<const double> samples,
                                        const IntervalPartition& partition) {
  std::vector<std::size_t> occ(partition.ell(), 0);
  for (double x : samples) ++occ[partition.bin_of(x)];
  return occ;
}

DiscretizedBatch discretize(std::span<const double> samples,
                            const IntervalPartition& partition) {
  DiscretizedBatch out;
  out.counts.assign(partition.ell(), 0);
  for (double x : samples) ++out.counts[partition.bin_of(x)];
  return out;
}

DiscretizedCollection discretize(const BatchCollection& collection,
                                 const IntervalPartition& partition) {
  if (partition.source()) {
    const auto pooled = collection.pooled_sorted_samples();
    if (sample_fingerprint(pooled) != *partition.source()) {
      throw UsageError(
          "discretize: partition was built from a different collection");
    }
  }
  std::vector<DiscretizedBatch> batches;
  std::vector<std::int64_t> ids;
  batches.reserve(collection.m());
  ids.reserve(collection.m());
  for (const auto& b : collection.batches()) {
    batches.push_back(discretize(b.samples, partition));
    ids.push_back(b.id);
  }
  return DiscretizedCollection(partition.ell(), collection.n(),
                               std::move(batches), std::move(ids),
                               collection.truth());
}

IntervalUnion lift_subset(const BinSubset& subset,
                          const IntervalPartition& partition) {
  if (subset.extent() > partition.ell()) {
    throw UsageError("lift_subset: bin index outside the partition");
  }
  std::vector<Interval> out;
  const auto& members = subset.members();
  std::size_t i = 0;
  while (i < members.size()) {
    std::size_t j = i;
    while (j + 1 < members.size() && members[j + 1] == members[j] + 1) ++j;
    Interval iv = partition.cell(members[i]);
    const Interval last = partition.cell(members[j]);
    iv.hi = last.hi;
    iv.hi_closed = last.hi_closed;
    out.push_back(iv);
    i = j + 1;
  }
  return IntervalUnion(std::move(out));
}

BinSubset inner_cells(const IntervalUnion& set,
                      const IntervalPartition& partition) {
  std::vector<std::size_t> bins;
  for (const auto& iv : set.intervals()) {
    // Only cells between the ones holding the endpoints can fit inside.
    const std::size_t first = std::isfinite(iv.lo) ? partition.bin_of(iv.lo) : 0;
    const std::size_t last = std::isfinite(iv.hi) ? partition.bin_of(iv.hi)
                                                  : partition.ell() - 1;
    for (std::size_t j = first; j <= last && j < partition.ell(); ++j) {
      if (iv.covers(partition.cell(j))) bins.push_back(j);
    }
  }
  std::sort(bins.begin(), bins.end());
  bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
  return BinSubset(std::move(bins));
}

}  // namespace robust_batches
