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

#include "robust_batches/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "robust_batches/error.hpp"
#include "robust_batches/parallel.hpp"

namespace robust_batches {

std::size_t default_thread_count() {
  const auto hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

SubCollection all_indices(std::size_t m) {
  SubCollection out(m);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

BatchCollection::BatchCollection(std::vector<Batch> batches,
                                 std::optional<std::vector<Truth>> truth)
    : batches_(std::move(batches)), truth_(std::move(truth)) {
  if (batches_.empty()) throw UsageError("BatchCollection: need m >= 1 batches");
  n_ = batches_.front().samples.size();
  if (n_ == 0) throw UsageError("BatchCollection: batches must be nonempty");
  labeled_ = batches_.front().labeled();
  for (const auto& b : batches_) {
    if (b.samples.size() != n_) {
      throw UsageError("BatchCollection: batch " + std::to_string(b.id) +
                       " has " + std::to_string(b.samples.size()) +
                       " samples, expected n = " + std::to_string(n_));
    }
    for (double x : b.samples) {
      if (!std::isfinite(x)) {
        throw UsageError("BatchCollection: batch " + std::to_string(b.id) +
                         " contains a non-finite sample");
      }
    }
    if (b.labeled() != labeled_ ||
        (labeled_ && b.labels.size() != b.samples.size())) {
      throw UsageError("BatchCollection: batch " + std::to_string(b.id) +
                       " has inconsistent labels");
    }
    for (auto y : b.labels) {
      if (y > 1) {
        throw UsageError("BatchCollection: labels must be 0 or 1 (batch " +
                         std::to_string(b.id) + ")");
      }
    }
  }
  if (truth_ && truth_->size() != batches_.size()) {
    throw UsageError("BatchCollection: truth flags must have exactly m entries");
  }
}

std::vector<double> BatchCollection::pooled_sorted_samples() const {
  std::vector<double> all;
  all.reserve(n_ * batches_.size());
  for (const auto& b : batches_) {
    all.insert(all.end(), b.samples.begin(), b.samples.end());
  }
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<double> BatchCollection::samples_with_label(
    std::span<const std::size_t> sub, std::uint8_t label) const {
  std::vector<double> out;
  for (auto i : sub) {
    const auto& b = batches_.at(i);
    for (std::size_t j = 0; j < n_; ++j) {
      if (b.labels[j] == label) out.push_back(b.samples[j]);
    }
  }
  return out;
}

BatchCollection BatchCollection::select(std::span<const std::size_t> sub) const {
  std::vector<Batch> picked;
  picked.reserve(sub.size());
  std::optional<std::vector<Truth>> flags;
  if (truth_) flags.emplace();
  for (auto i : sub) {
    picked.push_back(batches_.at(i));
    if (truth_) flags->push_back((*truth_)[i]);
  }
  return BatchCollection(std::move(picked), std::move(flags));
}

DiscretizedCollection::DiscretizedCollection(
    std::size_t ell, std::size_t n, std::vector<DiscretizedBatch> batches,
    std::vector<std::int64_t> ids, std::optional<std::vector<Truth>> truth)
    : ell_(ell), n_(n), batches_(std::move(batches)), ids_(std::move(ids)),
      truth_(std::move(truth)) {
  if (ell_ == 0 || n_ == 0) {
    throw UsageError("DiscretizedCollection: ell and n must be positive");
  }
  if (ids_.size() != batches_.size()) {
    throw UsageError("DiscretizedCollection: one id per batch required");
  }
  if (truth_ && truth_->size() != batches_.size()) {
    throw UsageError("DiscretizedCollection: truth flags must have m entries");
  }
  for (const auto& b : batches_) {
    if (b.counts.size() != ell_) {
      throw UsageError("DiscretizedCollection: count vector length != ell");
    }
    const auto total =
        std::accumulate(b.counts.begin(), b.counts.end(), std::uint64_t{0});
    if (total != n_) {
      throw UsageError("DiscretizedCollection: bin counts must sum to n");
    }
  }
}

std::uint32_t DiscretizedCollection::count_in(
    std::size_t i, const std::vector<char>& mask) const {
  const auto& counts = batches_[i].counts;
  std::uint32_t c = 0;
  for (std::size_t j = 0; j < ell_; ++j) {
    if (mask[j]) c += counts[j];
  }
  return c;
}

std::size_t count_in(const Batch& batch, const IntervalUnion& subset) {
  return static_cast<std::size_t>(
      std::count_if(batch.samples.begin(), batch.samples.end(),
                    [&](double x) { return subset.contains(x); }));
}

std::size_t count_in(const DiscretizedBatch& batch, const BinSubset& subset) {
  if (subset.extent() > batch.counts.size()) {
    throw UsageError("count_in: bin subset exceeds the batch's domain");
  }
  std::size_t c = 0;
  for (auto j : subset.members()) c += batch.counts[j];
  return c;
}

double empirical_prob(const Batch& batch, const IntervalUnion& subset) {
  return static_cast<double>(count_in(batch, subset)) /
         static_cast<double>(batch.samples.size());
}

double empirical_prob(const DiscretizedBatch& batch, const BinSubset& subset) {
  const auto n = std::accumulate(batch.counts.begin(), batch.counts.end(),
                                 std::uint64_t{0});
  if (n == 0) throw UsageError("empirical_prob: empty batch");
  return static_cast<double>(count_in(batch, subset)) / static_cast<double>(n);
}

std::vector<double> pooled_empirical(const DiscretizedCollection& collection,
                                     std::span<const std::size_t> sub) {
  if (sub.empty()) throw UsageError("pooled_empirical: empty sub-collection");
  std::vector<std::uint64_t> totals(collection.ell(), 0);
  for (auto i : sub) {
    const auto& counts = collection.batch(i).counts;
    for (std::size_t j = 0; j < totals.size(); ++j) totals[j] += counts[j];
  }
  const double denom =
      static_cast<double>(collection.n()) * static_cast<double>(sub.size());
  std::vector<double> out(totals.size());
  for (std::size_t j = 0; j < totals.size(); ++j) {
    out[j] = static_cast<double>(totals[j]) / denom;
  }
  return out;
}

double pooled_prob(const BatchCollection& collection,
                   std::span<const std::size_t> sub,
                   const IntervalUnion& subset) {
  if (sub.empty()) throw UsageError("pooled_prob: empty sub-collection");
  std::uint64_t total = 0;
  for (auto i : sub) total += count_in(collection.batch(i), subset);
  return static_cast<double>(total) /
         (static_cast<double>(collection.n()) * static_cast<double>(sub.size()));
}

double binomial_variance(double r, std::size_t n) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw DomainError("binomial_variance: r must lie in [0, 1]");
  }
  if (n == 0) throw UsageError("binomial_variance: n must be positive");
  return r * (1.0 - r) / static_cast<double>(n);
}

namespace {

// Variance of counts c_b / n around their mean, from integer counts.
double count_variance(std::span<const std::uint64_t> counts, std::size_t n) {
  const double size = static_cast<double>(counts.size());
  const std::uint64_t total =
      std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  // sum_b (N c_b - C)^2 / (N^3 n^2) with N = |sub|, C = sum of counts.
  double acc = 0.0;
  for (auto c : counts) {
    const double d = size * static_cast<double>(c) - static_cast<double>(total);
    acc += d * d;
  }
  const double nn = static_cast<double>(n);
  return acc / (size * size * size * nn * nn);
}

}  // namespace

double empirical_variance(const DiscretizedCollection& collection,
                          std::span<const std::size_t> sub,
                          const BinSubset& subset) {
  if (sub.empty()) throw UsageError("empirical_variance: empty sub-collection");
  const auto mask = subset.mask(collection.ell());
  std::vector<std::uint64_t> counts;
  counts.reserve(sub.size());
  for (auto i : sub) counts.push_back(collection.count_in(i, mask));
  return count_variance(counts, collection.n());
}

double empirical_variance(const BatchCollection& collection,
                          std::span<const std::size_t> sub,
                          const IntervalUnion& subset) {
  if (sub.empty()) throw UsageError("empirical_variance: empty sub-collection");
  std::vector<std::uint64_t> counts;
  counts.reserve(sub.size());
  for (auto i : sub) counts.push_back(count_in(collection.batch(i), subset));
  return count_variance(counts, collection.n());
}

CorruptionParams::CorruptionParams(double beta, std::size_t n, std::size_t m)
    : beta_(beta), n_(n), m_(m) {
  if (!(beta > 0.0)) {
    throw DomainError("beta must be positive (got " + std::to_string(beta) + ")");
  }
  if (beta > kMaxBeta) {
    throw DomainError("beta = " + std::to_string(beta) +
                      " exceeds 0.4; the guarantees assume at most a 0.4 "
                      "fraction of adversarial batches");
  }
  if (n == 0 || m == 0) throw DomainError("n and m must be positive");
  const double log_term = std::log(6.0 * std::exp(1.0) / beta);
  const double nd = static_cast<double>(n);
  tau_ = 3.0 * std::sqrt(log_term / nd);
  kappa_g_ = beta * static_cast<double>(m) * log_term / nd;
}

CorruptionParams& CorruptionParams::set_multiples(double trigger, double stop) {
  if (!(trigger > 0.0) || !(stop > 0.0)) {
    throw DomainError("corruption threshold multiples must be positive");
  }
  trigger_ = trigger;
  stop_ = stop;
  return *this;
}

}  // namespace robust_batches
