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

// Batches of samples and the empirical measures they induce.
//
// A batch b holds n samples; its empirical measure assigns a set S the
// fraction of the batch's samples inside S. A sub-collection induces the
// mean of its batches' empirical measures. All probabilities are computed
// from integer counts and divided once, so values are exact multiples of 1/n
// (or 1/(n|B'|) for pooled values) up to a single rounding.

#ifndef ROBUST_BATCHES_CORE_HPP_
#define ROBUST_BATCHES_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "robust_batches/sets.hpp"

namespace robust_batches {

enum class Truth : std::uint8_t { kGood, kAdversarial };

struct Batch {
  std::int64_t id = 0;
  std::vector<double> samples;
  // Empty for unlabeled data; otherwise one 0/1 label per sample.
  std::vector<std::uint8_t> labels;

  bool labeled() const { return !labels.empty(); }
};

// Indices into a collection, sorted ascending.
using SubCollection = std::vector<std::size_t>;

SubCollection all_indices(std::size_t m);

// m >= 1 batches sharing a common size n. Samples must be finite; labels, if
// present on any batch, must be present on every batch.
class BatchCollection {
 public:
  BatchCollection(std::vector<Batch> batches,
                  std::optional<std::vector<Truth>> truth = std::nullopt);

  std::size_t n() const { return n_; }
  std::size_t m() const { return batches_.size(); }
  const std::vector<Batch>& batches() const { return batches_; }
  const Batch& batch(std::size_t i) const { return batches_[i]; }
  bool has_truth() const { return truth_.has_value(); }
  const std::optional<std::vector<Truth>>& truth() const { return truth_; }
  bool labeled() const { return labeled_; }

  // All n*m samples in non-decreasing order.
  std::vector<double> pooled_sorted_samples() const;

  // Samples of the given batches (in batch order) with the given label.
  std::vector<double> samples_with_label(std::span<const std::size_t> sub,
                                         std::uint8_t label) const;

  BatchCollection select(std::span<const std::size_t> sub) const;

 private:
  std::vector<Batch> batches_;
  std::optional<std::vector<Truth>> truth_;
  std::size_t n_ = 0;
  bool labeled_ = false;
};

struct DiscretizedBatch {
  std::vector<std::uint32_t> counts;  // samples per bin; sums to n
};

// Per-batch bin counts over a shared discrete domain of size ell.
class DiscretizedCollection {
 public:
  DiscretizedCollection(std::size_t ell, std::size_t n,
                        std::vector<DiscretizedBatch> batches,
                        std::vector<std::int64_t> ids,
                        std::optional<std::vector<Truth>> truth = std::nullopt);

  std::size_t ell() const { return ell_; }
  std::size_t n() const { return n_; }
  std::size_t m() const { return batches_.size(); }
  const DiscretizedBatch& batch(std::size_t i) const { return batches_[i]; }
  const std::vector<DiscretizedBatch>& batches() const { return batches_; }
  const std::vector<std::int64_t>& ids() const { return ids_; }
  const std::optional<std::vector<Truth>>& truth() const { return truth_; }
  bool has_truth() const { return truth_.has_value(); }

  // Number of samples of batch i inside `subset`.
  std::uint32_t count_in(std::size_t i, const std::vector<char>& mask) const;

 private:
  std::size_t ell_;
  std::size_t n_;
  std::vector<DiscretizedBatch> batches_;
  std::vector<std::int64_t> ids_;
  std::optional<std::vector<Truth>> truth_;
};

// Number of the batch's samples inside `subset`.
std::size_t count_in(const Batch& batch, const IntervalUnion& subset);
std::size_t count_in(const DiscretizedBatch& batch, const BinSubset& subset);

// Empirical probability of `subset` under the batch's empirical measure.
double empirical_prob(const Batch& batch, const IntervalUnion& subset);
double empirical_prob(const DiscretizedBatch& batch, const BinSubset& subset);

// Mean of the empirical measures of `sub` as a probability vector over the
// discrete domain. Throws UsageError when `sub` is empty.
std::vector<double> pooled_empirical(const DiscretizedCollection& collection,
                                     std::span<const std::size_t> sub);

// Pooled empirical probability of a real subset.
double pooled_prob(const BatchCollection& collection,
                   std::span<const std::size_t> sub,
                   const IntervalUnion& subset);

// Variance r(1-r)/n of the mean of n Bernoulli(r) draws. Throws DomainError
// for r outside [0, 1] and UsageError for n == 0.
double binomial_variance(double r, std::size_t n);

// (1/|sub|) * sum over b of (mu_b(S) - mean)^2, with mean the pooled value.
double empirical_variance(const DiscretizedCollection& collection,
                          std::span<const std::size_t> sub,
                          const BinSubset& subset);
double empirical_variance(const BatchCollection& collection,
                          std::span<const std::size_t> sub,
                          const IntervalUnion& subset);

// Threshold and budget for corruption scores, all derived from (beta, n, m):
//   tau     = 3 * sqrt(ln(6e/beta) / n)
//   kappa_g = beta * m * ln(6e/beta) / n
// The trigger and stop multiples of kappa_g default to 25 and 20.
class CorruptionParams {
 public:
  static constexpr double kMaxBeta = 0.4;
  static constexpr double kDefaultTrigger = 25.0;
  static constexpr double kDefaultStop = 20.0;

  // Throws DomainError unless 0 < beta <= 0.4, n >= 1 and m >= 1.
  CorruptionParams(double beta, std::size_t n, std::size_t m);

  double beta() const { return beta_; }
  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  double tau() const { return tau_; }
  double kappa_g() const { return kappa_g_; }

  double trigger_multiple() const { return trigger_; }
  double stop_multiple() const { return stop_; }
  double trigger_threshold() const { return trigger_ * kappa_g_; }
  double stop_threshold() const { return stop_ * kappa_g_; }

  // Overrides for experiments; both must be positive.
  CorruptionParams& set_multiples(double trigger, double stop);

 private:
  double beta_;
  std::size_t n_;
  std::size_t m_;
  double tau_;
  double kappa_g_;
  double trigger_ = kDefaultTrigger;
  double stop_ = kDefaultStop;
};

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_CORE_HPP_
