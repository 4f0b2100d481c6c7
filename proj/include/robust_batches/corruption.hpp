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

// Corruption scores and the randomized batch filter built on them.
//
// For a subset S, a batch whose empirical probability mu_b(S) lies within
// tau of the median over the sub-collection scores 0; otherwise it scores
// (mu_b(S) - med)^2. A sub-collection scores the sum over its batches. Good
// batches collectively stay below kappa_g, so a sub-collection scoring far
// above kappa_g must contain adversarial batches with large deviations, and
// deleting batches with probability proportional to their score removes
// mostly adversarial ones.

#ifndef ROBUST_BATCHES_CORRUPTION_HPP_
#define ROBUST_BATCHES_CORRUPTION_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "robust_batches/core.hpp"
#include "robust_batches/rng.hpp"
#include "robust_batches/sets.hpp"

namespace robust_batches {

struct CorruptionReport {
  BinSubset subset;
  double median = 0.0;
  std::vector<std::int64_t> batch_ids;  // in sub-collection order
  std::vector<double> scores;           // parallel to batch_ids
  double total = 0.0;
};

// Twice the median of `counts` (an integer even for an even count).
std::uint64_t twice_median(std::span<const std::uint32_t> counts);

// Score of a batch with `count` samples in S against a median given as
// twice a count; equals corruption_score(count/n, med2/(2n)) up to rounding.
double count_score(std::uint32_t count, std::uint64_t med2, std::size_t n,
                   double tau);

// Median of count/n over `counts`; the mean of the two middle values for an
// even number of entries. Throws UsageError when empty.
double median_of_counts(std::span<const std::uint32_t> counts, std::size_t n);

// Median over `sub` of the batches' empirical probability of `subset`.
double median_prob(const DiscretizedCollection& collection,
                   std::span<const std::size_t> sub, const BinSubset& subset);

// 0 when |mu - med| <= tau, else (mu - med)^2.
double corruption_score(double mu, double med, const CorruptionParams& params);

double corruption_batch(const DiscretizedBatch& batch, const BinSubset& subset,
                        double med, const CorruptionParams& params);

// Sum of corruption scores of batches whose counts in S are `counts`, using
// the median of those same counts.
double corruption_total(std::span<const std::uint32_t> counts, std::size_t n,
                        const CorruptionParams& params);

// Per-batch and total corruption of `sub` for `subset`, with the median
// computed from `sub` itself.
CorruptionReport corruption_collection(const DiscretizedCollection& collection,
                                       std::span<const std::size_t> sub,
                                       const BinSubset& subset,
                                       const CorruptionParams& params);

// Removes batches one at a time, each drawn with probability proportional to
// its corruption score (median frozen at `med`), until the total falls below
// params.stop_threshold(). Returns the surviving indices in input order.
SubCollection batch_deletion(const DiscretizedCollection& collection,
                             std::span<const std::size_t> sub,
                             const BinSubset& subset, double med,
                             const CorruptionParams& params, Rng& rng);

// Visits the cover in order; whenever the current sub-collection's score for
// a subset reaches params.trigger_threshold(), recomputes the median and runs
// batch_deletion on that subset.
SubCollection clean_over_cover(const DiscretizedCollection& collection,
                               std::span<const BinSubset> cover,
                               const CorruptionParams& params, Rng& rng);

struct SubsetPropertyCheck {
  BinSubset subset;
  double target_prob = 0.0;
  double median_error = 0.0;    // |med - p(S)|
  double mean_error = 0.0;      // max over checked sub-collections
  double variance_error = 0.0;  // max over checked sub-collections
  double corruption = 0.0;      // score of the good collection
  bool median_ok = false;
  bool mean_ok = false;
  bool variance_ok = false;
  bool corruption_ok = false;
};

struct PropertyReport {
  double median_bound = 0.0;      // sqrt(ln 6 / n)
  double mean_bound = 0.0;        // (beta/2) sqrt(ln(6e/beta) / n)
  double variance_bound = 0.0;    // 6 beta ln(6e/beta) / n
  double corruption_bound = 0.0;  // kappa_g
  std::vector<SubsetPropertyCheck> subsets;
  bool median_holds = true;
  bool mean_variance_holds = true;
  bool corruption_holds = true;

  bool all_hold() const {
    return median_holds && mean_variance_holds && corruption_holds;
  }
};

// Checks the three concentration properties on a collection of good batches
// against the target distribution over the same bins. Mean and variance are
// checked on the full collection and on the two sub-collections obtained by
// dropping the floor(beta/6 * |G|) batches with the largest, respectively
// smallest, mu_b(S). Throws UsageError unless every batch is flagged good.
PropertyReport check_properties(const DiscretizedCollection& good,
                                std::span<const double> target,
                                std::span<const BinSubset> subsets,
                                const CorruptionParams& params);

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_CORRUPTION_HPP_
