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


// Binary classifiers whose positive region is a union of at most k
// intervals: risk, exact empirical risk minimization, and the robust
// pipeline that cleans labeled batches before fitting.

#ifndef ROBUST_BATCHES_CLASSIFY_HPP_
#define ROBUST_BATCHES_CLASSIFY_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robust_batches/core.hpp"
#include "robust_batches/detect.hpp"
#include "robust_batches/partition.hpp"
#include "robust_batches/rng.hpp"
#include "robust_batches/sets.hpp"

namespace robust_batches {

struct LabeledSample {
  double x = 0.0;
  std::uint8_t y = 0;
  double weight = 1.0;
};

class KIntervalHypothesis {
 public:
  KIntervalHypothesis() = default;
  explicit KIntervalHypothesis(IntervalUnion region)
      : region_(std::move(region)) {}

  const IntervalUnion& region() const { return region_; }
  std::uint8_t predict(double x) const { return region_.contains(x) ? 1 : 0; }

  bool operator==(const KIntervalHypothesis&) const = default;

 private:
  IntervalUnion region_;
};

// Weighted fraction of samples with h(x) != y. Throws DomainError unless
// weights are nonnegative and sum to 1 (within 1e-9).
double risk(const KIntervalHypothesis& h, std::span<const LabeledSample> data);

struct ErmResult {
  KIntervalHypothesis hypothesis;
  double loss = 0.0;
};

// Exact minimizer of weighted risk over unions of <= k intervals. Samples
// sharing an x value are grouped; region endpoints sit at midpoints between
// consecutive distinct x values (unbounded at the extremes). Ties prefer
// fewer intervals, then the leftmost choice.
ErmResult erm_k_intervals(std::span<const LabeledSample> data, std::size_t k);

// Exhaustive version over all unions of runs of distinct x values; refuses
// more than 20 distinct values.
ErmResult erm_k_intervals_brute(std::span<const LabeledSample> data,
                                std::size_t k);

// Finite-domain helpers: a joint distribution over {0..ell-1} x {0,1} is
// stored as mass[2 * i + y]; a hypothesis is a bit mask over the ell points.
std::vector<std::uint32_t> k_interval_masks(std::size_t ell, std::size_t k);
double discrete_risk(std::span<const double> joint, std::uint32_t mask);
// max over masks h, z, y of |p({h = z} x {y}) - q({h = z} x {y})|.
double hypothesis_family_distance(std::span<const double> p,
                                  std::span<const double> q, std::size_t k);

struct RelativeLossCheck {
  double excess = 0.0;        // r_p(h*(q)) - min_h r_p(h)
  double max_risk_gap = 0.0;  // max_h |r_p(h) - r_q(h)|
  double distance = 0.0;      // hypothesis_family_distance(p, q, k)
};
// Throws UsageError for ell > 16.
RelativeLossCheck relative_loss_brute(std::span<const double> p,
                                      std::span<const double> q,
                                      std::size_t k);

struct ClassifyOptions {
  std::size_t k = 2;
  double beta = 0.1;
  DetectorOptions detector;
  double trigger_multiple = CorruptionParams::kDefaultTrigger;
  double stop_multiple = CorruptionParams::kDefaultStop;
  bool clean = true;  // false: plain ERM on every batch
};

struct ClassifyReport {
  std::vector<std::int64_t> retained_ids;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  double beta = 0.0;
  double tau = 0.0;
  double kappa_g = 0.0;
  std::size_t ell_label0 = 0;
  std::size_t ell_label1 = 0;
  std::vector<CleaningRound> rounds;
  double final_score = 0.0;
  double empirical_loss = 0.0;
  std::optional<double> retention_good;
  std::vector<std::string> warnings;
};

struct ClassifyResult {
  KIntervalHypothesis hypothesis;
  SubCollection retained;
  ClassifyReport report;
};

// Builds one partition per label slice, cleans over the joint 2-slice
// domain, and runs ERM on the retained samples with equal weights. Throws
// UsageError for unlabeled input and DomainError for beta outside (0, 0.4].
ClassifyResult robust_classify(const BatchCollection& collection,
                               const ClassifyOptions& options, Rng& rng);

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_CLASSIFY_HPP_
