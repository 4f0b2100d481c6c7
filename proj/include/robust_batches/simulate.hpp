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


// Synthetic targets, adversarial batch generators and ground-truth metrics.
//
// Spec strings (also used on the command line):
//   target: uniform:A,B | gm:W1N(MU1,SD1)+W2N(MU2,SD2)+... |
//           hist:E0,E1,...,EK;M1,...,MK | pp:B0,...,BT;C10,C11,...|C20,...
//   labels: A1:B1,A2:B2,...@ETA_IN,ETA_OUT
//   attack: none | mean_shift:D[@bin|@A:B] | spike:D[@X] | replay_skew:D |
//           label_flip:D@A:B | fk_targeted:D[@K]

#ifndef ROBUST_BATCHES_SIMULATE_HPP_
#define ROBUST_BATCHES_SIMULATE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robust_batches/classify.hpp"
#include "robust_batches/core.hpp"
#include "robust_batches/estimate.hpp"
#include "robust_batches/partition.hpp"
#include "robust_batches/rng.hpp"
#include "robust_batches/sets.hpp"

namespace robust_batches {

// Uniform on the open interval (0, 1); safe for inverse CDFs.
double open_uniform(Rng& rng);

class TargetSpec {
 public:
  enum class Kind { kUniform, kGaussianMixture, kHistogram, kPiecewisePolynomial };

  static TargetSpec uniform(double a, double b);
  static TargetSpec gaussian_mixture(std::vector<double> weights,
                                     std::vector<double> means,
                                     std::vector<double> sds);
  static TargetSpec histogram(std::vector<double> edges,
                              std::vector<double> masses);
  static TargetSpec piecewise(PiecewisePolynomial density);
  // Throws UsageError naming the offending part of the string.
  static TargetSpec parse(const std::string& text);

  Kind kind() const { return kind_; }
  std::string to_string() const;

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;
  double sample(Rng& rng) const;
  // Sample conditioned on the quantile range (u0, u1).
  double sample_between(Rng& rng, double u0, double u1) const;
  std::vector<double> breaks() const;
  DensityFunction density() const;

 private:
  TargetSpec() = default;
  void validate() const;

  Kind kind_ = Kind::kUniform;
  std::vector<double> a_;  // uniform bounds / hist edges / mixture weights
  std::vector<double> b_;  // hist masses / mixture means
  std::vector<double> c_;  // mixture sds
  PiecewisePolynomial poly_;
};

// x from a TargetSpec; P(y = 1 | x) is eta_in on `positive` and eta_out
// elsewhere.
class LabeledTarget {
 public:
  LabeledTarget(TargetSpec x, IntervalUnion positive, double eta_in,
                double eta_out);
  static LabeledTarget parse(const TargetSpec& x, const std::string& text);

  const TargetSpec& x() const { return x_; }
  const IntervalUnion& positive() const { return positive_; }
  double eta(double x) const;
  std::string to_string() const;

  // Exact risk Pr[h(X) != Y].
  double risk(const KIntervalHypothesis& h) const;
  // Smallest risk over unions of at most k intervals.
  double optimal_risk(std::size_t k) const;

 private:
  std::vector<double> cut_points(const KIntervalHypothesis* h) const;

  TargetSpec x_;
  IntervalUnion positive_;
  double eta_in_;
  double eta_out_;
};

struct AttackSpec {
  enum class Kind { kNone, kMeanShift, kSpike, kReplaySkew, kLabelFlip, kFkTargeted };
  Kind kind = Kind::kNone;
  double magnitude = 0.0;
  std::optional<Interval> region;  // mean_shift / label_flip
  std::optional<double> point;     // spike
  std::size_t k = 2;               // fk_targeted

  static AttackSpec parse(const std::string& text);
  std::string to_string() const;
};

struct AttackContext {
  const TargetSpec* target = nullptr;
  const LabeledTarget* labels = nullptr;
  std::size_t n = 0;
  double tau = 0.0;  // per-batch deviation threshold of the cleaner
};

// Samples of `count` adversarial batches that each put just over
// tau * (1 + magnitude) more mass than the good median on k quantile
// intervals of the target.
std::vector<std::vector<double>> attack_fk_targeted(
    std::span<const Batch> good, const TargetSpec& target, std::size_t k,
    std::size_t n, std::size_t count, double tau, double magnitude, Rng& rng);

// The k quantile intervals the targeted attack pushes mass into.
IntervalUnion fk_targeted_region(const TargetSpec& target, std::size_t k);

struct SimulationConfig {
  std::size_t m = 100;
  std::size_t n = 100;
  double beta = 0.1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

std::size_t good_batch_count(std::size_t m, double beta);

// floor((1 - beta) m) good batches from the target, the rest from the
// attack, at deterministically shuffled positions; batch ids are positions.
// Throws DomainError for beta outside [0, 0.4].
BatchCollection build_collection(const TargetSpec& target,
                                 const AttackSpec& attack,
                                 const SimulationConfig& config,
                                 const LabeledTarget* labels = nullptr);

struct SimulationMetrics {
  double retention_good = 0.0;
  std::size_t retained_adversarial = 0;
  double fk_before = 0.0;
  double fk_after = 0.0;
  std::optional<double> tv_fit;
  std::optional<double> excess_risk;
};

// Throws UsageError when the collection carries no truth flags.
SimulationMetrics compute_metrics(const BatchCollection& collection,
                                  std::span<const std::size_t> retained,
                                  const TargetSpec& target,
                                  const IntervalPartition& partition,
                                  std::size_t k,
                                  const PiecewisePolynomial* fit = nullptr,
                                  const KIntervalHypothesis* hypothesis = nullptr,
                                  const LabeledTarget* labels = nullptr);

// Distance from the target to the closest t-piece degree-d density, by
// fitting the target's own masses on `cells` equal-width cells.
double opt_piecewise(const TargetSpec& target, std::size_t t, std::size_t d,
                     std::size_t cells = 1000);

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_SIMULATE_HPP_
