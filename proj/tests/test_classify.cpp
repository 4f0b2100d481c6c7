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


#include <gtest/gtest.h>

#include "robust_batches/classify.hpp"
#include "robust_batches/error.hpp"
#include "robust_batches/selftest.hpp"
#include "robust_batches/simulate.hpp"
#include "test_util.hpp"

namespace robust_batches {
namespace {

using testing::closed;

std::vector<LabeledSample> example() {
  return {{1, 1, 0.25}, {2, 0, 0.25}, {3, 1, 0.25}, {4, 1, 0.25}};
}

TEST(Risk, Examples) {
  const auto data = example();
  EXPECT_DOUBLE_EQ(risk(KIntervalHypothesis(IntervalUnion({closed(3, 4)})), data), 0.25);
  const KIntervalHypothesis perfect(IntervalUnion({closed(1, 1), closed(3, 4)}));
  EXPECT_EQ(risk(perfect, data), 0.0);
  Interval lo = closed(-Interval::kInf, 1);
  lo.hi_closed = false;
  Interval mid = closed(1, 3);
  mid.lo_closed = mid.hi_closed = false;
  Interval hi = closed(4, Interval::kInf);
  hi.lo_closed = false;
  const KIntervalHypothesis complement(IntervalUnion({lo, mid, hi}));
  EXPECT_EQ(risk(complement, data), 1.0);
  std::vector<LabeledSample> bad = {{1, 1, 0.5}};
  EXPECT_THROW(risk(perfect, bad), DomainError);
}

TEST(ErmKIntervals, Examples) {
  const auto data = example();
  EXPECT_DOUBLE_EQ(erm_k_intervals(data, 1).loss, 0.25);
  EXPECT_EQ(erm_k_intervals(data, 2).loss, 0.0);
  const auto r1 = erm_k_intervals(data, 1);
  EXPECT_DOUBLE_EQ(risk(r1.hypothesis, data), 0.25);
  std::vector<LabeledSample> zeros = {{1, 0, 0.5}, {2, 0, 0.5}};
  const auto z = erm_k_intervals(zeros, 2);
  EXPECT_TRUE(z.hypothesis.region().empty());
  EXPECT_EQ(z.loss, 0.0);
}

TEST(ErmKIntervals, MatchesExhaustiveSearch) {
  const auto r = suite_erm_oracle(99, 500);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(ErmKIntervals, LossNonIncreasingInK) {
  Rng rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const auto data = dyadic_labeled_samples(rng, 1 + rng.below(12));
    double prev = 2.0;
    for (std::size_t k = 1; k <= 4; ++k) {
      const double loss = erm_k_intervals(data, k).loss;
      EXPECT_LE(loss, prev);
      prev = loss;
    }
  }
}

TEST(RelativeLoss, ExcessAndRiskGapBounds) {
  const auto r = suite_relative_loss(7, 500);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(RelativeLoss, IdenticalDistributionsHaveNoExcess) {
  const std::vector<double> p = {0.1, 0.2, 0.3, 0.1, 0.2, 0.1};
  const auto r = relative_loss_brute(p, p, 1);
  EXPECT_EQ(r.excess, 0.0);
  EXPECT_EQ(r.distance, 0.0);
}

TEST(KIntervalMasks, Counts) {
  // Unions of at most one interval over 3 bins: empty plus 6 intervals.
  EXPECT_EQ(k_interval_masks(3, 1).size(), 7u);
  EXPECT_EQ(k_interval_masks(3, 2).size(), 8u);
}

BatchCollection labeled(double beta, const std::string& attack, std::uint64_t seed) {
  const auto x = TargetSpec::uniform(0.0, 1.0);
  const auto labels = LabeledTarget::parse(x, "0.2:0.4,0.6:0.8@0.85,0.15");
  SimulationConfig cfg;
  cfg.m = 200;
  cfg.n = 100;
  cfg.beta = beta;
  cfg.seed = seed;
  return build_collection(x, AttackSpec::parse(attack), cfg, &labels);
}

TEST(RobustClassify, NoAttackMatchesPlainErm) {
  const auto c = labeled(0.0, "none", 3);
  ClassifyOptions opt;
  opt.beta = 0.2;
  Rng rng(0);
  const auto r = robust_classify(c, opt, rng);
  ASSERT_TRUE(r.report.rounds.empty());
  std::vector<LabeledSample> all;
  const double w = 1.0 / static_cast<double>(c.m() * c.n());
  for (std::size_t i = 0; i < c.m(); ++i) {
    const auto& b = c.batch(i);
    for (std::size_t j = 0; j < b.samples.size(); ++j) all.push_back({b.samples[j], b.labels[j], w});
  }
  const auto plain = erm_k_intervals(all, 2);
  EXPECT_EQ(r.hypothesis, plain.hypothesis);
  EXPECT_DOUBLE_EQ(r.report.empirical_loss, plain.loss);
}

TEST(RobustClassify, RequiresLabels) {
  SimulationConfig cfg;
  cfg.m = 20;
  cfg.n = 10;
  cfg.beta = 0.0;
  const auto c = build_collection(TargetSpec::uniform(0, 1), AttackSpec{}, cfg);
  Rng rng(0);
  EXPECT_THROW(robust_classify(c, ClassifyOptions{}, rng), UsageError);
}

TEST(LabeledTarget, AnalyticRisk) {
  const auto x = TargetSpec::uniform(0.0, 1.0);
  const auto labels = LabeledTarget::parse(x, "0.2:0.4,0.6:0.8@0.85,0.15");
  const KIntervalHypothesis bayes(IntervalUnion({closed(0.2, 0.4), closed(0.6, 0.8)}));
  EXPECT_NEAR(labels.risk(bayes), 0.15, 1e-12);
  EXPECT_NEAR(labels.optimal_risk(2), 0.15, 1e-12);
  EXPECT_NEAR(labels.risk(KIntervalHypothesis()), 0.4 * 0.85 + 0.6 * 0.15, 1e-12);
}

}  // namespace
}  // namespace robust_batches
