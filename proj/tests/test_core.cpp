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

#include <cmath>

#include "robust_batches/core.hpp"
#include "robust_batches/error.hpp"
#include "robust_batches/rng.hpp"
#include "test_util.hpp"

namespace robust_batches {
namespace {

using testing::closed;
using testing::counts_collection;
using testing::raw_batch;

TEST(EmpiricalProb, CountsRawSamplesInsideTheUnion) {
  const Batch b = raw_batch(0, {0.1, 0.5, 0.9, 0.3});
  EXPECT_EQ(empirical_prob(b, IntervalUnion({closed(0.0, 0.4)})), 0.5);
  EXPECT_EQ(empirical_prob(b, IntervalUnion()), 0.0);
}

TEST(EmpiricalProb, DiscretizedSubset) {
  const DiscretizedBatch d{{2, 0, 2}};
  EXPECT_EQ(empirical_prob(d, BinSubset{0, 2}), 1.0);
  EXPECT_EQ(empirical_prob(d, BinSubset{}), 0.0);
  EXPECT_EQ(empirical_prob(d, BinSubset{1}), 0.0);
}

TEST(EmpiricalProb, MonotoneAndAdditive) {
  Rng rng(3);
  std::vector<double> xs(50);
  for (auto& x : xs) x = rng.uniform();
  const Batch b = raw_batch(0, xs);
  const IntervalUnion a({closed(0.0, 0.2)});
  const IntervalUnion c({closed(0.5, 0.7)});
  const IntervalUnion both({closed(0.0, 0.2), closed(0.5, 0.7)});
  const IntervalUnion wider({closed(0.0, 0.3)});
  EXPECT_EQ(count_in(b, both), count_in(b, a) + count_in(b, c));
  EXPECT_LE(empirical_prob(b, a), empirical_prob(b, wider));
}

TEST(PooledEmpirical, AveragesBatchMeasures) {
  const auto coll = counts_collection({{1, 1}, {2, 0}});
  const auto p = pooled_empirical(coll, all_indices(2));
  EXPECT_EQ(p, (std::vector<double>{0.75, 0.25}));
  EXPECT_EQ(pooled_empirical(coll, std::vector<std::size_t>{1}),
            (std::vector<double>{1.0, 0.0}));
}

TEST(PooledEmpirical, IdenticalBatchesMatchOne) {
  const auto coll = counts_collection({{3, 1, 4}, {3, 1, 4}, {3, 1, 4}});
  EXPECT_EQ(pooled_empirical(coll, all_indices(3)),
            pooled_empirical(coll, std::vector<std::size_t>{0}));
}

TEST(PooledEmpirical, EmptySubIsUsageError) {
  const auto coll = counts_collection({{1, 1}});
  EXPECT_THROW(pooled_empirical(coll, std::vector<std::size_t>{}), UsageError);
}

TEST(PooledEmpirical, MatchesGrandMeasureOnRawSamples) {
  Rng rng(11);
  std::vector<Batch> batches;
  for (int i = 0; i < 7; ++i) {
    std::vector<double> xs(16);
    for (auto& x : xs) x = rng.uniform();
    batches.push_back(raw_batch(i, xs));
  }
  const BatchCollection coll(batches);
  const IntervalUnion s({closed(0.1, 0.35), closed(0.6, 0.8)});
  std::size_t direct = 0;
  for (const auto& b : batches) {
    for (double x : b.samples) direct += s.contains(x);
  }
  EXPECT_DOUBLE_EQ(pooled_prob(coll, all_indices(7), s),
                   static_cast<double>(direct) / (7.0 * 16.0));
}

TEST(BinomialVariance, Values) {
  EXPECT_DOUBLE_EQ(binomial_variance(0.5, 100), 0.0025);
  EXPECT_EQ(binomial_variance(0.0, 100), 0.0);
  EXPECT_THROW(binomial_variance(1.5, 10), DomainError);
  EXPECT_THROW(binomial_variance(-0.1, 10), DomainError);
}

TEST(BinomialVariance, BoundAndLipschitzProperty) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng.below(500);
    const double r = rng.uniform();
    const double s = rng.uniform();
    const double nn = static_cast<double>(n);
    EXPECT_LE(binomial_variance(r, n), 1.0 / (4.0 * nn) + 1e-18);
    EXPECT_LE(std::abs(binomial_variance(r, n) - binomial_variance(s, n)),
              std::abs(r - s) / nn + 1e-15);
  }
}

TEST(EmpiricalVariance, ConstantIsZeroAndTwoPointIsQuarter) {
  const auto same = counts_collection({{2, 2}, {2, 2}, {2, 2}});
  EXPECT_EQ(empirical_variance(same, all_indices(3), BinSubset{0}), 0.0);
  const auto split = counts_collection({{0, 1}, {1, 0}});
  EXPECT_EQ(empirical_variance(split, all_indices(2), BinSubset{0}), 0.25);
  EXPECT_THROW(empirical_variance(split, std::vector<std::size_t>{}, BinSubset{0}),
               UsageError);
}

TEST(EmpiricalVariance, RawMatchesDiscretized) {
  std::vector<Batch> batches = {raw_batch(0, {0.1, 0.2, 0.9, 0.95}),
                                raw_batch(1, {0.6, 0.7, 0.8, 0.05})};
  const BatchCollection coll(batches);
  const auto d = counts_collection({{2, 2}, {1, 3}});
  EXPECT_DOUBLE_EQ(
      empirical_variance(coll, all_indices(2), IntervalUnion({closed(0.0, 0.5)})),
      empirical_variance(d, all_indices(2), BinSubset{0}));
}

TEST(BatchCollection, Validation) {
  EXPECT_THROW(BatchCollection({}), UsageError);
  EXPECT_THROW(BatchCollection({raw_batch(0, {1.0}), raw_batch(1, {1.0, 2.0})}),
               UsageError);
  EXPECT_THROW(BatchCollection({raw_batch(0, {NAN})}), UsageError);
  EXPECT_THROW(BatchCollection({raw_batch(0, {INFINITY})}), UsageError);
  EXPECT_THROW(BatchCollection({raw_batch(0, {1.0})}, std::vector<Truth>{}), UsageError);
}

TEST(CorruptionParams, ExactFormulas) {
  const CorruptionParams p(0.1, 10000, 500);
  const double l = std::log(6.0 * std::exp(1.0) / 0.1);
  EXPECT_DOUBLE_EQ(p.tau(), 3.0 * std::sqrt(l / 10000.0));
  EXPECT_DOUBLE_EQ(p.kappa_g(), 0.1 * 500.0 * l / 10000.0);
  EXPECT_NEAR(p.tau(), 0.0677, 5e-5);
  EXPECT_DOUBLE_EQ(p.trigger_threshold(), 25.0 * p.kappa_g());
  EXPECT_DOUBLE_EQ(p.stop_threshold(), 20.0 * p.kappa_g());
}

TEST(CorruptionParams, BetaRange) {
  EXPECT_THROW(CorruptionParams(0.0, 10, 10), DomainError);
  EXPECT_THROW(CorruptionParams(0.41, 10, 10), DomainError);
  EXPECT_NO_THROW(CorruptionParams(0.4, 10, 10));
}

}  // namespace
}  // namespace robust_batches
