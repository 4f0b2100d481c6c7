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

#include "robust_batches/distance.hpp"
#include "robust_batches/error.hpp"
#include "robust_batches/rng.hpp"
#include "robust_batches/selftest.hpp"

namespace robust_batches {
namespace {

TEST(FkDistance, Examples) {
  const std::vector<double> p = {0.5, 0.3, 0.2};
  const std::vector<double> q = {0.2, 0.3, 0.5};
  EXPECT_NEAR(fk_distance(p, q, 1), 0.3, 1e-15);
  EXPECT_EQ(fk_distance(p, p, 2), 0.0);
  EXPECT_EQ(fk_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}, 1), 1.0);
}

TEST(FkDistance, Errors) {
  const std::vector<double> p = {0.5, 0.6};
  const std::vector<double> q = {0.5, 0.5};
  EXPECT_THROW(fk_distance(p, q, 1), DomainError);
  EXPECT_THROW(fk_distance(q, std::vector<double>{1.0}, 1), DomainError);
  EXPECT_THROW(fk_distance(q, q, 0), UsageError);
  EXPECT_THROW(fk_distance_brute(std::vector<double>(21, 1.0 / 21),
                                 std::vector<double>(21, 1.0 / 21), 1),
               UsageError);
}

TEST(BestKIntervalUnion, Examples) {
  const auto a = best_k_interval_union(std::vector<double>{0.1, -0.2, 0.3, -0.1, 0.2}, 2);
  EXPECT_NEAR(a.value, 0.5, 1e-15);
  EXPECT_EQ(a.witness, (BinSubset{2, 4}));
  const auto zero = best_k_interval_union(std::vector<double>(4, 0.0), 2);
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_TRUE(zero.witness.empty());
  const auto neg = best_k_interval_union(std::vector<double>{-0.4, 0.1, -0.4}, 2);
  EXPECT_NEAR(neg.value, 0.8, 1e-15);
  EXPECT_EQ(neg.witness, (BinSubset{0, 2}));
}

TEST(BestKIntervalUnion, SymmetricUnderNegation) {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> d(1 + rng.below(15));
    for (auto& v : d) v = rng.uniform(-1, 1);
    auto neg = d;
    for (auto& v : neg) v = -v;
    const std::size_t k = 1 + rng.below(4);
    EXPECT_DOUBLE_EQ(best_k_interval_union(d, k).value,
                     best_k_interval_union(neg, k).value);
  }
}

TEST(FkDistance, MatchesBruteExactlyOnDyadicInstances) {
  const auto r = suite_fk_oracle(2024, 500);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(FkDistance, MetricMonotoneAndTvLimit) {
  Rng rng(9);
  for (int i = 0; i < 300; ++i) {
    const std::size_t ell = 1 + rng.below(10);
    const auto p = dyadic_distribution(rng, ell);
    const auto q = dyadic_distribution(rng, ell);
    const auto r = dyadic_distribution(rng, ell);
    for (std::size_t k = 1; k <= 4; ++k) {
      EXPECT_EQ(fk_distance(p, q, k), fk_distance(q, p, k));
      EXPECT_LE(fk_distance(p, r, k), fk_distance(p, q, k) + fk_distance(q, r, k) + 1e-15);
      EXPECT_LE(fk_distance(p, q, k), fk_distance(p, q, k + 1));
      EXPECT_EQ(fk_distance(p, q, k), fk_distance_brute(p, q, k));
    }
    const std::size_t big = (ell + 1) / 2;
    EXPECT_DOUBLE_EQ(fk_distance(p, q, big), tv_distance(p, q));
  }
}

TEST(FkDistance, SingleBinIsZero) {
  EXPECT_EQ(fk_distance_brute(std::vector<double>{1.0}, std::vector<double>{1.0}, 1), 0.0);
}

TEST(TvDistance, Examples) {
  EXPECT_EQ(tv_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 1.0);
  EXPECT_EQ(tv_distance(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}), 0.0);
  EXPECT_NEAR(tv_distance(std::vector<double>{0.7, 0.3}, std::vector<double>{0.5, 0.5}),
              0.2, 1e-15);
}

TEST(MaxWeightRuns, FewestRunsTieBreak) {
  // Taking {0,1,2} in one run and {0},{2} in two runs both sum to 2.
  const std::vector<double> w = {1.0, 0.0, 1.0};
  const auto runs = max_weight_runs(w, 2, RunTieBreak::kFewestRuns);
  EXPECT_EQ(runs.value, 2.0);
  EXPECT_EQ(runs.members.run_count(), 1u);
  const auto elems = max_weight_runs(w, 2, RunTieBreak::kFewestElements);
  EXPECT_EQ(elems.members, (BinSubset{0, 2}));
}

}  // namespace
}  // namespace robust_batches
