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

#include "robust_batches/clean.hpp"
#include "robust_batches/corruption.hpp"
#include "robust_batches/error.hpp"
#include "robust_batches/partition.hpp"
#include "robust_batches/simulate.hpp"
#include "test_util.hpp"

namespace robust_batches {
namespace {

using testing::counts_collection;

DiscretizedCollection outliers(std::size_t m, std::size_t bad, std::uint32_t hot) {
  std::vector<std::vector<std::uint32_t>> rows(m, {5000, 5000});
  for (std::size_t i = 0; i < bad; ++i) rows[i] = {hot, 10000 - hot};
  return counts_collection(rows);
}

TEST(MedianProb, Examples) {
  const auto odd = counts_collection({{1, 9}, {5, 5}, {9, 1}});
  EXPECT_EQ(median_prob(odd, all_indices(3), BinSubset{0}), 0.5);
  const auto even = counts_collection({{2, 8}, {4, 6}, {6, 4}, {8, 2}});
  EXPECT_EQ(median_prob(even, all_indices(4), BinSubset{0}), 0.5);
  const auto flat = counts_collection({{3, 7}, {3, 7}});
  EXPECT_DOUBLE_EQ(median_prob(flat, all_indices(2), BinSubset{0}), 0.3);
  EXPECT_THROW(median_prob(flat, std::vector<std::size_t>{}, BinSubset{0}), UsageError);
}

TEST(TwiceMedian, IntegerForEvenCounts) {
  const std::vector<std::uint32_t> c = {3, 1, 4, 2};
  EXPECT_EQ(twice_median(c), 5u);
  const std::vector<std::uint32_t> d = {7, 1, 4};
  EXPECT_EQ(twice_median(d), 8u);
}

TEST(CorruptionBatch, Examples) {
  const CorruptionParams p(0.1, 10000, 100);
  EXPECT_NEAR(p.tau(), 0.0677, 5e-5);
  const DiscretizedBatch at{{5000, 5000}};
  const DiscretizedBatch off{{6000, 4000}};
  EXPECT_EQ(corruption_batch(at, BinSubset{0}, 0.5, p), 0.0);
  EXPECT_NEAR(corruption_batch(off, BinSubset{0}, 0.5, p), 0.01, 1e-15);
  EXPECT_EQ(corruption_score(p.tau(), 0.0, p), 0.0);
  EXPECT_GT(corruption_score(std::nextafter(p.tau(), 1.0), 0.0, p), 0.0);
}

TEST(CorruptionBatch, ZeroOnBallNonnegativeOutside) {
  const CorruptionParams p(0.2, 400, 100);
  for (int i = 0; i <= 1000; ++i) {
    const double mu = i / 1000.0;
    const double s = corruption_score(mu, 0.5, p);
    EXPECT_GE(s, 0.0);
    if (std::abs(mu - 0.5) <= p.tau()) EXPECT_EQ(s, 0.0);
    else EXPECT_DOUBLE_EQ(s, (mu - 0.5) * (mu - 0.5));
  }
}

TEST(CorruptionCollection, Examples) {
  const CorruptionParams p(0.1, 10000, 20);
  const auto none = outliers(20, 0, 5000);
  EXPECT_EQ(corruption_collection(none, all_indices(20), BinSubset{0}, p).total, 0.0);
  const auto one = outliers(20, 1, 7000);
  const auto r = corruption_collection(one, all_indices(20), BinSubset{0}, p);
  EXPECT_NEAR(r.total, 0.04, 1e-12);
  EXPECT_EQ(r.median, 0.5);
  EXPECT_EQ(r.batch_ids.size(), 20u);
}

TEST(CorruptionCollection, ComplementScoresIdentically) {
  const CorruptionParams p(0.2, 1000, 5);
  const auto c = counts_collection(
      {{700, 100, 200}, {300, 300, 400}, {333, 333, 334}, {100, 800, 100}, {500, 0, 500}});
  const std::vector<std::uint32_t> in = {700, 300, 333, 100, 500};
  const std::vector<std::uint32_t> out = {300, 700, 667, 900, 500};
  EXPECT_EQ(corruption_total(in, 1000, p), corruption_total(out, 1000, p));
  EXPECT_EQ(corruption_collection(c, all_indices(5), BinSubset{0}, p).total,
            corruption_collection(c, all_indices(5), BinSubset{1, 2}, p).total);
}

TEST(CorruptionCollection, RemovingBatchesNeverIncreasesScoreAtFixedMedian) {
  Rng rng(12);
  const CorruptionParams p(0.2, 100, 30);
  std::vector<std::vector<std::uint32_t>> rows;
  for (int i = 0; i < 30; ++i) {
    const auto a = static_cast<std::uint32_t>(rng.below(101));
    rows.push_back({a, 100 - a});
  }
  const auto c = counts_collection(rows);
  auto sub = all_indices(30);
  const double med = median_prob(c, sub, BinSubset{0});
  auto total = [&](const SubCollection& s) {
    double t = 0;
    for (auto i : s) t += corruption_batch(c.batch(i), BinSubset{0}, med, p);
    return t;
  };
  while (!sub.empty()) {
    const double before = total(sub);
    sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(rng.below(sub.size())));
    EXPECT_LE(total(sub), before);
  }
}

TEST(BatchDeletion, AllZeroReturnsInput) {
  const CorruptionParams p(0.1, 10000, 20);
  const auto c = outliers(20, 0, 5000);
  Rng rng(1);
  EXPECT_EQ(batch_deletion(c, all_indices(20), BinSubset{0}, 0.5, p, rng), all_indices(20));
}

TEST(BatchDeletion, SingleHotBatchIsRemoved) {
  const CorruptionParams p(0.1, 10000, 20);
  ASSERT_GE(0.04, p.stop_threshold());
  const auto c = outliers(20, 1, 7000);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto out = batch_deletion(c, all_indices(20), BinSubset{0}, 0.5, p, rng);
    ASSERT_EQ(out.size(), 19u);
    EXPECT_EQ(out.front(), 1u);
  }
}

TEST(BatchDeletion, TerminatesAndEndsBelowStop) {
  const CorruptionParams p(0.2, 10000, 20);
  const auto c = outliers(20, 4, 7000);
  Rng rng(3);
  const auto out = batch_deletion(c, all_indices(20), BinSubset{0}, 0.5, p, rng);
  double t = 0;
  for (auto i : out) t += corruption_batch(c.batch(i), BinSubset{0}, 0.5, p);
  EXPECT_LT(t, p.stop_threshold());
  EXPECT_GE(out.size(), 16u);
  Rng again(3);
  EXPECT_EQ(out, batch_deletion(c, all_indices(20), BinSubset{0}, 0.5, p, again));
}

TEST(CleanOverCover, EmptyCoverReturnsInput) {
  const CorruptionParams p(0.2, 10000, 20);
  const auto c = outliers(20, 4, 7000);
  Rng rng(0);
  EXPECT_EQ(clean_over_cover(c, std::vector<BinSubset>{}, p, rng), all_indices(20));
}

TEST(CleanOverCover, OneHotSubsetMatchesBatchDeletion) {
  const CorruptionParams p(0.2, 10000, 20);
  const auto c = outliers(20, 4, 7000);
  const std::vector<BinSubset> cover = {BinSubset{0}};
  Rng a(9);
  Rng b(9);
  const double med = median_prob(c, all_indices(20), BinSubset{0});
  EXPECT_EQ(clean_over_cover(c, cover, p, a),
            batch_deletion(c, all_indices(20), BinSubset{0}, med, p, b));
}

TEST(CheckProperties, RefusesAdversarialOrUnflagged) {
  const CorruptionParams p(0.1, 100, 2);
  const std::vector<double> target = {0.5, 0.5};
  const std::vector<BinSubset> subsets = {BinSubset{0}};
  const auto unflagged = counts_collection({{50, 50}, {50, 50}});
  EXPECT_THROW(check_properties(unflagged, target, subsets, p), UsageError);
  const auto mixed = counts_collection({{50, 50}, {90, 10}},
                                       std::vector<Truth>{Truth::kGood, Truth::kAdversarial});
  EXPECT_THROW(check_properties(mixed, target, subsets, p), UsageError);
}

TEST(CheckProperties, SelfConsistentAtLargeN) {
  const std::size_t n = 1000000;
  std::vector<std::vector<std::uint32_t>> rows(8, {250000, 250000, 500000});
  rows[0] = {250100, 249900, 500000};
  const auto c = counts_collection(rows, std::vector<Truth>(8, Truth::kGood));
  const std::vector<double> target = {0.25, 0.25, 0.5};
  const std::vector<BinSubset> subsets = {BinSubset{0}, BinSubset{1}, BinSubset{2}};
  const auto r = check_properties(c, target, subsets, CorruptionParams(0.1, n, 8));
  EXPECT_TRUE(r.all_hold());
  for (const auto& s : r.subsets) EXPECT_LT(s.median_error, 1e-3);
}

TEST(CheckProperties, UniformTargetPassesInMostSeeds) {
  const std::size_t ell = 20;
  std::vector<double> cuts;
  for (std::size_t j = 1; j < ell; ++j) cuts.push_back(static_cast<double>(j) / ell);
  const IntervalPartition part(cuts);
  const auto target = TargetSpec::uniform(0.0, 1.0);
  const auto masses = cell_masses([&](double x) { return target.cdf(x); }, part);
  const CorruptionParams params(0.1, 100, 500);
  int passes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SimulationConfig cfg;
    cfg.m = 500;
    cfg.n = 100;
    cfg.beta = 0.0;
    cfg.seed = seed;
    const auto coll = build_collection(target, AttackSpec{}, cfg);
    const auto disc = discretize(coll, part);
    Rng rng(derive_seed(seed, 77));
    std::vector<BinSubset> subsets;
    for (int i = 0; i < 100; ++i) {
      std::vector<std::size_t> members;
      for (std::size_t j = 0; j < ell; ++j) {
        if (rng.below(2)) members.push_back(j);
      }
      subsets.emplace_back(members);
    }
    passes += check_properties(disc, masses, subsets, params).all_hold();
  }
  EXPECT_GE(passes, 18);
}

TEST(Impossibility, TriggerNeedsDeviationAboveFiveRootLOverN) {
  // psi >= 25 kappa_G with beta*m batches at common deviation e needs
  // e^2 >= 25 L / n.
  for (double beta : {0.05, 0.1, 0.2, 0.4}) {
    for (std::size_t n : {100u, 1000u, 10000u}) {
      const std::size_t m = 1000;
      const CorruptionParams p(beta, n, m);
      const double l = std::log(6.0 * std::exp(1.0) / beta);
      const double need = 5.0 * std::sqrt(l / static_cast<double>(n));
      const double bad = beta * static_cast<double>(m);
      EXPECT_NEAR(bad * need * need, p.trigger_threshold(), 1e-9 * p.trigger_threshold());
      EXPECT_GT(need, p.tau());
    }
  }
}

}  // namespace
}  // namespace robust_batches
