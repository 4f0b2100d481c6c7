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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "robust_batches/distance.hpp"
#include "robust_batches/error.hpp"
#include "robust_batches/io.hpp"
#include "robust_batches/partition.hpp"
#include "robust_batches/simulate.hpp"

namespace robust_batches {
namespace {

SimulationConfig config(std::size_t m, std::size_t n, double beta, std::uint64_t seed) {
  SimulationConfig c;
  c.m = m;
  c.n = n;
  c.beta = beta;
  c.seed = seed;
  return c;
}

TEST(TargetSpec, ParseRoundTrip) {
  for (const std::string s : {"uniform:0,1", "gm:0.5N(0,1)+0.5N(3,0.5)", "hist:0,1,3;0.25,0.75",
                              "pp:0,0.5,1;0.5,1|1.25,0"}) {
    const auto t = TargetSpec::parse(s);
    const auto again = TargetSpec::parse(t.to_string());
    EXPECT_EQ(again.to_string(), t.to_string());
    for (double x : {-1.0, 0.2, 0.5, 0.9, 2.0}) EXPECT_EQ(again.cdf(x), t.cdf(x)) << s;
  }
  EXPECT_THROW(TargetSpec::parse("nope:1"), UsageError);
  EXPECT_THROW(TargetSpec::parse("uniform:1,0"), UsageError);
}

TEST(TargetSpec, QuantileInvertsCdf) {
  for (const std::string s : {"uniform:-1,2", "gm:0.3N(0,1)+0.7N(4,2)", "hist:0,1,3;0.25,0.75"}) {
    const auto t = TargetSpec::parse(s);
    for (double u : {0.01, 0.25, 0.5, 0.8, 0.99}) EXPECT_NEAR(t.cdf(t.quantile(u)), u, 1e-9) << s;
  }
}

TEST(AttackSpec, ParseRoundTrip) {
  for (const std::string s : {"none", "mean_shift:0.3@bin", "mean_shift:1@0.2:0.3", "spike:0.5@2",
                              "replay_skew:0.4", "label_flip:1@0.25:0.35", "fk_targeted:0.5@2"}) {
    EXPECT_EQ(AttackSpec::parse(s).to_string(), s);
  }
  EXPECT_THROW(AttackSpec::parse("mean_shift:2"), UsageError);
  EXPECT_THROW(AttackSpec::parse("label_flip:1"), UsageError);
}

TEST(BuildCollection, Split) {
  EXPECT_EQ(good_batch_count(10, 0.4), 6u);
  const auto c = build_collection(TargetSpec::uniform(0, 1), AttackSpec::parse("spike:1"),
                                  config(10, 5, 0.4, 1));
  const auto& t = *c.truth();
  EXPECT_EQ(std::count(t.begin(), t.end(), Truth::kGood), 6);
  const auto none = build_collection(TargetSpec::uniform(0, 1), AttackSpec::parse("spike:1"),
                                     config(10, 5, 0.0, 1));
  EXPECT_EQ(std::count(none.truth()->begin(), none.truth()->end(), Truth::kGood), 10);
  EXPECT_THROW(build_collection(TargetSpec::uniform(0, 1), AttackSpec{}, config(10, 5, 0.5, 1)),
               DomainError);
}

TEST(BuildCollection, ByteIdenticalPerSeedAndThreadCount) {
  auto dump = [](std::uint64_t seed, std::size_t threads) {
    auto cfg = config(50, 20, 0.2, seed);
    cfg.threads = threads;
    const auto c = build_collection(TargetSpec::parse("gm:0.5N(0,1)+0.5N(3,0.5)"),
                                    AttackSpec::parse("mean_shift:0.3@bin"), cfg);
    std::ostringstream os;
    write_batches(os, c);
    return os.str();
  };
  EXPECT_EQ(dump(7, 1), dump(7, 1));
  EXPECT_EQ(dump(7, 1), dump(7, 4));
  EXPECT_NE(dump(7, 1), dump(8, 1));
}

TEST(BuildCollection, MeanShiftMovesAboutBetaDeltaInF1) {
  const auto target = TargetSpec::uniform(0.0, 1.0);
  const auto attack = AttackSpec::parse("mean_shift:0.3@bin");
  const std::size_t cells = 2000;
  std::vector<double> cuts;
  for (std::size_t j = 1; j < cells; ++j) cuts.push_back(static_cast<double>(j) / cells);
  const IntervalPartition part(cuts);
  const std::vector<double> truth(cells, 1.0 / cells);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto c = build_collection(target, attack, config(1000, 100, 0.2, seed));
    std::vector<double> pooled(cells, 0.0);
    for (std::size_t i = 0; i < c.m(); ++i) {
      for (double x : c.batch(i).samples) pooled[part.bin_of(x)] += 1.0 / (1000.0 * 100.0);
    }
    // Attack mass lands in [q(0.5), q(0.51)], so the shift is 0.2*0.3*0.99.
    const double expected = 0.2 * 0.3 * 0.99;
    const double sd = 1.0 / std::sqrt(1000.0 * 100.0);
    EXPECT_NEAR(fk_distance(pooled, truth, 1), expected, 3.0 * sd) << seed;
  }
}

TEST(AttackFkTargeted, EachBatchDeviatesAboveTau) {
  const auto target = TargetSpec::uniform(0.0, 1.0);
  const auto good_coll = build_collection(target, AttackSpec{}, config(200, 400, 0.0, 2));
  std::vector<Batch> good;
  for (std::size_t i = 0; i < good_coll.m(); ++i) good.push_back(good_coll.batch(i));
  const auto region = fk_targeted_region(target, 2);
  EXPECT_EQ(region.size(), 2u);
  const double tau = 0.1;
  Rng rng(1);
  EXPECT_TRUE(attack_fk_targeted(good, target, 2, 400, 0, tau, 0.5, rng).empty());
  const auto bad = attack_fk_targeted(good, target, 2, 400, 30, tau, 0.5, rng);
  ASSERT_EQ(bad.size(), 30u);
  std::vector<double> fracs;
  for (const auto& b : good) fracs.push_back(static_cast<double>(count_in(b, region)) / 400.0);
  std::sort(fracs.begin(), fracs.end());
  const double med = 0.5 * (fracs[99] + fracs[100]);
  for (const auto& b : bad) {
    ASSERT_EQ(b.size(), 400u);
    std::size_t in = 0;
    for (double x : b) in += region.contains(x);
    EXPECT_GT(static_cast<double>(in) / 400.0 - med, tau);
  }
}

TEST(ComputeMetrics, Examples) {
  const auto target = TargetSpec::uniform(0.0, 1.0);
  const auto c = build_collection(target, AttackSpec::parse("spike:1"), config(20, 50, 0.2, 3));
  SubCollection good;
  for (std::size_t i = 0; i < c.m(); ++i) {
    if ((*c.truth())[i] == Truth::kGood) good.push_back(i);
  }
  const IntervalPartition part({0.25, 0.5, 0.75});
  const PiecewisePolynomial fit({0.0, 1.0}, {{1.0}});
  const auto r = compute_metrics(c, good, target, part, 2, &fit);
  EXPECT_EQ(r.retention_good, 1.0);
  EXPECT_EQ(r.retained_adversarial, 0u);
  ASSERT_TRUE(r.tv_fit.has_value());
  EXPECT_NEAR(*r.tv_fit, 0.0, 1e-12);
  EXPECT_GT(r.fk_before, r.fk_after);
  const BatchCollection bare({c.batch(0), c.batch(1)});
  EXPECT_THROW(compute_metrics(bare, all_indices(2), target, part, 1), UsageError);
}

TEST(OptPiecewise, UniformIsRepresentable) {
  EXPECT_NEAR(opt_piecewise(TargetSpec::uniform(0.0, 1.0), 1, 0), 0.0, 1e-7);
  EXPECT_GT(opt_piecewise(TargetSpec::parse("gm:1N(0,1)"), 1, 0), 0.1);
}

}  // namespace
}  // namespace robust_batches
