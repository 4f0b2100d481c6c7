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
#include <set>

#include "robust_batches/clean.hpp"
#include "robust_batches/error.hpp"
#include "robust_batches/simulate.hpp"

namespace robust_batches {
namespace {

BatchCollection make(double beta, const std::string& attack, std::uint64_t seed,
                     std::size_t m = 500, std::size_t n = 100) {
  SimulationConfig cfg;
  cfg.m = m;
  cfg.n = n;
  cfg.beta = beta;
  cfg.seed = seed;
  return build_collection(TargetSpec::uniform(0.0, 1.0), AttackSpec::parse(attack), cfg);
}

TEST(RobustCleanFk, RefusesBetaAboveBound) {
  const auto c = make(0.0, "none", 1, 20, 10);
  CleanOptions opt;
  opt.beta = 0.5;
  Rng rng(0);
  try {
    robust_clean_fk(c, opt, rng);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("0.4"), std::string::npos);
  }
  opt.beta = 0.0;
  EXPECT_THROW(robust_clean_fk(c, opt, rng), DomainError);
  opt.beta = 0.2;
  opt.k = 0;
  EXPECT_THROW(robust_clean_fk(c, opt, rng), UsageError);
}

TEST(RobustCleanFk, AllGoodKeepsEverythingInMostSeeds) {
  int full = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = make(0.0, "none", seed);
    CleanOptions opt;
    opt.beta = 0.2;
    Rng rng(seed);
    full += robust_clean_fk(c, opt, rng).retained.size() == c.m();
  }
  EXPECT_GE(full, 18);
}

TEST(RobustCleanFk, RetainedIsSubsetAndDeterministic) {
  const auto c = make(0.2, "mean_shift:1@bin", 3, 300, 400);
  CleanOptions opt;
  opt.beta = 0.2;
  Rng a(5);
  Rng b(5);
  const auto ra = robust_clean_fk(c, opt, a);
  const auto rb = robust_clean_fk(c, opt, b);
  EXPECT_EQ(ra.retained, rb.retained);
  EXPECT_EQ(ra.report.retained_ids, rb.report.retained_ids);
  const std::set<std::size_t> uniq(ra.retained.begin(), ra.retained.end());
  EXPECT_EQ(uniq.size(), ra.retained.size());
  for (auto i : ra.retained) EXPECT_LT(i, c.m());
  EXPECT_TRUE(std::is_sorted(ra.retained.begin(), ra.retained.end()));
}

TEST(RobustCleanFk, ThreadCountDoesNotChangeResult) {
  const auto c = make(0.2, "mean_shift:1@bin", 4, 300, 400);
  CleanOptions one;
  one.beta = 0.2;
  CleanOptions four = one;
  four.detector.threads = 4;
  Rng a(1);
  Rng b(1);
  EXPECT_EQ(robust_clean_fk(c, one, a).retained, robust_clean_fk(c, four, b).retained);
}

TEST(RobustCleanFk, ReportsReferenceDistances) {
  const auto target = TargetSpec::uniform(0.0, 1.0);
  const auto c = make(0.2, "mean_shift:1@bin", 6, 300, 400);
  CleanOptions opt;
  opt.beta = 0.2;
  Rng rng(2);
  const auto r = robust_clean_fk(c, opt, rng, [&](double x) { return target.cdf(x); });
  ASSERT_TRUE(r.report.fk_before.has_value());
  ASSERT_TRUE(r.report.fk_after.has_value());
  ASSERT_TRUE(r.report.retention_good.has_value());
  EXPECT_LT(*r.report.fk_after, *r.report.fk_before);
  EXPECT_FALSE(r.report.rounds.empty());
  EXPECT_EQ(r.report.retained_ids.size(), r.retained.size());
  EXPECT_EQ(r.report.ell, r.report.partition.ell());
}

TEST(RobustCleanFk, VacuousAttackStaysNearGoodOnlyBaseline) {
  const auto target = TargetSpec::uniform(0.0, 1.0);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = make(0.2, "mean_shift:0@bin", seed);
    CleanOptions opt;
    opt.beta = 0.2;
    Rng rng(seed);
    const auto r = robust_clean_fk(c, opt, rng);
    SubCollection good;
    for (std::size_t i = 0; i < c.m(); ++i) {
      if ((*c.truth())[i] == Truth::kGood) good.push_back(i);
    }
    const auto base = compute_metrics(c, good, target, r.report.partition, 2);
    const auto after = compute_metrics(c, r.retained, target, r.report.partition, 2);
    ok += after.fk_after <= 2.0 * base.fk_after;
  }
  EXPECT_GE(ok, 18);
}

TEST(RecommendedBatches, Formula) {
  EXPECT_NEAR(recommended_batches(1, 100, 0.5, 0.1),
              (std::log(200.0) + std::log(10.0)) * 10.0 / 0.125, 1e-9);
}

TEST(CellMasses, UniformCells) {
  const IntervalPartition p({0.25, 0.5});
  const auto m = cell_masses([](double x) { return std::clamp(x, 0.0, 1.0); }, p);
  EXPECT_EQ(m, (std::vector<double>{0.25, 0.25, 0.5}));
}

}  // namespace
}  // namespace robust_batches
