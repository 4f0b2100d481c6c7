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
#include "robust_batches/estimate.hpp"
#include "robust_batches/rng.hpp"
#include "robust_batches/selftest.hpp"
#include "robust_batches/simulate.hpp"

namespace robust_batches {
namespace {

IntervalPartition equal_cells(std::size_t ell) {
  std::vector<double> cuts;
  for (std::size_t j = 1; j < ell; ++j) cuts.push_back(static_cast<double>(j) / ell);
  return IntervalPartition(cuts);
}

TEST(PiecewisePolynomial, Validation) {
  EXPECT_NO_THROW(PiecewisePolynomial({0.0, 1.0}, {{1.0}}));
  EXPECT_THROW(PiecewisePolynomial({0.0, 1.0}, {{1.0}, {1.0}}), UsageError);
  EXPECT_THROW(PiecewisePolynomial({1.0, 0.0}, {{1.0}}), UsageError);
  EXPECT_THROW(PiecewisePolynomial({0.0, 1.0, 2.0}, {{1.0}, {1.0, 0.0}}), UsageError);
}

TEST(PiecewisePolynomial, DensityAndCdf) {
  // 2x on [0, 1] in local coordinates.
  const PiecewisePolynomial p({0.0, 1.0}, {{0.0, 2.0}});
  EXPECT_DOUBLE_EQ(p.density(0.25), 0.5);
  EXPECT_DOUBLE_EQ(p.cdf(0.5), 0.25);
  EXPECT_DOUBLE_EQ(p.total_mass(), 1.0);
  EXPECT_EQ(p.density(-1.0), 0.0);
  EXPECT_EQ(p.cdf(2.0), 1.0);
}

TEST(FitPiecewise, UniformInputGivesConstantOne) {
  const auto part = equal_cells(4);
  const std::vector<double> masses(4, 0.25);
  FitOptions opt;
  const auto r = fit_piecewise(masses, part, 0.0, 1.0, opt);
  EXPECT_EQ(r.fit.pieces(), 1u);
  EXPECT_NEAR(r.fit.density(0.3), 1.0, 1e-12);
  EXPECT_NEAR(evaluate_density(r.fit, TargetSpec::uniform(0.0, 1.0).density()), 0.0, 1e-9);
  EXPECT_FALSE(r.flagged);
}

TEST(FitPiecewise, TwoBinHistogramIsExact) {
  const auto part = equal_cells(2);
  const std::vector<double> masses = {0.75, 0.25};
  FitOptions opt;
  opt.t = 2;
  const auto r = fit_piecewise(masses, part, 0.0, 1.0, opt);
  EXPECT_NEAR(r.fit.density(0.25), 1.5, 1e-12);
  EXPECT_NEAR(r.fit.density(0.75), 0.5, 1e-12);
  EXPECT_NEAR(r.fk_distance, 0.0, 1e-12);
}

TEST(FitPiecewise, HistogramReproducedWhenPiecesEqualCells) {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t ell = 2 + rng.below(8);
    const auto masses = dyadic_distribution(rng, ell);
    FitOptions opt;
    opt.t = ell;
    const auto r = fit_piecewise(masses, equal_cells(ell), 0.0, 1.0, opt);
    EXPECT_NEAR(fk_distance(r.fit.cell_masses(equal_cells(ell)), masses, 1), 0.0, 1e-9);
  }
}

TEST(FitPiecewise, OutputIsNormalizedAndNonnegative) {
  Rng rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t ell = 20;
    const auto masses = dyadic_distribution(rng, ell);
    FitOptions opt;
    opt.t = 3;
    opt.d = 2;
    const auto r = fit_piecewise(masses, equal_cells(ell), 0.0, 1.0, opt);
    EXPECT_NEAR(r.fit.total_mass(), 1.0, 1e-6);
    EXPECT_GE(r.fit.min_check_value(), -1e-9);
    EXPECT_LE(r.fit.pieces(), 3u);
    EXPECT_EQ(r.fit.degree(), 2u);
  }
}

TEST(FitPiecewise, Errors) {
  const auto part = equal_cells(4);
  const std::vector<double> masses(4, 0.25);
  FitOptions opt;
  opt.t = 0;
  EXPECT_THROW(fit_piecewise(masses, part, 0.0, 1.0, opt), UsageError);
  opt.t = 1;
  opt.d = 9;
  EXPECT_THROW(fit_piecewise(masses, part, 0.0, 1.0, opt), UsageError);
  opt.d = 0;
  EXPECT_THROW(fit_piecewise(masses, part, 1.0, 0.0, opt), UsageError);
  const std::vector<double> bad = {0.5, 0.5, 0.5, 0.5};
  EXPECT_THROW(fit_piecewise(bad, part, 0.0, 1.0, opt), DomainError);
}

TEST(YatracosSelect, Examples) {
  const std::vector<double> ref = {0.25, 0.25, 0.5};
  const std::vector<std::vector<double>> two = {ref, {1.0, 0.0, 0.0}};
  EXPECT_EQ(yatracos_select(two, ref, 1), 0u);
  const std::vector<std::vector<double>> swapped = {{1.0, 0.0, 0.0}, ref};
  EXPECT_EQ(yatracos_select(swapped, ref, 1), 1u);
  const std::vector<std::vector<double>> one = {{1.0, 0.0, 0.0}};
  EXPECT_EQ(yatracos_select(one, ref, 1), 0u);
  EXPECT_THROW(yatracos_select(std::vector<std::vector<double>>{}, ref, 1), UsageError);
}

TEST(EvaluateDensity, Examples) {
  const PiecewisePolynomial unit({0.0, 1.0}, {{1.0}});
  EXPECT_NEAR(evaluate_density(unit, TargetSpec::uniform(0.0, 1.0).density()), 0.0, 1e-12);
  EXPECT_NEAR(evaluate_density(unit, TargetSpec::uniform(0.5, 1.5).density()), 0.5, 1e-12);
  EXPECT_NEAR(evaluate_density(unit, TargetSpec::uniform(2.0, 3.0).density()), 1.0, 1e-12);
}

TEST(EvaluateDensity, SmoothTarget) {
  // Linear density 2x against uniform: TV = 1/4.
  const PiecewisePolynomial ramp({0.0, 1.0}, {{0.0, 2.0}});
  EXPECT_NEAR(evaluate_density(ramp, TargetSpec::uniform(0.0, 1.0).density()), 0.25, 1e-10);
}

TEST(CheckPoints, ChebyshevLobatto) {
  const auto pts = check_points(5);
  ASSERT_EQ(pts.size(), 5u);
  EXPECT_NEAR(pts.front(), 0.0, 1e-15);
  EXPECT_NEAR(pts.back(), 1.0, 1e-15);
  EXPECT_NEAR(pts[2], 0.5, 1e-15);
}

}  // namespace
}  // namespace robust_batches
