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


// Piecewise-polynomial densities fitted to binned probability masses.
//
// Pieces start and end at partition edges. Each piece is fitted by least
// squares against the observed bin masses, with its total mass pinned to the
// observed mass and the density kept nonnegative at check points; a dynamic
// program then picks at most t pieces minimizing the summed L1 mass error.

#ifndef ROBUST_BATCHES_ESTIMATE_HPP_
#define ROBUST_BATCHES_ESTIMATE_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "robust_batches/partition.hpp"

namespace robust_batches {

inline constexpr std::size_t kMaxDegree = 8;
inline constexpr std::size_t kCheckPoints = 64;

// Density given piecewise by polynomials in (x - left breakpoint), zero
// outside [breakpoints.front(), breakpoints.back()].
class PiecewisePolynomial {
 public:
  PiecewisePolynomial() = default;
  // Throws UsageError unless breakpoints strictly increase, there is one
  // coefficient list per piece, and every list has the same length.
  PiecewisePolynomial(std::vector<double> breakpoints,
                      std::vector<std::vector<double>> coefficients);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<std::vector<double>>& coefficients() const {
    return coefficients_;
  }
  std::size_t pieces() const { return coefficients_.size(); }
  std::size_t degree() const {
    return coefficients_.empty() ? 0 : coefficients_.front().size() - 1;
  }
  double lo() const { return breakpoints_.front(); }
  double hi() const { return breakpoints_.back(); }

  double density(double x) const;
  // Integral of the density over (-inf, x].
  double cdf(double x) const;
  double total_mass() const { return cdf(hi()); }
  // Masses of the partition cells.
  std::vector<double> cell_masses(const IntervalPartition& partition) const;
  // Smallest density value over the check points of every piece.
  double min_check_value() const;

  bool operator==(const PiecewisePolynomial&) const = default;

 private:
  double piece_integral(std::size_t j, double width) const;

  std::vector<double> breakpoints_;
  std::vector<std::vector<double>> coefficients_;
};

// Chebyshev-Lobatto points on [0, 1].
std::vector<double> check_points(std::size_t count = kCheckPoints);

struct FitOptions {
  std::size_t t = 1;
  std::size_t d = 0;
  // Candidate breakpoints: every partition edge when there are at most this
  // many cells, otherwise this many evenly spaced edges.
  std::size_t grid_limit = 128;
  std::size_t threads = 1;
};

struct FitResult {
  PiecewisePolynomial fit;
  double fk_distance = 0.0;  // to the input masses, k = 2td
  double l1_mass_error = 0.0;
  bool flagged = false;      // nonnegativity or normalization off tolerance
  std::vector<std::string> notes;
};

// Fits a density with at most t pieces of degree d to `masses` over
// `partition`; the outer cells are closed off at lo and hi. Throws
// UsageError when d > 8, t == 0, lo >= hi, or ell < 2td.
FitResult fit_piecewise(std::span<const double> masses,
                        const IntervalPartition& partition, double lo,
                        double hi, const FitOptions& options);

// Index of the candidate whose largest discrepancy with `reference` over the
// pairwise witness sets of candidate differences is smallest; ties go to the
// lowest index. Throws UsageError for an empty list.
std::size_t yatracos_select(std::span<const std::vector<double>> candidates,
                            std::span<const double> reference, std::size_t k);

struct DensityFunction {
  std::function<double(double)> pdf;
  std::function<double(double)> cdf;
  // Points where the pdf may jump or kink; integration splits there.
  std::vector<double> breaks;
};

DensityFunction as_density(const PiecewisePolynomial& p);

// TV distance between the fit and a target density: half the integral of
// |fit - target| over the fit's support plus half the target mass outside it.
double evaluate_density(const PiecewisePolynomial& fit,
                        const DensityFunction& target);

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_ESTIMATE_HPP_
