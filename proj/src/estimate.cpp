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


#include "robust_batches/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "robust_batches/distance.hpp"
#include "robust_batches/error.hpp"
#include "robust_batches/parallel.hpp"

namespace robust_batches {

PiecewisePolynomial::PiecewisePolynomial(
    std::vector<double> breakpoints,
    std::vector<std::vector<double>> coefficients)
    : breakpoints_(std::move(breakpoints)),
      coefficients_(std::move(coefficients)) {
  if (coefficients_.empty() ||
      breakpoints_.size() != coefficients_.size() + 1) {
    throw UsageError(
        "PiecewisePolynomial: need t >= 1 pieces and t + 1 breakpoints");
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (!std::isfinite(breakpoints_[i]) ||
        (i > 0 && !(breakpoints_[i - 1] < breakpoints_[i]))) {
      throw UsageError(
          "PiecewisePolynomial: breakpoints must be finite and increasing");
    }
  }
  const std::size_t len = coefficients_.front().size();
  for (const auto& c : coefficients_) {
    if (c.empty() || c.size() != len) {
      throw UsageError(
          "PiecewisePolynomial: every piece needs the same number of "
          "coefficients");
    }
    for (double v : c) {
      if (!std::isfinite(v)) {
        throw UsageError("PiecewisePolynomial: coefficients must be finite");
      }
    }
  }
}

namespace {

double horner(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

}  // namespace

double PiecewisePolynomial::density(double x) const {
  if (!(x >= lo() && x <= hi())) return 0.0;
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  std::size_t j = static_cast<std::size_t>(it - breakpoints_.begin());
  j = std::min(j == 0 ? 0 : j - 1, pieces() - 1);
  return horner(coefficients_[j], x - breakpoints_[j]);
}

double PiecewisePolynomial::piece_integral(std::size_t j, double width) const {
  // Antiderivative of sum c_i y^i at y = width.
  const auto& c = coefficients_[j];
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) {
    acc = acc * width + c[i] / static_cast<double>(i + 1);
  }
  return acc * width;
}

double PiecewisePolynomial::cdf(double x) const {
  if (x <= lo()) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < pieces(); ++j) {
    const double left = breakpoints_[j];
    const double right = breakpoints_[j + 1];
    if (x >= right) {
      acc += piece_integral(j, right - left);
    } else {
      acc += piece_integral(j, x - left);
      break;
    }
  }
  return acc;
}

std::vector<double> PiecewisePolynomial::cell_masses(
    const IntervalPartition& partition) const {
  std::vector<double> out(partition.ell());
  double prev = 0.0;
  const auto& cuts = partition.boundaries();
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    const double at = cdf(cuts[j]);
    out[j] = at - prev;
    prev = at;
  }
  out.back() = total_mass() - prev;
  return out;
}

std::vector<double> check_points(std::size_t count) {
  if (count < 2) return {0.5};
  std::vector<double> u(count);
  for (std::size_t i = 0; i < count; ++i) {
    u[i] = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(count - 1)));
  }
  return u;
}

double PiecewisePolynomial::min_check_value() const {
  const auto u = check_points();
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pieces(); ++j) {
    const double w = breakpoints_[j + 1] - breakpoints_[j];
    for (double v : u) lowest = std::min(lowest, horner(coefficients_[j], v * w));
  }
  return lowest;
}

namespace {

struct Cell {
  double left;
  double right;
  double mass;
};

struct PieceFit {
  std::vector<double> coefficients;  // in (x - left)
  double l1 = 0.0;
  bool nonnegative = true;
};

// min 0.5 x'Hx - g'x  s.t.  e'x = total,  C x >= 0, by a primal active-set
// method started from the constant density (strictly feasible).
Eigen::VectorXd solve_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                         const Eigen::VectorXd& e, double total,
                         const Eigen::MatrixXd& c) {
  const Eigen::Index nv = h.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nv);
  if (!(total > 0.0)) return x;
  x(0) = total / e(0);
  if (nv == 1) return x;

  std::vector<Eigen::Index> active;
  const double tol = 1e-13;
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::Index rows = 1 + static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nv + rows, nv + rows);
    kkt.topLeftCorner(nv, nv) = h;
    Eigen::MatrixXd a(rows, nv);
    a.row(0) = e.transpose();
    for (std::size_t r = 0; r < active.size(); ++r) {
      a.row(static_cast<Eigen::Index>(r) + 1) = c.row(active[r]);
    }
    kkt.topRightCorner(nv, rows) = a.transpose();
    kkt.bottomLeftCorner(rows, nv) = a;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + rows);
    rhs.head(nv) = -(h * x - g);
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    const Eigen::VectorXd p = sol.head(nv);
    const Eigen::VectorXd mu = sol.tail(rows);

    if (p.norm() <= 1e-12 * (1.0 + x.norm())) {
      // Multipliers of the active inequalities are -mu; drop the most
      // negative one, or stop when all are nonnegative.
      Eigen::Index drop = -1;
      double worst = -tol;
      for (std::size_t r = 0; r < active.size(); ++r) {
        const double lambda = -mu(static_cast<Eigen::Index>(r) + 1);
        if (lambda < worst) {
          worst = lambda;
          drop = static_cast<Eigen::Index>(r);
        }
      }
      if (drop < 0) break;
      active.erase(active.begin() + drop);
      continue;
    }
    double alpha = 1.0;
    Eigen::Index block = -1;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      const double cp = c.row(i).dot(p);
      if (cp < 0.0) {
        const double ratio = std::max(0.0, -c.row(i).dot(x) / cp);
        if (ratio < alpha) {
          alpha = ratio;
          block = i;
        }
      }
    }
    x += alpha * p;
    if (block >= 0) active.push_back(block);
  }
  return x;
}

PieceFit fit_piece(std::span<const Cell> cells, std::size_t d,
                   const Eigen::MatrixXd& check_basis) {
  const double left = cells.front().left;
  const double width = cells.back().right - left;
  const auto nv = static_cast<Eigen::Index>(d + 1);
  const auto rows = static_cast<Eigen::Index>(cells.size());

  // Mass of u^i over a cell in local coordinates u = (x - left) / width.
  Eigen::MatrixXd a(rows, nv);
  Eigen::VectorXd y(rows);
  double total = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& cell = cells[static_cast<std::size_t>(r)];
    const double u0 = (cell.left - left) / width;
    const double u1 = (cell.right - left) / width;
    double p0 = u0;
    double p1 = u1;
    for (Eigen::Index i = 0; i < nv; ++i) {
      a(r, i) = width * (p1 - p0) / static_cast<double>(i + 1);
      p0 *= u0;
      p1 *= u1;
    }
    y(r) = cell.mass;
    total += cell.mass;
  }
  Eigen::VectorXd e(nv);
  for (Eigen::Index i = 0; i < nv; ++i) e(i) = width / static_cast<double>(i + 1);

  Eigen::MatrixXd h = a.transpose() * a;
  const double ridge = 1e-12 * (h.trace() / static_cast<double>(nv) + 1e-300);
  h.diagonal().array() += ridge;
  const Eigen::VectorXd g = a.transpose() * y;
  const Eigen::VectorXd x = solve_qp(h, g, e, total, check_basis);

  PieceFit out;
  out.coefficients.resize(d + 1);
  double scale = 1.0;
  for (std::size_t i = 0; i <= d; ++i) {
    out.coefficients[i] = x(static_cast<Eigen::Index>(i)) / scale;
    scale *= width;
  }
  out.l1 = (a * x - y).cwiseAbs().sum();
  const double floor = -1e-9 * std::max(1.0, x.cwiseAbs().maxCoeff());
  out.nonnegative = (check_basis * x).minCoeff() >= floor;
  return out;
}

std::vector<std::size_t> breakpoint_grid(std::size_t cells, std::size_t limit) {
  std::vector<std::size_t> grid;
  if (cells <= limit || limit < 2) {
    for (std::size_t i = 0; i <= cells; ++i) grid.push_back(i);
    return grid;
  }
  for (std::size_t i = 0; i <= limit; ++i) {
    const std::size_t idx = (i * cells + limit / 2) / limit;
    if (grid.empty() || grid.back() < idx) grid.push_back(idx);
  }
  return grid;
}

}  // namespace

FitResult fit_piecewise(std::span<const double> masses,
                        const IntervalPartition& partition, double lo,
                        double hi, const FitOptions& options) {
  const std::size_t t = options.t;
  const std::size_t d = options.d;
  const std::size_t ell = partition.ell();
  if (t == 0) throw UsageError("fit_piecewise: t must be >= 1");
  if (d > kMaxDegree) throw UsageError("fit_piecewise: degree is capped at 8");
  if (masses.size() != ell) {
    throw UsageError("fit_piecewise: one mass per partition cell is required");
  }
  if (ell < 2 * t * d) {
    throw UsageError("fit_piecewise: need ell >= 2td partition cells");
  }
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw UsageError("fit_piecewise: support must satisfy lo < hi");
  }
  const auto& cuts = partition.boundaries();
  if (!cuts.empty() && (lo > cuts.front() || hi < cuts.back())) {
    throw UsageError("fit_piecewise: support must contain every cut point");
  }
  require_distribution(masses, "fit_piecewise(masses)", 1e-6);

  // Finite cells; zero-width cells hand their mass to a neighbour.
  std::vector<double> edges;
  edges.push_back(lo);
  edges.insert(edges.end(), cuts.begin(), cuts.end());
  edges.push_back(hi);
  std::vector<Cell> cells;
  double carry = 0.0;
  for (std::size_t j = 0; j < ell; ++j) {
    if (edges[j + 1] > edges[j]) {
      cells.push_back({edges[j], edges[j + 1], masses[j] + carry});
      carry = 0.0;
    } else {
      carry += masses[j];
    }
  }
  if (carry != 0.0) cells.back().mass += carry;

  FitResult result;
  if (cells.size() < ell) {
    std::ostringstream msg;
    msg << ell - cells.size() << " zero-width cell(s) merged into neighbours";
    result.notes.push_back(msg.str());
  }

  Eigen::MatrixXd check_basis(static_cast<Eigen::Index>(kCheckPoints),
                              static_cast<Eigen::Index>(d + 1));
  const auto u = check_points();
  for (std::size_t r = 0; r < u.size(); ++r) {
    double p = 1.0;
    for (std::size_t i = 0; i <= d; ++i) {
      check_basis(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = p;
      p *= u[r];
    }
  }

  const auto grid = breakpoint_grid(cells.size(), options.grid_limit);
  const std::size_t g = grid.size();
  // fits[a * g + b]: piece covering grid[a]..grid[b].
  std::vector<PieceFit> fits(g * g);
  const bool single = t == 1;
  parallel_for(g - 1, options.threads, [&](std::size_t a) {
    for (std::size_t b = a + 1; b < g; ++b) {
      if (single && (a != 0 || b != g - 1)) continue;
      fits[a * g + b] = fit_piece(
          std::span<const Cell>(cells).subspan(grid[a], grid[b] - grid[a]), d,
          check_basis);
    }
  });

  // cost[p][b]: best p-piece cover of grid[0]..grid[b].
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(t + 1, std::vector<double>(g, inf));
  std::vector<std::vector<std::size_t>> from(t + 1, std::vector<std::size_t>(g, 0));
  cost[0][0] = 0.0;
  for (std::size_t p = 1; p <= t; ++p) {
    for (std::size_t b = 1; b < g; ++b) {
      if (single && b != g - 1) continue;
      for (std::size_t a = 0; a < b; ++a) {
        if (cost[p - 1][a] == inf) continue;
        const double c = cost[p - 1][a] + fits[a * g + b].l1;
        if (c < cost[p][b]) {
          cost[p][b] = c;
          from[p][b] = a;
        }
      }
    }
  }
  std::size_t best_p = 0;
  for (std::size_t p = 1; p <= t; ++p) {
    // Fewer pieces unless more pieces help beyond rounding.
    if (cost[p][g - 1] == inf) continue;
    if (best_p == 0 || cost[p][g - 1] < cost[best_p][g - 1] - 1e-12) best_p = p;
  }

  std::vector<std::size_t> cut_idx{g - 1};
  for (std::size_t p = best_p, b = g - 1; p > 0; --p) {
    b = from[p][b];
    cut_idx.push_back(b);
  }
  std::reverse(cut_idx.begin(), cut_idx.end());
  std::vector<double> breakpoints;
  std::vector<std::vector<double>> coefficients;
  bool nonnegative = true;
  for (std::size_t i = 0; i + 1 < cut_idx.size(); ++i) {
    const auto& piece = fits[cut_idx[i] * g + cut_idx[i + 1]];
    breakpoints.push_back(cells[grid[cut_idx[i]]].left);
    coefficients.push_back(piece.coefficients);
    nonnegative = nonnegative && piece.nonnegative;
  }
  breakpoints.push_back(cells.back().right);
  result.fit = PiecewisePolynomial(std::move(breakpoints), std::move(coefficients));
  result.l1_mass_error = cost[best_p][g - 1];

  const double mass = result.fit.total_mass();
  if (!nonnegative) {
    result.flagged = true;
    result.notes.push_back("density negative at a check point beyond 1e-9");
  }
  if (std::abs(mass - 1.0) > 1e-6) {
    result.flagged = true;
    std::ostringstream msg;
    msg << "fitted density integrates to " << mass;
    result.notes.push_back(msg.str());
  }
  auto fitted = result.fit.cell_masses(partition);
  // Rounding can leave tiny negatives or a sum a hair off 1.
  double sum = 0.0;
  for (auto& v : fitted) {
    v = std::max(0.0, v);
    sum += v;
  }
  for (auto& v : fitted) v /= sum;
  result.fk_distance =
      fk_distance(fitted, std::vector<double>(masses.begin(), masses.end()),
                  std::max<std::size_t>(1, 2 * t * d));
  return result;
}

std::size_t yatracos_select(std::span<const std::vector<double>> candidates,
                            std::span<const double> reference, std::size_t k) {
  if (candidates.empty()) throw UsageError("yatracos_select: no candidates");
  if (k == 0) throw UsageError("yatracos_select: k must be >= 1");
  const std::size_t ell = reference.size();
  for (const auto& c : candidates) {
    if (c.size() != ell) {
      throw UsageError("yatracos_select: candidate length differs from reference");
    }
  }
  std::vector<BinSubset> witnesses;
  std::vector<double> diff(ell);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      for (std::size_t b = 0; b < ell; ++b) {
        diff[b] = candidates[i][b] - candidates[j][b];
      }
      witnesses.push_back(best_k_interval_union(diff, k).witness);
    }
  }
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double score = 0.0;
    for (const auto& w : witnesses) {
      double acc = 0.0;
      for (auto b : w.members()) acc += candidates[i][b] - reference[b];
      score = std::max(score, std::abs(acc));
    }
    if (score < best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

DensityFunction as_density(const PiecewisePolynomial& p) {
  return {[p](double x) { return p.density(x); },
          [p](double x) { return p.cdf(x); }, p.breakpoints()};
}

double evaluate_density(const PiecewisePolynomial& fit,
                        const DensityFunction& target) {
  std::vector<double> splits = fit.breakpoints();
  for (double b : target.breaks) {
    if (b > fit.lo() && b < fit.hi()) splits.push_back(b);
  }
  std::sort(splits.begin(), splits.end());
  splits.erase(std::unique(splits.begin(), splits.end()), splits.end());

  using boost::math::quadrature::gauss_kronrod;
  double inside = 0.0;
  for (std::size_t i = 0; i + 1 < splits.size(); ++i) {
    const double a = splits[i];
    const double b = splits[i + 1];
    // Evaluate the fit through the piece owning the open interval so that
    // endpoint values do not leak across a jump.
    const double mid = 0.5 * (a + b);
    auto piece = std::upper_bound(fit.breakpoints().begin(),
                                  fit.breakpoints().end(), mid) -
                 fit.breakpoints().begin() - 1;
    const auto& coeffs = fit.coefficients()[static_cast<std::size_t>(piece)];
    const double left = fit.breakpoints()[static_cast<std::size_t>(piece)];
    auto integrand = [&](double x) {
      return std::abs(horner(coeffs, x - left) - target.pdf(x));
    };
    inside += gauss_kronrod<double, 61>::integrate(integrand, a, b, 15, 1e-10);
  }
  const double outside =
      std::clamp(target.cdf(fit.lo()), 0.0, 1.0) +
      std::clamp(1.0 - target.cdf(fit.hi()), 0.0, 1.0);
  return std::min(1.0, 0.5 * (inside + outside));
}

}  // namespace robust_batches
