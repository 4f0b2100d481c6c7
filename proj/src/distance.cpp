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

#include "robust_batches/distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "robust_batches/error.hpp"

namespace robust_batches {
namespace {

struct Score {
  double value = 0.0;
  std::uint32_t penalty = 0;
};

class ScoreOrder {
 public:
  explicit ScoreOrder(double eps) : eps_(eps) {}

  bool better(const Score& a, const Score& b) const {
    if (a.value > b.value + eps_) return true;
    if (b.value > a.value + eps_) return false;
    return a.penalty < b.penalty;
  }

 private:
  double eps_;
};

double sum_over(std::span<const double> d, const BinSubset& s) {
  double acc = 0.0;
  for (auto i : s.members()) acc += d[i];
  return acc;
}

}  // namespace

RunSelection max_weight_runs(std::span<const double> weights, std::size_t k,
                             RunTieBreak tie) {
  const std::size_t len = weights.size();
  if (k == 0 || len == 0) return {};
  k = std::min(k, (len + 1) / 2);

  double scale = 1.0;
  for (double w : weights) scale += std::abs(w);
  const ScoreOrder order(1e-12 * scale);
  const std::uint32_t per_element = tie == RunTieBreak::kFewestElements ? 1 : 0;
  const std::uint32_t per_run = tie == RunTieBreak::kFewestRuns ? 1 : 0;

  // best[i][j][s]: optimum over positions i..len-1 having opened j runs so far,
  // where s says whether position i-1 was selected.
  const std::size_t states = (k + 1) * 2;
  std::vector<Score> best((len + 1) * states);
  auto at = [&](std::size_t i, std::size_t j, std::size_t s) -> Score& {
    return best[i * states + j * 2 + s];
  };
  auto include = [&](std::size_t i, std::size_t j, std::size_t s,
                     bool& allowed) -> Score {
    allowed = s == 1 || j < k;
    if (!allowed) return {};
    const std::size_t next_j = s == 1 ? j : j + 1;
    Score sc = at(i + 1, next_j, 1);
    sc.value += weights[i];
    sc.penalty += per_element + (s == 1 ? 0 : per_run);
    return sc;
  };

  for (std::size_t i = len; i-- > 0;) {
    for (std::size_t j = 0; j <= k; ++j) {
      for (std::size_t s = 0; s < 2; ++s) {
        const Score skip = at(i + 1, j, 0);
        bool allowed = false;
        const Score take = include(i, j, s, allowed);
        at(i, j, s) = (allowed && !order.better(skip, take)) ? take : skip;
      }
    }
  }

  // Forward pass: take position i whenever skipping it is not strictly
  // better, which yields the leftmost / lexicographically smallest optimum.
  std::vector<std::size_t> chosen;
  std::size_t j = 0;
  std::size_t s = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const Score skip = at(i + 1, j, 0);
    bool allowed = false;
    const Score take = include(i, j, s, allowed);
    if (allowed && !order.better(skip, take)) {
      if (s == 0) ++j;
      s = 1;
      chosen.push_back(i);
    } else {
      s = 0;
    }
  }
  RunSelection out;
  out.members = BinSubset(std::move(chosen));
  out.value = sum_over(weights, out.members);
  return out;
}

WitnessedDistance best_k_interval_union(std::span<const double> d,
                                        std::size_t k) {
  if (k == 0) throw UsageError("best_k_interval_union: k must be >= 1");
  std::vector<double> neg(d.begin(), d.end());
  for (auto& x : neg) x = -x;
  const RunSelection pos = max_weight_runs(d, k);
  const RunSelection nega = max_weight_runs(neg, k);

  double scale = 1.0;
  for (double x : d) scale += std::abs(x);
  const double eps = 1e-12 * scale;
  bool take_pos;
  if (pos.value > nega.value + eps) {
    take_pos = true;
  } else if (nega.value > pos.value + eps) {
    take_pos = false;
  } else if (pos.members.size() != nega.members.size()) {
    take_pos = pos.members.size() < nega.members.size();
  } else {
    take_pos = !(nega.members < pos.members);
  }
  const RunSelection& pick = take_pos ? pos : nega;
  return {std::abs(sum_over(d, pick.members)), pick.members};
}

void require_distribution(std::span<const double> v, const char* what,
                          double tolerance) {
  double total = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < -tolerance) {
      throw DomainError(std::string(what) + ": entries must be finite and >= 0");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > tolerance) {
    throw DomainError(std::string(what) + ": entries must sum to 1 (got " +
                      std::to_string(total) + ")");
  }
}

namespace {

std::vector<double> difference(std::span<const double> p,
                               std::span<const double> q, std::size_t k) {
  if (p.size() != q.size()) {
    throw DomainError("fk_distance: p and q must have the same length");
  }
  if (k == 0) throw UsageError("fk_distance: k must be >= 1");
  require_distribution(p, "fk_distance(p)");
  require_distribution(q, "fk_distance(q)");
  std::vector<double> d(p.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = p[i] - q[i];
  return d;
}

}  // namespace

WitnessedDistance fk_witness(std::span<const double> p,
                             std::span<const double> q, std::size_t k) {
  const auto d = difference(p, q, k);
  return best_k_interval_union(d, k);
}

double fk_distance(std::span<const double> p, std::span<const double> q,
                   std::size_t k) {
  return fk_witness(p, q, k).value;
}

double fk_distance_brute(std::span<const double> p, std::span<const double> q,
                         std::size_t k) {
  if (p.size() > 20) {
    throw UsageError("fk_distance_brute: refusing ell > 20 (2^ell subsets)");
  }
  const auto d = difference(p, q, k);
  const std::size_t ell = d.size();
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << ell); ++mask) {
    std::size_t runs = 0;
    double acc = 0.0;
    bool prev = false;
    for (std::size_t i = 0; i < ell; ++i) {
      const bool in = (mask >> i) & 1u;
      if (in) {
        acc += d[i];
        if (!prev) ++runs;
      }
      prev = in;
    }
    if (runs <= k) best = std::max(best, std::abs(acc));
  }
  return best;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw DomainError("tv_distance: p and q must have the same length");
  }
  require_distribution(p, "tv_distance(p)");
  require_distribution(q, "tv_distance(q)");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

}  // namespace robust_batches
