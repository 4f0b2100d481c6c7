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


#include "robust_batches/detect.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "robust_batches/corruption.hpp"
#include "robust_batches/error.hpp"
#include "robust_batches/parallel.hpp"

namespace robust_batches {
namespace {

BinSubset subset_of_mask(std::uint32_t mask) {
  std::vector<std::size_t> members;
  for (std::size_t j = 0; mask != 0; ++j, mask >>= 1) {
    if (mask & 1u) members.push_back(j);
  }
  return BinSubset(std::move(members));
}

// Lexicographic order of the sorted member lists of two masks.
bool mask_less(std::uint32_t a, std::uint32_t b) {
  if (a == b) return false;
  const int low = std::countr_zero(a ^ b);
  // The set holding the lowest differing bin is smaller, unless the other
  // set has nothing beyond that bin (then the other one is its prefix).
  const bool a_has = (a >> low) & 1u;
  const std::uint32_t other = a_has ? b : a;
  const bool other_continues = low < 31 && (other >> (low + 1)) != 0;
  return a_has == other_continues;
}

bool better(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.subset < b.subset;
}

}  // namespace

Detection max_corruption_subset_brute(const DiscretizedCollection& collection,
                                      std::span<const std::size_t> sub,
                                      const CorruptionParams& params) {
  const std::size_t ell = collection.ell();
  if (ell > kMaxBruteEll) {
    throw UsageError("max_corruption_subset_brute: refusing ell = " +
                     std::to_string(ell) + " > 20 (2^ell subsets)");
  }
  if (sub.empty()) throw UsageError("max_corruption_subset_brute: empty sub");

  // Gray-code walk: each step toggles one bin, so per-batch counts update in
  // O(|sub|).
  std::vector<std::uint32_t> counts(sub.size(), 0);
  std::uint32_t best_mask = 0;
  double best = corruption_total(counts, collection.n(), params);
  std::uint32_t gray = 0;
  const std::uint32_t total = 1u << ell;
  for (std::uint32_t i = 1; i < total; ++i) {
    const int bit = std::countr_zero(i);
    gray ^= 1u << bit;
    const bool added = (gray >> bit) & 1u;
    for (std::size_t r = 0; r < sub.size(); ++r) {
      const auto c = collection.batch(sub[r]).counts[static_cast<std::size_t>(bit)];
      counts[r] = added ? counts[r] + c : counts[r] - c;
    }
    const double score = corruption_total(counts, collection.n(), params);
    if (score > best || (score == best && mask_less(gray, best_mask))) {
      best = score;
      best_mask = gray;
    }
  }
  return {subset_of_mask(best_mask), best};
}

Detection max_corruption_subset_heuristic(
    const DiscretizedCollection& collection, std::span<const std::size_t> sub,
    const CorruptionParams& params, const DetectorOptions& options) {
  const std::size_t ell = collection.ell();
  const std::size_t rows = sub.size();
  if (rows == 0) throw UsageError("max_corruption_subset_heuristic: empty sub");
  const double n = static_cast<double>(collection.n());

  Eigen::MatrixXd y(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(ell));
  std::vector<std::uint32_t> column(rows);
  for (std::size_t j = 0; j < ell; ++j) {
    for (std::size_t r = 0; r < rows; ++r) {
      column[r] = collection.batch(sub[r]).counts[j];
    }
    const double med = median_of_counts(column, collection.n());
    for (std::size_t r = 0; r < rows; ++r) {
      y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          static_cast<double>(column[r]) / n - med;
    }
  }

  // Power iteration on Y^T Y without forming it.
  Rng rng(derive_seed(options.seed, 0x5eed));
  Eigen::VectorXd v(static_cast<Eigen::Index>(ell));
  for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.uniform() - 0.5;
  if (v.norm() == 0.0) v.setOnes();
  v.normalize();
  for (std::size_t it = 0; it < options.power_iterations; ++it) {
    Eigen::VectorXd w = y.transpose() * (y * v);
    const double norm = w.norm();
    if (!(norm > 0.0)) break;
    v = w / norm;
  }

  const std::size_t budget =
      options.candidates == 0 ? ell : std::min(options.candidates, ell);
  std::vector<std::size_t> order(ell);
  std::iota(order.begin(), order.end(), std::size_t{0});

  // Task 0/1: prefixes of bins sorted by +v / -v. Tasks 2..: singletons.
  std::vector<Detection> results(2 + ell);
  parallel_for(results.size(), options.threads, [&](std::size_t task) {
    Detection best;
    best.score = -1.0;
    std::vector<std::uint32_t> counts(rows, 0);
    if (task < 2) {
      const double sign = task == 0 ? 1.0 : -1.0;
      std::vector<std::size_t> sorted = order;
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](std::size_t a, std::size_t b) {
                         return sign * v(static_cast<Eigen::Index>(a)) >
                                sign * v(static_cast<Eigen::Index>(b));
                       });
      std::vector<std::size_t> prefix;
      for (std::size_t len = 1; len <= budget; ++len) {
        const std::size_t bin = sorted[len - 1];
        prefix.push_back(bin);
        for (std::size_t r = 0; r < rows; ++r) {
          counts[r] += collection.batch(sub[r]).counts[bin];
        }
        Detection cand{BinSubset(prefix),
                       corruption_total(counts, collection.n(), params)};
        if (best.score < 0.0 || better(cand, best)) best = std::move(cand);
      }
    } else {
      const std::size_t bin = task - 2;
      for (std::size_t r = 0; r < rows; ++r) {
        counts[r] = collection.batch(sub[r]).counts[bin];
      }
      best = {BinSubset{bin}, corruption_total(counts, collection.n(), params)};
    }
    results[task] = std::move(best);
  });

  Detection best{BinSubset{}, 0.0};  // the empty set always scores 0
  for (auto& r : results) {
    if (r.score >= 0.0 && better(r, best)) best = std::move(r);
  }
  return best;
}

Detection detect(const DiscretizedCollection& collection,
                 std::span<const std::size_t> sub,
                 const CorruptionParams& params,
                 const DetectorOptions& options) {
  if (options.kind == DetectorKind::kBrute) {
    return max_corruption_subset_brute(collection, sub, params);
  }
  return max_corruption_subset_heuristic(collection, sub, params, options);
}

DiscreteCleanResult clean_discrete(const DiscretizedCollection& collection,
                                   const CorruptionParams& params, Rng& rng,
                                   const DetectorOptions& options) {
  DiscreteCleanResult result;
  result.retained = all_indices(collection.m());
  for (std::size_t round = 0;; ++round) {
    DetectorOptions opts = options;
    opts.seed = derive_seed(options.seed, 0xde7ec7, round);
    Detection found = detect(collection, result.retained, params, opts);
    if (found.score < params.trigger_threshold()) {
      result.final_detection = std::move(found);
      break;
    }
    CleaningRound log;
    log.subset = found.subset;
    log.score = found.score;
    log.median = median_prob(collection, result.retained, found.subset);
    auto kept = batch_deletion(collection, result.retained, found.subset,
                               log.median, params, rng);
    log.removed = result.retained.size() - kept.size();
    result.retained = std::move(kept);
    result.rounds.push_back(std::move(log));
    if (result.retained.empty()) break;
  }
  return result;
}

}  // namespace robust_batches
