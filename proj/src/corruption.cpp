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

#include "robust_batches/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robust_batches/error.hpp"

namespace robust_batches {

std::uint64_t twice_median(std::span<const std::uint32_t> counts) {
  if (counts.empty()) throw UsageError("median: empty sub-collection");
  std::vector<std::uint32_t> v(counts.begin(), counts.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid),
                   v.end());
  const std::uint64_t upper = v[mid];
  if (v.size() % 2 == 1) return 2 * upper;
  const std::uint64_t lower =
      *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + upper;
}

double median_of_counts(std::span<const std::uint32_t> counts, std::size_t n) {
  return static_cast<double>(twice_median(counts)) /
         (2.0 * static_cast<double>(n));
}

double count_score(std::uint32_t count, std::uint64_t med2, std::size_t n,
                   double tau) {
  // 2c - 2med is an exact integer, so S and its complement score identically.
  const auto diff = static_cast<std::int64_t>(2 * std::uint64_t{count}) -
                    static_cast<std::int64_t>(med2);
  const double dev =
      static_cast<double>(diff < 0 ? -diff : diff) / (2.0 * static_cast<double>(n));
  return dev <= tau ? 0.0 : dev * dev;
}

namespace {

std::vector<std::uint32_t> counts_for(const DiscretizedCollection& collection,
                                      std::span<const std::size_t> sub,
                                      const std::vector<char>& mask) {
  std::vector<std::uint32_t> counts;
  counts.reserve(sub.size());
  for (auto i : sub) counts.push_back(collection.count_in(i, mask));
  return counts;
}

double prob(std::uint32_t count, std::size_t n) {
  return static_cast<double>(count) / static_cast<double>(n);
}

}  // namespace

double median_prob(const DiscretizedCollection& collection,
                   std::span<const std::size_t> sub, const BinSubset& subset) {
  const auto counts = counts_for(collection, sub, subset.mask(collection.ell()));
  return median_of_counts(counts, collection.n());
}

double corruption_score(double mu, double med, const CorruptionParams& params) {
  const double dev = mu - med;
  return std::abs(dev) <= params.tau() ? 0.0 : dev * dev;
}

double corruption_batch(const DiscretizedBatch& batch, const BinSubset& subset,
                        double med, const CorruptionParams& params) {
  if (!(med >= 0.0 && med <= 1.0)) {
    throw DomainError("corruption_batch: median must lie in [0, 1]");
  }
  return corruption_score(empirical_prob(batch, subset), med, params);
}

double corruption_total(std::span<const std::uint32_t> counts, std::size_t n,
                        const CorruptionParams& params) {
  const auto med2 = twice_median(counts);
  double total = 0.0;
  for (auto c : counts) total += count_score(c, med2, n, params.tau());
  return total;
}

CorruptionReport corruption_collection(const DiscretizedCollection& collection,
                                       std::span<const std::size_t> sub,
                                       const BinSubset& subset,
                                       const CorruptionParams& params) {
  const auto counts = counts_for(collection, sub, subset.mask(collection.ell()));
  CorruptionReport report;
  report.subset = subset;
  const auto med2 = twice_median(counts);
  report.median = median_of_counts(counts, collection.n());
  report.batch_ids.reserve(sub.size());
  report.scores.reserve(sub.size());
  for (std::size_t r = 0; r < sub.size(); ++r) {
    const double score =
        count_score(counts[r], med2, collection.n(), params.tau());
    report.batch_ids.push_back(collection.ids()[sub[r]]);
    report.scores.push_back(score);
    report.total += score;
  }
  return report;
}

SubCollection batch_deletion(const DiscretizedCollection& collection,
                             std::span<const std::size_t> sub,
                             const BinSubset& subset, double med,
                             const CorruptionParams& params, Rng& rng) {
  const auto counts = counts_for(collection, sub, subset.mask(collection.ell()));
  std::vector<double> scores(sub.size());
  for (std::size_t r = 0; r < sub.size(); ++r) {
    scores[r] = corruption_score(prob(counts[r], collection.n()), med, params);
  }
  std::vector<char> alive(sub.size(), 1);

  // The total is re-summed in index order after every removal so the loop
  // condition does not depend on accumulated subtraction error.
  auto total_alive = [&] {
    double t = 0.0;
    for (std::size_t r = 0; r < scores.size(); ++r) {
      if (alive[r]) t += scores[r];
    }
    return t;
  };

  for (double total = total_alive(); total >= params.stop_threshold();
       total = total_alive()) {
    const double u = rng.uniform() * total;
    double cumulative = 0.0;
    std::size_t victim = scores.size();
    for (std::size_t r = 0; r < scores.size(); ++r) {
      if (!alive[r] || scores[r] == 0.0) continue;
      victim = r;  // last positive-score batch, in case of rounding at the end
      cumulative += scores[r];
      if (u < cumulative) break;
    }
    alive[victim] = 0;
  }

  SubCollection kept;
  kept.reserve(sub.size());
  for (std::size_t r = 0; r < sub.size(); ++r) {
    if (alive[r]) kept.push_back(sub[r]);
  }
  return kept;
}

SubCollection clean_over_cover(const DiscretizedCollection& collection,
                               std::span<const BinSubset> cover,
                               const CorruptionParams& params, Rng& rng) {
  SubCollection current = all_indices(collection.m());
  for (const auto& subset : cover) {
    if (current.empty()) break;
    const auto counts =
        counts_for(collection, current, subset.mask(collection.ell()));
    if (corruption_total(counts, collection.n(), params) <
        params.trigger_threshold()) {
      continue;
    }
    const double med = median_of_counts(counts, collection.n());
    current = batch_deletion(collection, current, subset, med, params, rng);
  }
  return current;
}

PropertyReport check_properties(const DiscretizedCollection& good,
                                std::span<const double> target,
                                std::span<const BinSubset> subsets,
                                const CorruptionParams& params) {
  if (!good.has_truth()) {
    throw UsageError("check_properties: truth flags are required");
  }
  for (auto t : *good.truth()) {
    if (t != Truth::kGood) {
      throw UsageError(
          "check_properties: the collection contains adversarial batches; "
          "the properties are only claimed for good batches");
    }
  }
  if (target.size() != good.ell()) {
    throw UsageError("check_properties: target must have one mass per bin");
  }

  const double n = static_cast<double>(good.n());
  const double beta = params.beta();
  const double log_term = std::log(6.0 * std::exp(1.0) / beta);
  PropertyReport report;
  report.median_bound = std::sqrt(std::log(6.0) / n);
  report.mean_bound = beta / 2.0 * std::sqrt(log_term / n);
  report.variance_bound = 6.0 * beta * log_term / n;
  report.corruption_bound = params.kappa_g();

  const auto everyone = all_indices(good.m());
  const auto trim = static_cast<std::size_t>(
      std::floor(beta / 6.0 * static_cast<double>(good.m())));

  for (const auto& subset : subsets) {
    SubsetPropertyCheck check;
    check.subset = subset;
    const auto mask = subset.mask(good.ell());
    for (std::size_t j = 0; j < good.ell(); ++j) {
      if (mask[j]) check.target_prob += target[j];
    }
    const double p = check.target_prob;
    const double var_p = binomial_variance(std::clamp(p, 0.0, 1.0), good.n());

    const auto counts = counts_for(good, everyone, mask);
    check.median_error = std::abs(median_of_counts(counts, good.n()) - p);
    check.corruption = corruption_total(counts, good.n(), params);

    std::vector<std::uint32_t> sorted = counts;
    std::sort(sorted.begin(), sorted.end());
    const std::span<const std::uint32_t> all_view(sorted);
    const std::span<const std::uint32_t> views[] = {
        all_view, all_view.subspan(0, sorted.size() - trim),
        all_view.subspan(trim)};
    for (const auto& view : views) {
      double mean = 0.0;
      double msd = 0.0;
      for (auto c : view) mean += prob(c, good.n());
      mean /= static_cast<double>(view.size());
      for (auto c : view) {
        const double d = prob(c, good.n()) - p;
        msd += d * d;
      }
      msd /= static_cast<double>(view.size());
      check.mean_error = std::max(check.mean_error, std::abs(mean - p));
      check.variance_error = std::max(check.variance_error, std::abs(msd - var_p));
    }

    check.median_ok = check.median_error <= report.median_bound;
    check.mean_ok = check.mean_error <= report.mean_bound;
    check.variance_ok = check.variance_error <= report.variance_bound;
    check.corruption_ok = check.corruption <= report.corruption_bound;
    report.median_holds = report.median_holds && check.median_ok;
    report.mean_variance_holds =
        report.mean_variance_holds && check.mean_ok && check.variance_ok;
    report.corruption_holds = report.corruption_holds && check.corruption_ok;
    report.subsets.push_back(std::move(check));
  }
  return report;
}

}  // namespace robust_batches
