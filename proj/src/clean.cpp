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


#include "robust_batches/clean.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "robust_batches/distance.hpp"
#include "robust_batches/error.hpp"

namespace robust_batches {

double recommended_batches(std::size_t k, std::size_t n, double beta,
                           double delta) {
  const double nn = static_cast<double>(n);
  return (static_cast<double>(k) * std::log(nn / beta) + std::log(1.0 / delta)) *
         std::sqrt(nn) / (beta * beta * beta);
}

std::vector<double> cell_masses(const std::function<double(double)>& cdf,
                                const IntervalPartition& partition) {
  const auto& cuts = partition.boundaries();
  std::vector<double> masses(partition.ell());
  double prev = 0.0;
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    const double at = std::clamp(cdf(cuts[j]), 0.0, 1.0);
    masses[j] = std::max(0.0, at - prev);
    prev = std::max(prev, at);
  }
  masses.back() = std::max(0.0, 1.0 - prev);
  return masses;
}

CleanResult robust_clean_fk(const BatchCollection& collection,
                            const CleanOptions& options, Rng& rng,
                            const std::function<double(double)>& reference_cdf) {
  if (!(options.beta > 0.0) || options.beta > CorruptionParams::kMaxBeta) {
    std::ostringstream msg;
    msg << "beta = " << options.beta
        << " is outside (0, 0.4]; the cleaning guarantees assume at most a "
           "0.4 fraction of adversarial batches";
    throw DomainError(msg.str());
  }
  if (collection.m() < 2) throw UsageError("cleaning needs m >= 2 batches");
  if (options.k == 0) throw UsageError("k must be >= 1");

  CorruptionParams params(options.beta, collection.n(), collection.m());
  params.set_multiples(options.trigger_multiple, options.stop_multiple);

  const auto pooled = collection.pooled_sorted_samples();
  const std::size_t ell =
      options.ell ? *options.ell
                  : choose_ell(options.k, collection.n(), options.beta,
                               pooled.size());
  IntervalPartition partition = build_partition(pooled, ell);
  const auto discretized = discretize(collection, partition);

  CleanResult out;
  CleaningReport& report = out.report;
  report.m = collection.m();
  report.n = collection.n();
  report.ell = partition.ell();
  report.k = options.k;
  report.beta = options.beta;
  report.tau = params.tau();
  report.kappa_g = params.kappa_g();
  const auto occupancy = cell_occupancy(pooled, partition);
  report.max_cell_occupancy = *std::max_element(occupancy.begin(), occupancy.end());

  const double needed =
      recommended_batches(options.k, collection.n(), options.beta, options.delta);
  if (static_cast<double>(collection.m()) < needed) {
    std::ostringstream msg;
    msg << "m = " << collection.m() << " is below the sample-size guidance of "
        << static_cast<long long>(std::ceil(needed))
        << " batches (constant 1, delta = " << options.delta << ")";
    report.warnings.push_back(msg.str());
  }
  if (partition.ell() < ell) {
    std::ostringstream msg;
    msg << "tied samples collapsed " << ell - partition.ell()
        << " partition cells (ell " << ell << " -> " << partition.ell() << ")";
    report.warnings.push_back(msg.str());
  }

  auto result = clean_discrete(discretized, params, rng, options.detector);
  out.retained = std::move(result.retained);
  report.rounds = std::move(result.rounds);
  report.final_score = result.final_detection.score;
  for (auto i : out.retained) report.retained_ids.push_back(collection.batch(i).id);

  if (reference_cdf) {
    const auto reference = cell_masses(reference_cdf, partition);
    const auto before = pooled_empirical(discretized, all_indices(collection.m()));
    report.fk_before = fk_distance(before, reference, options.k);
    if (!out.retained.empty()) {
      const auto after = pooled_empirical(discretized, out.retained);
      report.fk_after = fk_distance(after, reference, options.k);
    }
  }
  if (collection.has_truth()) {
    const auto& truth = *collection.truth();
    std::size_t good_total = 0;
    std::size_t good_kept = 0;
    std::vector<char> kept(collection.m(), 0);
    for (auto i : out.retained) kept[i] = 1;
    std::size_t removed_adv = 0;
    std::size_t removed_good = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool good = truth[i] == Truth::kGood;
      good_total += good;
      if (kept[i]) {
        good_kept += good;
      } else if (good) {
        ++removed_good;
      } else {
        ++removed_adv;
      }
    }
    report.retention_good =
        good_total == 0 ? 1.0
                        : static_cast<double>(good_kept) /
                              static_cast<double>(good_total);
    report.removed_adversarial = removed_adv;
    report.removed_good = removed_good;
  }
  report.partition = std::move(partition);
  return out;
}

}  // namespace robust_batches
