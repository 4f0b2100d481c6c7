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


// End-to-end cleaning for the k-interval family: partition the pooled
// samples, discretize every batch, then detect and delete.

#ifndef ROBUST_BATCHES_CLEAN_HPP_
#define ROBUST_BATCHES_CLEAN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "robust_batches/core.hpp"
#include "robust_batches/detect.hpp"
#include "robust_batches/partition.hpp"
#include "robust_batches/rng.hpp"

namespace robust_batches {

struct CleanOptions {
  std::size_t k = 2;
  double beta = 0.1;
  DetectorOptions detector;
  // Failure probability used only for the sample-size warning.
  double delta = 0.1;
  double trigger_multiple = CorruptionParams::kDefaultTrigger;
  double stop_multiple = CorruptionParams::kDefaultStop;
  // Replaces choose_ell when set.
  std::optional<std::size_t> ell;
};

struct CleaningReport {
  std::vector<std::int64_t> retained_ids;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t ell = 0;
  std::size_t k = 0;
  double beta = 0.0;
  double tau = 0.0;
  double kappa_g = 0.0;
  std::vector<CleaningRound> rounds;
  double final_score = 0.0;  // detector score of the retained sub-collection
  std::size_t max_cell_occupancy = 0;
  std::optional<double> fk_before;
  std::optional<double> fk_after;
  std::optional<double> retention_good;
  std::optional<std::size_t> removed_adversarial;
  std::optional<std::size_t> removed_good;
  std::vector<std::string> warnings;
  IntervalPartition partition;
};

struct CleanResult {
  SubCollection retained;
  CleaningReport report;
};

// Batches needed by the sample-size guidance with constant 1:
// (k ln(n/beta) + ln(1/delta)) sqrt(n) / beta^3.
double recommended_batches(std::size_t k, std::size_t n, double beta,
                           double delta);

// Bin masses of a distribution with the given CDF over the partition cells.
std::vector<double> cell_masses(const std::function<double(double)>& cdf,
                                const IntervalPartition& partition);

// Throws DomainError for beta outside (0, 0.4] and UsageError for m < 2 or
// k == 0. When `reference_cdf` is given, fk_before / fk_after compare the
// pooled empirical bin masses with the reference's cell masses.
CleanResult robust_clean_fk(
    const BatchCollection& collection, const CleanOptions& options, Rng& rng,
    const std::function<double(double)>& reference_cdf = nullptr);

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_CLEAN_HPP_
