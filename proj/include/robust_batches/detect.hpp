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


// Searches for bin subsets with a large corruption score over a discretized
// sub-collection, and the detect-then-delete loop built on top.
//
// The exhaustive detector is exact but exponential in ell. The spectral
// detector centers each bin column at its median, takes the leading
// eigenvector of the centered matrix, and scores prefix sets of the bins
// sorted by that eigenvector (both signs) plus every singleton bin.

#ifndef ROBUST_BATCHES_DETECT_HPP_
#define ROBUST_BATCHES_DETECT_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "robust_batches/core.hpp"
#include "robust_batches/rng.hpp"
#include "robust_batches/sets.hpp"

namespace robust_batches {

struct Detection {
  BinSubset subset;
  double score = 0.0;
};

enum class DetectorKind { kBrute, kSpectral };

struct DetectorOptions {
  DetectorKind kind = DetectorKind::kSpectral;
  // Prefix sizes tried per eigenvector sign; 0 means all ell.
  std::size_t candidates = 0;
  std::size_t power_iterations = 200;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // 0 = hardware concurrency
};

inline constexpr std::size_t kMaxBruteEll = 20;

// Exact argmax of the corruption score over all subsets of [ell]. Ties go to
// the lexicographically smallest subset, so a zero-corruption input yields
// the empty set. Throws UsageError for ell > 20 or an empty sub.
Detection max_corruption_subset_brute(const DiscretizedCollection& collection,
                                      std::span<const std::size_t> sub,
                                      const CorruptionParams& params);

Detection max_corruption_subset_heuristic(
    const DiscretizedCollection& collection, std::span<const std::size_t> sub,
    const CorruptionParams& params, const DetectorOptions& options = {});

Detection detect(const DiscretizedCollection& collection,
                 std::span<const std::size_t> sub,
                 const CorruptionParams& params, const DetectorOptions& options);

struct CleaningRound {
  BinSubset subset;
  double score = 0.0;
  double median = 0.0;
  std::size_t removed = 0;
};

struct DiscreteCleanResult {
  SubCollection retained;
  std::vector<CleaningRound> rounds;
  Detection final_detection;  // the detection that ended the loop
};

// Detect; if the score reaches params.trigger_threshold(), recompute the
// median of the detected subset on the current sub-collection and run
// batch_deletion on it; repeat until the detected score is below the
// trigger threshold.
DiscreteCleanResult clean_discrete(const DiscretizedCollection& collection,
                                   const CorruptionParams& params, Rng& rng,
                                   const DetectorOptions& options);

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_DETECT_HPP_
