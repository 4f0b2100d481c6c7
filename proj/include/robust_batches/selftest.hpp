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


// Oracle-equivalence suites shared by the `selftest` command and the tests.

#ifndef ROBUST_BATCHES_SELFTEST_HPP_
#define ROBUST_BATCHES_SELFTEST_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "robust_batches/classify.hpp"
#include "robust_batches/rng.hpp"

namespace robust_batches {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string detail;
};

// Random probability vector of length ell with entries in multiples of
// 2^-bits, so every partial sum is exact in double precision.
std::vector<double> dyadic_distribution(Rng& rng, std::size_t ell, int bits = 10);

// Random labeled sample set of size s with small integer x values (ties
// included) and weights in multiples of 1/64 summing to 1; s <= 12.
std::vector<LabeledSample> dyadic_labeled_samples(Rng& rng, std::size_t s);

SuiteResult suite_fk_oracle(std::uint64_t seed, std::size_t cases = 500);
SuiteResult suite_erm_oracle(std::uint64_t seed, std::size_t cases = 500);
SuiteResult suite_runs_oracle(std::uint64_t seed, std::size_t cases = 500);
SuiteResult suite_detector_bound(std::uint64_t seed, std::size_t cases = 50);
SuiteResult suite_relative_loss(std::uint64_t seed, std::size_t cases = 500);

std::vector<SuiteResult> run_selftest(std::uint64_t seed);

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_SELFTEST_HPP_
