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


#include "robust_batches/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "robust_batches/core.hpp"
#include "robust_batches/detect.hpp"
#include "robust_batches/distance.hpp"

namespace robust_batches {

std::vector<double> dyadic_distribution(Rng& rng, std::size_t ell, int bits) {
  const std::uint64_t total = std::uint64_t{1} << bits;
  std::vector<std::uint64_t> cuts{0, total};
  for (std::size_t i = 0; i + 1 < ell; ++i) cuts.push_back(rng.below(total + 1));
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> p(ell);
  const double scale = std::ldexp(1.0, -bits);
  for (std::size_t i = 0; i < ell; ++i) {
    p[i] = static_cast<double>(cuts[i + 1] - cuts[i]) * scale;
  }
  return p;
}

std::vector<LabeledSample> dyadic_labeled_samples(Rng& rng, std::size_t s) {
  // Composition of 64 into s positive parts via s - 1 distinct cut points.
  std::vector<std::uint64_t> cuts;
  while (cuts.size() + 1 < s) {
    const std::uint64_t c = 1 + rng.below(63);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  cuts.push_back(0);
  cuts.push_back(64);
  std::sort(cuts.begin(), cuts.end());
  std::vector<LabeledSample> data(s);
  for (std::size_t i = 0; i < s; ++i) {
    data[i].x = static_cast<double>(1 + rng.below(6));
    data[i].y = static_cast<std::uint8_t>(rng.below(2));
    data[i].weight = static_cast<double>(cuts[i + 1] - cuts[i]) / 64.0;
  }
  return data;
}

namespace {

SuiteResult finish(SuiteResult r, const std::string& first_failure) {
  r.passed = r.failures == 0;
  std::ostringstream msg;
  msg << r.cases - r.failures << "/" << r.cases << " cases agree";
  if (!first_failure.empty()) msg << "; first failure: " << first_failure;
  r.detail = msg.str();
  return r;
}

}  // namespace

SuiteResult suite_fk_oracle(std::uint64_t seed, std::size_t cases) {
  SuiteResult r{"fk_distance DP == exhaustive", false, cases, 0, {}};
  std::string first;
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, 101, c));
    const std::size_t ell = 1 + rng.below(12);
    const std::size_t k = 1 + rng.below(3);
    const auto p = dyadic_distribution(rng, ell);
    const auto q = dyadic_distribution(rng, ell);
    const double dp = fk_distance(p, q, k);
    const double brute = fk_distance_brute(p, q, k);
    if (dp != brute) {
      ++r.failures;
      if (first.empty()) {
        std::ostringstream msg;
        msg << "case " << c << " ell=" << ell << " k=" << k << " dp=" << dp
            << " brute=" << brute;
        first = msg.str();
      }
    }
  }
  return finish(r, first);
}

SuiteResult suite_erm_oracle(std::uint64_t seed, std::size_t cases) {
  SuiteResult r{"erm_k_intervals DP == exhaustive", false, cases, 0, {}};
  std::string first;
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, 102, c));
    const std::size_t s = 1 + rng.below(12);
    const std::size_t k = 1 + rng.below(2);
    const auto data = dyadic_labeled_samples(rng, s);
    const double dp = erm_k_intervals(data, k).loss;
    const double brute = erm_k_intervals_brute(data, k).loss;
    if (dp != brute) {
      ++r.failures;
      if (first.empty()) {
        std::ostringstream msg;
        msg << "case " << c << " s=" << s << " k=" << k << " dp=" << dp
            << " brute=" << brute;
        first = msg.str();
      }
    }
  }
  return finish(r, first);
}

SuiteResult suite_runs_oracle(std::uint64_t seed, std::size_t cases) {
  SuiteResult r{"best_k_interval_union == exhaustive", false, cases, 0, {}};
  std::string first;
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, 103, c));
    const std::size_t ell = 1 + rng.below(12);
    const std::size_t k = 1 + rng.below(3);
    std::vector<double> d(ell);
    for (auto& v : d) v = static_cast<double>(static_cast<int>(rng.below(17)) - 8) / 16.0;
    const auto got = best_k_interval_union(d, k);
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << ell); ++mask) {
      std::vector<std::size_t> members;
      double acc = 0.0;
      for (std::size_t i = 0; i < ell; ++i) {
        if ((mask >> i) & 1u) {
          members.push_back(i);
          acc += d[i];
        }
      }
      if (BinSubset(members).run_count() <= k) best = std::max(best, std::abs(acc));
    }
    double witness_sum = 0.0;
    for (auto i : got.witness.members()) witness_sum += d[i];
    const bool ok = got.value == best && got.witness.run_count() <= k &&
                    std::abs(witness_sum) == got.value;
    if (!ok) {
      ++r.failures;
      if (first.empty()) first = "case " + std::to_string(c);
    }
  }
  return finish(r, first);
}

SuiteResult suite_detector_bound(std::uint64_t seed, std::size_t cases) {
  SuiteResult r{"spectral detector <= exhaustive detector", false, cases, 0, {}};
  std::string first;
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, 104, c));
    const std::size_t ell = 2 + rng.below(9);
    const std::size_t n = 20 + rng.below(40);
    const std::size_t m = 10 + rng.below(30);
    std::vector<DiscretizedBatch> batches(m);
    std::vector<std::int64_t> ids(m);
    for (std::size_t b = 0; b < m; ++b) {
      ids[b] = static_cast<std::int64_t>(b);
      batches[b].counts.assign(ell, 0);
      // A third of the batches pile extra mass on bin 0.
      const bool skewed = rng.below(3) == 0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t bin =
            skewed && rng.below(2) == 0 ? 0 : static_cast<std::size_t>(rng.below(ell));
        ++batches[b].counts[bin];
      }
    }
    DiscretizedCollection coll(ell, n, std::move(batches), std::move(ids));
    CorruptionParams params(0.2, n, m);
    const auto sub = all_indices(m);
    const auto exact = max_corruption_subset_brute(coll, sub, params);
    DetectorOptions opts;
    opts.seed = c;
    const auto heur = max_corruption_subset_heuristic(coll, sub, params, opts);
    if (!(heur.score <= exact.score)) {
      ++r.failures;
      if (first.empty()) first = "case " + std::to_string(c);
    }
  }
  return finish(r, first);
}

SuiteResult suite_relative_loss(std::uint64_t seed, std::size_t cases) {
  SuiteResult r{"relative-loss and risk-gap bounds (exhaustive)", false, cases, 0, {}};
  std::string first;
  for (std::size_t c = 0; c < cases; ++c) {
    Rng rng(derive_seed(seed, 105, c));
    const std::size_t ell = 1 + rng.below(10);
    const std::size_t k = 1 + rng.below(2);
    const auto p = dyadic_distribution(rng, 2 * ell);
    const auto q = dyadic_distribution(rng, 2 * ell);
    const auto check = relative_loss_brute(p, q, k);
    const double slack = 1e-12;
    const bool ok = check.excess <= 4.0 * check.distance + slack &&
                    check.max_risk_gap <= 2.0 * check.distance + slack;
    if (!ok) {
      ++r.failures;
      if (first.empty()) first = "case " + std::to_string(c);
    }
  }
  return finish(r, first);
}

std::vector<SuiteResult> run_selftest(std::uint64_t seed) {
  return {suite_fk_oracle(seed), suite_runs_oracle(seed), suite_erm_oracle(seed),
          suite_detector_bound(seed), suite_relative_loss(seed)};
}

}  // namespace robust_batches
