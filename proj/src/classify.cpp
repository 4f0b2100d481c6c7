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


#include "robust_batches/classify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "robust_batches/distance.hpp"
#include "robust_batches/error.hpp"

namespace robust_batches {

double risk(const KIntervalHypothesis& h, std::span<const LabeledSample> data) {
  double total = 0.0;
  double wrong = 0.0;
  for (const auto& s : data) {
    if (!std::isfinite(s.weight) || s.weight < 0.0) {
      throw DomainError("risk: weights must be finite and nonnegative");
    }
    total += s.weight;
    if (h.predict(s.x) != s.y) wrong += s.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError("risk: weights must sum to 1");
  }
  return wrong;
}

namespace {

struct Groups {
  std::vector<double> xs;    // distinct x values, increasing
  std::vector<double> gain;  // weight of label 1 minus weight of label 0
};

Groups group_by_x(std::span<const LabeledSample> data) {
  std::vector<LabeledSample> sorted(data.begin(), data.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) {
                     if (a.x != b.x) return a.x < b.x;
                     return a.y < b.y;
                   });
  Groups g;
  for (const auto& s : sorted) {
    if (!std::isfinite(s.x)) throw DomainError("ERM: sample x must be finite");
    if (g.xs.empty() || g.xs.back() != s.x) {
      g.xs.push_back(s.x);
      g.gain.push_back(0.0);
    }
    g.gain.back() += s.y == 1 ? s.weight : -s.weight;
  }
  return g;
}

KIntervalHypothesis hypothesis_from(const Groups& g, const BinSubset& chosen) {
  std::vector<Interval> out;
  const auto& members = chosen.members();
  std::size_t i = 0;
  while (i < members.size()) {
    std::size_t j = i;
    while (j + 1 < members.size() && members[j + 1] == members[j] + 1) ++j;
    const std::size_t a = members[i];
    const std::size_t b = members[j];
    Interval iv;
    if (a > 0) {
      iv.lo = 0.5 * (g.xs[a - 1] + g.xs[a]);
      iv.lo_closed = true;
    }
    if (b + 1 < g.xs.size()) {
      iv.hi = 0.5 * (g.xs[b] + g.xs[b + 1]);
      iv.hi_closed = true;
    }
    out.push_back(iv);
    i = j + 1;
  }
  return KIntervalHypothesis(IntervalUnion(std::move(out)));
}

}  // namespace

ErmResult erm_k_intervals(std::span<const LabeledSample> data, std::size_t k) {
  if (k == 0) throw UsageError("erm_k_intervals: k must be >= 1");
  const Groups g = group_by_x(data);
  const RunSelection best = max_weight_runs(g.gain, k, RunTieBreak::kFewestRuns);
  ErmResult out;
  out.hypothesis = hypothesis_from(g, best.members);
  out.loss = risk(out.hypothesis, data);
  return out;
}

ErmResult erm_k_intervals_brute(std::span<const LabeledSample> data,
                                std::size_t k) {
  if (k == 0) throw UsageError("erm_k_intervals_brute: k must be >= 1");
  const Groups g = group_by_x(data);
  if (g.xs.size() > 20) {
    throw UsageError("erm_k_intervals_brute: refusing more than 20 distinct x");
  }
  ErmResult best;
  bool have = false;
  for (std::uint32_t mask : k_interval_masks(g.xs.size(), k)) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < g.xs.size(); ++i) {
      if ((mask >> i) & 1u) members.push_back(i);
    }
    auto h = hypothesis_from(g, BinSubset(std::move(members)));
    const double loss = risk(h, data);
    if (!have || loss < best.loss) {
      best = {std::move(h), loss};
      have = true;
    }
  }
  return best;
}

std::vector<std::uint32_t> k_interval_masks(std::size_t ell, std::size_t k) {
  if (ell > 20) throw UsageError("k_interval_masks: refusing ell > 20");
  std::vector<std::uint32_t> out;
  for (std::uint32_t mask = 0; mask < (1u << ell); ++mask) {
    // Runs start where a bit is set and the bit below is not.
    const auto starts = static_cast<std::size_t>(
        std::popcount(mask & ~(mask << 1)));
    if (starts <= k) out.push_back(mask);
  }
  return out;
}

double discrete_risk(std::span<const double> joint, std::uint32_t mask) {
  double wrong = 0.0;
  for (std::size_t i = 0; 2 * i + 1 < joint.size(); ++i) {
    const bool positive = (mask >> i) & 1u;
    wrong += joint[2 * i + (positive ? 0 : 1)];
  }
  return wrong;
}

namespace {

std::size_t joint_points(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.size() % 2 != 0) {
    throw UsageError("joint distributions need matching even lengths");
  }
  require_distribution(p, "joint(p)");
  require_distribution(q, "joint(q)");
  const std::size_t ell = p.size() / 2;
  if (ell > 16) throw UsageError("brute-force hypothesis checks need ell <= 16");
  return ell;
}

}  // namespace

double hypothesis_family_distance(std::span<const double> p,
                                  std::span<const double> q, std::size_t k) {
  const std::size_t ell = joint_points(p, q);
  const std::uint32_t full = (1u << ell) - 1;
  double best = 0.0;
  for (std::uint32_t mask : k_interval_masks(ell, k)) {
    for (std::uint32_t region : {mask, full & ~mask}) {
      for (std::size_t y = 0; y < 2; ++y) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ell; ++i) {
          if ((region >> i) & 1u) acc += p[2 * i + y] - q[2 * i + y];
        }
        best = std::max(best, std::abs(acc));
      }
    }
  }
  return best;
}

RelativeLossCheck relative_loss_brute(std::span<const double> p,
                                      std::span<const double> q,
                                      std::size_t k) {
  const std::size_t ell = joint_points(p, q);
  const auto masks = k_interval_masks(ell, k);
  std::uint32_t q_best = masks.front();
  double q_best_risk = std::numeric_limits<double>::infinity();
  double p_best_risk = std::numeric_limits<double>::infinity();
  RelativeLossCheck out;
  for (std::uint32_t mask : masks) {
    const double rp = discrete_risk(p, mask);
    const double rq = discrete_risk(q, mask);
    if (rq < q_best_risk) {
      q_best_risk = rq;
      q_best = mask;
    }
    p_best_risk = std::min(p_best_risk, rp);
    out.max_risk_gap = std::max(out.max_risk_gap, std::abs(rp - rq));
  }
  out.excess = discrete_risk(p, q_best) - p_best_risk;
  out.distance = hypothesis_family_distance(p, q, k);
  return out;
}

ClassifyResult robust_classify(const BatchCollection& collection,
                               const ClassifyOptions& options, Rng& rng) {
  if (!collection.labeled()) {
    throw UsageError("classify: every sample needs a 0/1 label");
  }
  if (!(options.beta > 0.0) || options.beta > CorruptionParams::kMaxBeta) {
    std::ostringstream msg;
    msg << "beta = " << options.beta
        << " is outside (0, 0.4]; the cleaning guarantees assume at most a "
           "0.4 fraction of adversarial batches";
    throw DomainError(msg.str());
  }
  if (options.k == 0) throw UsageError("classify: k must be >= 1");

  CorruptionParams params(options.beta, collection.n(), collection.m());
  params.set_multiples(options.trigger_multiple, options.stop_multiple);

  ClassifyResult out;
  ClassifyReport& report = out.report;
  report.m = collection.m();
  report.n = collection.n();
  report.k = options.k;
  report.beta = options.beta;
  report.tau = params.tau();
  report.kappa_g = params.kappa_g();

  const auto everyone = all_indices(collection.m());
  if (options.clean) {
    // One partition per label slice; bin b of label 1 becomes ell0 + b.
    IntervalPartition parts[2];
    for (std::uint8_t label = 0; label < 2; ++label) {
      auto slice = collection.samples_with_label(everyone, label);
      std::sort(slice.begin(), slice.end());
      if (slice.empty()) continue;
      const std::size_t ell =
          choose_ell(options.k, collection.n(), options.beta, slice.size());
      parts[label] = build_partition(slice, ell);
    }
    report.ell_label0 = parts[0].ell();
    report.ell_label1 = parts[1].ell();
    const std::size_t ell = report.ell_label0 + report.ell_label1;
    std::vector<DiscretizedBatch> bins;
    std::vector<std::int64_t> ids;
    for (const auto& b : collection.batches()) {
      DiscretizedBatch d;
      d.counts.assign(ell, 0);
      for (std::size_t i = 0; i < b.samples.size(); ++i) {
        const std::uint8_t y = b.labels[i];
        const std::size_t offset = y == 0 ? 0 : report.ell_label0;
        ++d.counts[offset + parts[y].bin_of(b.samples[i])];
      }
      bins.push_back(std::move(d));
      ids.push_back(b.id);
    }
    DiscretizedCollection discretized(ell, collection.n(), std::move(bins),
                                      std::move(ids), collection.truth());
    auto cleaned = clean_discrete(discretized, params, rng, options.detector);
    out.retained = std::move(cleaned.retained);
    report.rounds = std::move(cleaned.rounds);
    report.final_score = cleaned.final_detection.score;
  } else {
    out.retained = everyone;
  }
  for (auto i : out.retained) report.retained_ids.push_back(collection.batch(i).id);

  if (out.retained.empty()) {
    report.warnings.push_back("every batch was deleted; returning the empty region");
  } else {
    std::vector<LabeledSample> data;
    const double w = 1.0 / static_cast<double>(collection.n() * out.retained.size());
    for (auto i : out.retained) {
      const auto& b = collection.batch(i);
      for (std::size_t j = 0; j < b.samples.size(); ++j) {
        data.push_back({b.samples[j], b.labels[j], w});
      }
    }
    auto erm = erm_k_intervals(data, options.k);
    out.hypothesis = std::move(erm.hypothesis);
    report.empirical_loss = erm.loss;
  }

  if (collection.has_truth()) {
    const auto& truth = *collection.truth();
    std::size_t good = 0;
    std::size_t kept = 0;
    std::vector<char> in(collection.m(), 0);
    for (auto i : out.retained) in[i] = 1;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == Truth::kGood) {
        ++good;
        kept += in[i];
      }
    }
    report.retention_good =
        good == 0 ? 1.0 : static_cast<double>(kept) / static_cast<double>(good);
  }
  return out;
}

}  // namespace robust_batches
