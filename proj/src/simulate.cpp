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


#include "robust_batches/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "robust_batches/clean.hpp"
#include "robust_batches/distance.hpp"
#include "robust_batches/error.hpp"
#include "robust_batches/parallel.hpp"

namespace robust_batches {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double number(const std::string& s, const std::string& what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (s.empty() || end != begin + s.size() || !std::isfinite(v)) {
    throw UsageError(what + ": cannot parse number '" + s + "'");
  }
  return v;
}

std::vector<double> numbers(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(number(part, what));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<double>& v, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += fmt(v[i]);
  }
  return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double u) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double open_uniform(Rng& rng) {
  return (static_cast<double>(rng.next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

TargetSpec TargetSpec::uniform(double a, double b) {
  TargetSpec t;
  t.kind_ = Kind::kUniform;
  t.a_ = {a, b};
  t.validate();
  return t;
}

TargetSpec TargetSpec::gaussian_mixture(std::vector<double> weights,
                                        std::vector<double> means,
                                        std::vector<double> sds) {
  TargetSpec t;
  t.kind_ = Kind::kGaussianMixture;
  t.a_ = std::move(weights);
  t.b_ = std::move(means);
  t.c_ = std::move(sds);
  t.validate();
  return t;
}

TargetSpec TargetSpec::histogram(std::vector<double> edges,
                                 std::vector<double> masses) {
  TargetSpec t;
  t.kind_ = Kind::kHistogram;
  t.a_ = std::move(edges);
  t.b_ = std::move(masses);
  t.validate();
  return t;
}

TargetSpec TargetSpec::piecewise(PiecewisePolynomial density) {
  TargetSpec t;
  t.kind_ = Kind::kPiecewisePolynomial;
  t.poly_ = std::move(density);
  t.validate();
  return t;
}

void TargetSpec::validate() const {
  switch (kind_) {
    case Kind::kUniform:
      if (!(a_[0] < a_[1])) throw UsageError("uniform target: need a < b");
      break;
    case Kind::kGaussianMixture: {
      if (a_.empty() || a_.size() != b_.size() || a_.size() != c_.size()) {
        throw UsageError("gm target: need matching weights, means and sds");
      }
      double total = 0.0;
      for (std::size_t i = 0; i < a_.size(); ++i) {
        if (!(a_[i] > 0.0) || !(c_[i] > 0.0)) {
          throw UsageError("gm target: weights and sds must be positive");
        }
        total += a_[i];
      }
      if (std::abs(total - 1.0) > 1e-9) {
        throw UsageError("gm target: weights must sum to 1");
      }
      break;
    }
    case Kind::kHistogram: {
      if (a_.size() < 2 || b_.size() + 1 != a_.size()) {
        throw UsageError("hist target: need K+1 edges and K masses");
      }
      for (std::size_t i = 1; i < a_.size(); ++i) {
        if (!(a_[i - 1] < a_[i])) {
          throw UsageError("hist target: edges must increase");
        }
      }
      require_distribution(b_, "hist target masses");
      break;
    }
    case Kind::kPiecewisePolynomial:
      if (poly_.min_check_value() < -1e-9) {
        throw UsageError("pp target: density is negative somewhere");
      }
      if (std::abs(poly_.total_mass() - 1.0) > 1e-6) {
        throw UsageError("pp target: density must integrate to 1");
      }
      break;
  }
}

TargetSpec TargetSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw UsageError("target '" + text + "': expected KIND:PARAMS");
  }
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (kind == "uniform") {
    const auto v = numbers(rest, "uniform target");
    if (v.size() != 2) throw UsageError("uniform target: expected A,B");
    return uniform(v[0], v[1]);
  }
  if (kind == "gm") {
    std::vector<double> w, mu, sd;
    for (const auto& comp : split(rest, '+')) {
      const auto n_at = comp.find("N(");
      if (n_at == std::string::npos || comp.back() != ')') {
        throw UsageError("gm target: component '" + comp +
                         "' is not of the form WN(MU,SD)");
      }
      w.push_back(n_at == 0 ? 1.0 : number(comp.substr(0, n_at), "gm weight"));
      const auto v = numbers(comp.substr(n_at + 2, comp.size() - n_at - 3),
                             "gm component");
      if (v.size() != 2) throw UsageError("gm target: expected N(MU,SD)");
      mu.push_back(v[0]);
      sd.push_back(v[1]);
    }
    return gaussian_mixture(std::move(w), std::move(mu), std::move(sd));
  }
  if (kind == "hist") {
    const auto parts = split(rest, ';');
    if (parts.size() != 2) throw UsageError("hist target: expected EDGES;MASSES");
    return histogram(numbers(parts[0], "hist edges"),
                     numbers(parts[1], "hist masses"));
  }
  if (kind == "pp") {
    const auto parts = split(rest, ';');
    if (parts.size() != 2) {
      throw UsageError("pp target: expected BREAKPOINTS;COEFFS|COEFFS...");
    }
    std::vector<std::vector<double>> coeffs;
    for (const auto& piece : split(parts[1], '|')) {
      coeffs.push_back(numbers(piece, "pp coefficients"));
    }
    return piecewise(PiecewisePolynomial(numbers(parts[0], "pp breakpoints"),
                                         std::move(coeffs)));
  }
  throw UsageError("target: unknown kind '" + kind + "'");
}

std::string TargetSpec::to_string() const {
  switch (kind_) {
    case Kind::kUniform:
      return "uniform:" + join(a_);
    case Kind::kGaussianMixture: {
      std::string out = "gm:";
      for (std::size_t i = 0; i < a_.size(); ++i) {
        if (i) out += "+";
        out += fmt(a_[i]) + "N(" + fmt(b_[i]) + "," + fmt(c_[i]) + ")";
      }
      return out;
    }
    case Kind::kHistogram:
      return "hist:" + join(a_) + ";" + join(b_);
    case Kind::kPiecewisePolynomial: {
      std::string out = "pp:" + join(poly_.breakpoints()) + ";";
      for (std::size_t j = 0; j < poly_.pieces(); ++j) {
        if (j) out += "|";
        out += join(poly_.coefficients()[j]);
      }
      return out;
    }
  }
  return {};
}

double TargetSpec::pdf(double x) const {
  switch (kind_) {
    case Kind::kUniform:
      return x >= a_[0] && x <= a_[1] ? 1.0 / (a_[1] - a_[0]) : 0.0;
    case Kind::kGaussianMixture: {
      double acc = 0.0;
      for (std::size_t i = 0; i < a_.size(); ++i) {
        acc += a_[i] * normal_pdf((x - b_[i]) / c_[i]) / c_[i];
      }
      return acc;
    }
    case Kind::kHistogram: {
      if (x < a_.front() || x > a_.back()) return 0.0;
      auto j = static_cast<std::size_t>(
          std::upper_bound(a_.begin(), a_.end(), x) - a_.begin());
      j = std::min(j == 0 ? 0 : j - 1, b_.size() - 1);
      return b_[j] / (a_[j + 1] - a_[j]);
    }
    case Kind::kPiecewisePolynomial:
      return poly_.density(x);
  }
  return 0.0;
}

double TargetSpec::cdf(double x) const {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  switch (kind_) {
    case Kind::kUniform:
      return std::clamp((x - a_[0]) / (a_[1] - a_[0]), 0.0, 1.0);
    case Kind::kGaussianMixture: {
      double acc = 0.0;
      for (std::size_t i = 0; i < a_.size(); ++i) {
        acc += a_[i] * normal_cdf((x - b_[i]) / c_[i]);
      }
      return std::min(acc, 1.0);
    }
    case Kind::kHistogram: {
      if (x <= a_.front()) return 0.0;
      double acc = 0.0;
      for (std::size_t j = 0; j < b_.size(); ++j) {
        if (x >= a_[j + 1]) {
          acc += b_[j];
        } else {
          acc += b_[j] * (x - a_[j]) / (a_[j + 1] - a_[j]);
          break;
        }
      }
      return std::min(acc, 1.0);
    }
    case Kind::kPiecewisePolynomial:
      return std::clamp(poly_.cdf(x), 0.0, 1.0);
  }
  return 0.0;
}

double TargetSpec::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    if (u == 0.0 || u == 1.0) {
      if (kind_ == Kind::kGaussianMixture) {
        return u == 0.0 ? -Interval::kInf : Interval::kInf;
      }
      const auto b = breaks();
      return u == 0.0 ? b.front() : b.back();
    }
    throw DomainError("quantile: u must lie in [0, 1]");
  }
  switch (kind_) {
    case Kind::kUniform:
      return a_[0] + u * (a_[1] - a_[0]);
    case Kind::kGaussianMixture:
      if (a_.size() == 1) return b_[0] + c_[0] * normal_quantile(u);
      break;
    case Kind::kHistogram: {
      double acc = 0.0;
      for (std::size_t j = 0; j < b_.size(); ++j) {
        if (b_[j] > 0.0 && (u <= acc + b_[j] || j + 1 == b_.size())) {
          const double frac = std::clamp((u - acc) / b_[j], 0.0, 1.0);
          return a_[j] + frac * (a_[j + 1] - a_[j]);
        }
        acc += b_[j];
      }
      return a_.back();
    }
    case Kind::kPiecewisePolynomial:
      break;
  }
  // Bisection on the CDF.
  double lo;
  double hi;
  if (kind_ == Kind::kGaussianMixture) {
    lo = b_[0] - 40.0 * c_[0];
    hi = b_[0] + 40.0 * c_[0];
    for (std::size_t i = 1; i < a_.size(); ++i) {
      lo = std::min(lo, b_[i] - 40.0 * c_[i]);
      hi = std::max(hi, b_[i] + 40.0 * c_[i]);
    }
  } else {
    lo = poly_.lo();
    hi = poly_.hi();
  }
  for (int it = 0; it < 200 && lo < hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double TargetSpec::sample(Rng& rng) const {
  if (kind_ == Kind::kGaussianMixture) {
    // Component first, then its own inverse CDF.
    double pick = rng.uniform();
    std::size_t i = 0;
    while (i + 1 < a_.size() && pick >= a_[i]) {
      pick -= a_[i];
      ++i;
    }
    return b_[i] + c_[i] * normal_quantile(open_uniform(rng));
  }
  return quantile(open_uniform(rng));
}

double TargetSpec::sample_between(Rng& rng, double u0, double u1) const {
  return quantile(u0 + (u1 - u0) * open_uniform(rng));
}

std::vector<double> TargetSpec::breaks() const {
  switch (kind_) {
    case Kind::kUniform:
    case Kind::kHistogram:
      return a_;
    case Kind::kPiecewisePolynomial:
      return poly_.breakpoints();
    case Kind::kGaussianMixture:
      return {};
  }
  return {};
}

DensityFunction TargetSpec::density() const {
  return {[t = *this](double x) { return t.pdf(x); },
          [t = *this](double x) { return t.cdf(x); }, breaks()};
}

LabeledTarget::LabeledTarget(TargetSpec x, IntervalUnion positive,
                             double eta_in, double eta_out)
    : x_(std::move(x)),
      positive_(std::move(positive)),
      eta_in_(eta_in),
      eta_out_(eta_out) {
  if (!(eta_in >= 0.0 && eta_in <= 1.0 && eta_out >= 0.0 && eta_out <= 1.0)) {
    throw UsageError("labels: eta values must lie in [0, 1]");
  }
}

LabeledTarget LabeledTarget::parse(const TargetSpec& x, const std::string& text) {
  const auto at = text.find('@');
  if (at == std::string::npos) {
    throw UsageError("labels '" + text + "': expected A:B,...@ETA_IN,ETA_OUT");
  }
  std::vector<Interval> regions;
  for (const auto& part : split(text.substr(0, at), ',')) {
    const auto ends = split(part, ':');
    if (ends.size() != 2) throw UsageError("labels: region '" + part + "' is not A:B");
    Interval iv;
    iv.lo = number(ends[0], "labels region");
    iv.hi = number(ends[1], "labels region");
    iv.lo_closed = iv.hi_closed = true;
    if (!(iv.lo < iv.hi)) throw UsageError("labels: region needs A < B");
    regions.push_back(iv);
  }
  const auto eta = numbers(text.substr(at + 1), "labels eta");
  if (eta.size() != 2) throw UsageError("labels: expected ETA_IN,ETA_OUT");
  return LabeledTarget(x, IntervalUnion::from_overlapping(std::move(regions)),
                       eta[0], eta[1]);
}

std::string LabeledTarget::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < positive_.size(); ++i) {
    if (i) out += ",";
    out += fmt(positive_.intervals()[i].lo) + ":" + fmt(positive_.intervals()[i].hi);
  }
  return out + "@" + fmt(eta_in_) + "," + fmt(eta_out_);
}

double LabeledTarget::eta(double x) const {
  return positive_.contains(x) ? eta_in_ : eta_out_;
}

std::vector<double> LabeledTarget::cut_points(const KIntervalHypothesis* h) const {
  std::vector<double> pts;
  auto add = [&](const IntervalUnion& u) {
    for (const auto& iv : u.intervals()) {
      if (std::isfinite(iv.lo)) pts.push_back(iv.lo);
      if (std::isfinite(iv.hi)) pts.push_back(iv.hi);
    }
  };
  add(positive_);
  if (h) add(h->region());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

namespace {

struct Segment {
  double mid;
  double mass;
};

std::vector<Segment> segments(const std::vector<double>& pts,
                              const TargetSpec& x) {
  std::vector<Segment> out;
  if (pts.empty()) return {{0.0, 1.0}};
  out.push_back({pts.front() - 1.0, x.cdf(pts.front())});
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    out.push_back({0.5 * (pts[i] + pts[i + 1]), x.cdf(pts[i + 1]) - x.cdf(pts[i])});
  }
  out.push_back({pts.back() + 1.0, 1.0 - x.cdf(pts.back())});
  return out;
}

}  // namespace

double LabeledTarget::risk(const KIntervalHypothesis& h) const {
  double acc = 0.0;
  for (const auto& s : segments(cut_points(&h), x_)) {
    const double e = eta(s.mid);
    acc += s.mass * (h.predict(s.mid) ? 1.0 - e : e);
  }
  return acc;
}

double LabeledTarget::optimal_risk(std::size_t k) const {
  const auto segs = segments(cut_points(nullptr), x_);
  std::vector<double> gain;
  double base = 0.0;
  for (const auto& s : segs) {
    const double e = eta(s.mid);
    base += s.mass * e;
    gain.push_back(s.mass * (2.0 * e - 1.0));
  }
  return base - max_weight_runs(gain, k).value;
}

AttackSpec AttackSpec::parse(const std::string& text) {
  AttackSpec out;
  if (text.empty() || text == "none") return out;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  std::string where;
  if (const auto at = rest.find('@'); at != std::string::npos) {
    where = rest.substr(at + 1);
    rest = rest.substr(0, at);
  }
  if (kind == "mean_shift") {
    out.kind = Kind::kMeanShift;
  } else if (kind == "spike") {
    out.kind = Kind::kSpike;
  } else if (kind == "replay_skew") {
    out.kind = Kind::kReplaySkew;
  } else if (kind == "label_flip") {
    out.kind = Kind::kLabelFlip;
  } else if (kind == "fk_targeted") {
    out.kind = Kind::kFkTargeted;
  } else {
    throw UsageError("attack: unknown kind '" + kind + "'");
  }
  if (rest.empty()) throw UsageError("attack '" + text + "': missing magnitude");
  out.magnitude = number(rest, "attack magnitude");
  if (out.kind == Kind::kFkTargeted ? out.magnitude < 0.0
                                    : (out.magnitude < 0.0 || out.magnitude > 1.0)) {
    throw UsageError("attack '" + text + "': magnitude out of range");
  }
  auto region = [&]() {
    const auto ends = split(where, ':');
    if (ends.size() != 2) throw UsageError("attack region '" + where + "' is not A:B");
    Interval iv;
    iv.lo = number(ends[0], "attack region");
    iv.hi = number(ends[1], "attack region");
    iv.lo_closed = iv.hi_closed = true;
    if (!(iv.lo < iv.hi)) throw UsageError("attack region needs A < B");
    return iv;
  };
  switch (out.kind) {
    case Kind::kMeanShift:
      if (!where.empty() && where != "bin") out.region = region();
      break;
    case Kind::kLabelFlip:
      if (where.empty()) throw UsageError("label_flip needs a region @A:B");
      out.region = region();
      break;
    case Kind::kSpike:
      if (!where.empty()) out.point = number(where, "spike location");
      break;
    case Kind::kFkTargeted:
      if (!where.empty()) {
        const double k = number(where, "fk_targeted k");
        if (!(k >= 1.0) || k != std::floor(k)) {
          throw UsageError("fk_targeted: k must be a positive integer");
        }
        out.k = static_cast<std::size_t>(k);
      }
      break;
    default:
      if (!where.empty()) throw UsageError("attack '" + kind + "' takes no @ part");
  }
  return out;
}

std::string AttackSpec::to_string() const {
  switch (kind) {
    case Kind::kNone:
      return "none";
    case Kind::kMeanShift:
      return "mean_shift:" + fmt(magnitude) + "@" +
             (region ? fmt(region->lo) + ":" + fmt(region->hi) : "bin");
    case Kind::kSpike:
      return "spike:" + fmt(magnitude) + (point ? "@" + fmt(*point) : "");
    case Kind::kReplaySkew:
      return "replay_skew:" + fmt(magnitude);
    case Kind::kLabelFlip:
      return "label_flip:" + fmt(magnitude) + "@" + fmt(region->lo) + ":" +
             fmt(region->hi);
    case Kind::kFkTargeted:
      return "fk_targeted:" + fmt(magnitude) + "@" + std::to_string(k);
  }
  return {};
}

IntervalUnion fk_targeted_region(const TargetSpec& target, std::size_t k) {
  // Odd slabs of 2k + 1 equal-probability slabs.
  std::vector<Interval> out;
  const double slab = 1.0 / static_cast<double>(2 * k + 1);
  for (std::size_t i = 0; i < k; ++i) {
    Interval iv;
    iv.lo = target.quantile(slab * static_cast<double>(2 * i + 1));
    iv.hi = target.quantile(slab * static_cast<double>(2 * i + 2));
    iv.lo_closed = iv.hi_closed = true;
    out.push_back(iv);
  }
  return IntervalUnion::from_overlapping(std::move(out));
}

std::vector<std::vector<double>> attack_fk_targeted(
    std::span<const Batch> good, const TargetSpec& target, std::size_t k,
    std::size_t n, std::size_t count, double tau, double magnitude, Rng& rng) {
  std::vector<std::vector<double>> out;
  if (count == 0) return out;
  if (k == 0 || n == 0) throw UsageError("attack_fk_targeted: k and n must be >= 1");
  const IntervalUnion region = fk_targeted_region(target, k);
  const double slab = 1.0 / static_cast<double>(2 * k + 1);

  double med = static_cast<double>(k) * slab;
  if (!good.empty()) {
    std::vector<double> probs;
    for (const auto& b : good) probs.push_back(empirical_prob(b, region));
    std::sort(probs.begin(), probs.end());
    const std::size_t h = probs.size() / 2;
    med = probs.size() % 2 ? probs[h] : 0.5 * (probs[h - 1] + probs[h]);
  }
  const double nn = static_cast<double>(n);
  const auto inside = static_cast<std::size_t>(std::min(
      nn, std::floor(nn * (med + tau * (1.0 + magnitude))) + 1.0));

  for (std::size_t b = 0; b < count; ++b) {
    std::vector<double> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Odd slabs are inside the region, even ones outside.
      const bool in = i < inside;
      const std::size_t choices = in ? k : k + 1;
      const auto pick = static_cast<std::size_t>(rng.below(choices));
      const std::size_t s = in ? 2 * pick + 1 : 2 * pick;
      samples.push_back(target.sample_between(rng, slab * static_cast<double>(s),
                                              slab * static_cast<double>(s + 1)));
    }
    out.push_back(std::move(samples));
  }
  return out;
}

std::size_t good_batch_count(std::size_t m, double beta) {
  return static_cast<std::size_t>(
      std::floor((1.0 - beta) * static_cast<double>(m) + 1e-9));
}

BatchCollection build_collection(const TargetSpec& target,
                                 const AttackSpec& attack,
                                 const SimulationConfig& config,
                                 const LabeledTarget* labels) {
  if (!(config.beta >= 0.0 && config.beta <= CorruptionParams::kMaxBeta)) {
    throw DomainError("simulate: beta must lie in [0, 0.4]");
  }
  if (config.m == 0 || config.n == 0) {
    throw UsageError("simulate: m and n must be >= 1");
  }
  if (attack.kind == AttackSpec::Kind::kLabelFlip && labels == nullptr) {
    throw UsageError("simulate: label_flip needs a labeled target");
  }
  const TargetSpec& xs = labels ? labels->x() : target;
  const std::size_t m = config.m;
  const std::size_t n = config.n;
  const std::size_t good_count = good_batch_count(m, config.beta);
  const std::size_t adv_count = m - good_count;

  auto label_for = [&](double x, Rng& rng) -> std::uint8_t {
    return rng.uniform() < labels->eta(x) ? 1 : 0;
  };

  std::vector<Batch> good(good_count);
  parallel_for(good_count, config.threads, [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, 1, i));
    Batch& b = good[i];
    b.samples.resize(n);
    if (labels) b.labels.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      b.samples[j] = xs.sample(rng);
      if (labels) b.labels[j] = label_for(b.samples[j], rng);
    }
  });

  std::vector<Batch> adv(adv_count);
  if (attack.kind == AttackSpec::Kind::kFkTargeted) {
    const double tau = config.beta > 0.0
                           ? CorruptionParams(config.beta, n, m).tau()
                           : 0.0;
    Rng rng(derive_seed(config.seed, 2));
    auto samples = attack_fk_targeted(good, xs, attack.k, n, adv_count, tau,
                                      attack.magnitude, rng);
    for (std::size_t i = 0; i < adv_count; ++i) {
      adv[i].samples = std::move(samples[i]);
      if (labels) {
        for (double x : adv[i].samples) adv[i].labels.push_back(label_for(x, rng));
      }
    }
  } else {
    std::vector<double> pooled;
    if (attack.kind == AttackSpec::Kind::kReplaySkew) {
      for (const auto& b : good) pooled.insert(pooled.end(), b.samples.begin(), b.samples.end());
      std::sort(pooled.begin(), pooled.end());
      if (pooled.empty()) throw UsageError("replay_skew needs good batches to replay");
    }
    Interval region;
    if (attack.region) {
      region = *attack.region;
    } else {
      region.lo = xs.quantile(0.5);
      region.hi = xs.quantile(0.51);
    }
    const double spike = attack.point ? *attack.point : xs.quantile(0.5);
    double flip_label = 0.0;
    if (attack.kind == AttackSpec::Kind::kLabelFlip) {
      flip_label = labels->eta(0.5 * (region.lo + region.hi)) > 0.5 ? 0.0 : 1.0;
    }
    parallel_for(adv_count, config.threads, [&](std::size_t i) {
      Rng rng(derive_seed(config.seed, 2, i));
      Batch& b = adv[i];
      b.samples.resize(n);
      if (labels) b.labels.resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        const bool hit = rng.uniform() < attack.magnitude;
        double x;
        bool flipped = false;
        switch (attack.kind) {
          case AttackSpec::Kind::kMeanShift:
            x = hit ? rng.uniform(region.lo, region.hi) : xs.sample(rng);
            break;
          case AttackSpec::Kind::kSpike:
            x = hit ? spike : xs.sample(rng);
            break;
          case AttackSpec::Kind::kReplaySkew: {
            const std::size_t half = pooled.size() / 2;
            x = hit ? pooled[half + rng.below(pooled.size() - half)]
                    : pooled[rng.below(pooled.size())];
            break;
          }
          case AttackSpec::Kind::kLabelFlip:
            x = hit ? rng.uniform(region.lo, region.hi) : xs.sample(rng);
            flipped = hit;
            break;
          default:
            x = xs.sample(rng);
        }
        b.samples[j] = x;
        if (labels) {
          b.labels[j] = flipped ? static_cast<std::uint8_t>(flip_label)
                                : label_for(x, rng);
        }
      }
    });
  }

  // Deterministic positions for the adversarial batches.
  std::vector<std::size_t> position(m);
  for (std::size_t i = 0; i < m; ++i) position[i] = i;
  Rng shuffle(derive_seed(config.seed, 3));
  for (std::size_t i = m; i > 1; --i) {
    std::swap(position[i - 1], position[shuffle.below(i)]);
  }
  std::vector<Batch> batches(m);
  std::vector<Truth> truth(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t pos = position[i];
    if (i < good_count) {
      batches[pos] = std::move(good[i]);
      truth[pos] = Truth::kGood;
    } else {
      batches[pos] = std::move(adv[i - good_count]);
      truth[pos] = Truth::kAdversarial;
    }
    batches[pos].id = static_cast<std::int64_t>(pos);
  }
  return BatchCollection(std::move(batches), std::move(truth));
}

SimulationMetrics compute_metrics(const BatchCollection& collection,
                                  std::span<const std::size_t> retained,
                                  const TargetSpec& target,
                                  const IntervalPartition& partition,
                                  std::size_t k, const PiecewisePolynomial* fit,
                                  const KIntervalHypothesis* hypothesis,
                                  const LabeledTarget* labels) {
  if (!collection.has_truth()) {
    throw UsageError("metrics: the collection carries no truth flags");
  }
  const auto& truth = *collection.truth();
  SimulationMetrics out;
  std::size_t good = 0;
  std::size_t good_kept = 0;
  for (auto t : truth) good += t == Truth::kGood;
  for (auto i : retained) {
    if (truth[i] == Truth::kGood) {
      ++good_kept;
    } else {
      ++out.retained_adversarial;
    }
  }
  out.retention_good =
      good == 0 ? 1.0 : static_cast<double>(good_kept) / static_cast<double>(good);

  const auto reference =
      cell_masses([&](double x) { return target.cdf(x); }, partition);
  auto pooled = [&](std::span<const std::size_t> sub) {
    std::vector<double> masses(partition.ell(), 0.0);
    for (auto i : sub) {
      for (double x : collection.batch(i).samples) masses[partition.bin_of(x)] += 1.0;
    }
    const double total = static_cast<double>(sub.size() * collection.n());
    for (auto& v : masses) v /= total;
    return masses;
  };
  out.fk_before = fk_distance(pooled(all_indices(collection.m())), reference, k);
  if (!retained.empty()) out.fk_after = fk_distance(pooled(retained), reference, k);
  if (fit) out.tv_fit = evaluate_density(*fit, target.density());
  if (hypothesis && labels) {
    out.excess_risk = labels->risk(*hypothesis) - labels->optimal_risk(k);
  }
  return out;
}

double opt_piecewise(const TargetSpec& target, std::size_t t, std::size_t d,
                     std::size_t cells) {
  if (cells < 2) throw UsageError("opt_piecewise: need at least 2 cells");
  const double lo = target.quantile(1e-9);
  const double hi = target.quantile(1.0 - 1e-9);
  std::vector<double> cuts;
  for (std::size_t i = 1; i < cells; ++i) {
    cuts.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells));
  }
  IntervalPartition partition(cuts);
  auto masses = cell_masses([&](double x) { return target.cdf(x); }, partition);
  double sum = 0.0;
  for (double v : masses) sum += v;
  for (auto& v : masses) v /= sum;
  FitOptions options;
  options.t = t;
  options.d = d;
  const auto fit = fit_piecewise(masses, partition, lo, hi, options);
  return evaluate_density(fit.fit, target.density());
}

}  // namespace robust_batches
