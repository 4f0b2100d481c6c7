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

#include "robust_batches/sets.hpp"

#include <algorithm>
#include <string>

#include "robust_batches/error.hpp"

namespace robust_batches {

BinSubset::BinSubset(std::vector<std::size_t> members)
    : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw UsageError("BinSubset: duplicate bin index");
  }
}

BinSubset::BinSubset(std::initializer_list<std::size_t> members)
    : BinSubset(std::vector<std::size_t>(members)) {}

bool BinSubset::contains(std::size_t bin) const {
  return std::binary_search(members_.begin(), members_.end(), bin);
}

std::size_t BinSubset::run_count() const {
  std::size_t runs = 0;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (i == 0 || members_[i] != members_[i - 1] + 1) ++runs;
  }
  return runs;
}

std::vector<char> BinSubset::mask(std::size_t ell) const {
  if (extent() > ell) {
    throw UsageError("BinSubset: bin index " + std::to_string(members_.back()) +
                     " outside domain of size " + std::to_string(ell));
  }
  std::vector<char> out(ell, 0);
  for (auto j : members_) out[j] = 1;
  return out;
}

BinSubset BinSubset::complement(std::size_t ell) const {
  const auto m = mask(ell);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < ell; ++j) {
    if (!m[j]) out.push_back(j);
  }
  return BinSubset(std::move(out));
}

bool Interval::covers(const Interval& inner) const {
  if (inner.empty()) return true;
  const bool left_ok = inner.lo > lo || (inner.lo == lo && (lo_closed || !inner.lo_closed));
  const bool right_ok = inner.hi < hi || (inner.hi == hi && (hi_closed || !inner.hi_closed));
  return left_ok && right_ok;
}

namespace {

// True if `a` ends strictly before `b` starts with no shared point.
bool strictly_before(const Interval& a, const Interval& b) {
  return a.hi < b.lo || (a.hi == b.lo && !(a.hi_closed && b.lo_closed));
}

}  // namespace

IntervalUnion::IntervalUnion(std::vector<Interval> intervals)
    : intervals_(std::move(intervals)) {
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (intervals_[i].empty()) throw UsageError("IntervalUnion: empty interval");
    if (i > 0 && !strictly_before(intervals_[i - 1], intervals_[i])) {
      throw UsageError("IntervalUnion: intervals must be sorted and disjoint");
    }
  }
}

bool IntervalUnion::contains(double x) const {
  // First interval whose upper end is not below x.
  auto it = std::lower_bound(
      intervals_.begin(), intervals_.end(), x,
      [](const Interval& iv, double v) { return iv.hi < v; });
  return it != intervals_.end() && it->contains(x);
}

IntervalUnion IntervalUnion::from_overlapping(std::vector<Interval> intervals) {
  std::erase_if(intervals, [](const Interval& iv) { return iv.empty(); });
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) {
              if (a.lo != b.lo) return a.lo < b.lo;
              return a.lo_closed && !b.lo_closed;
            });
  std::vector<Interval> merged;
  for (const auto& iv : intervals) {
    if (merged.empty() || strictly_before(merged.back(), iv)) {
      merged.push_back(iv);
      continue;
    }
    auto& last = merged.back();
    if (iv.hi > last.hi || (iv.hi == last.hi && iv.hi_closed)) {
      last.hi = iv.hi;
      last.hi_closed = iv.hi_closed;
    }
  }
  return IntervalUnion(std::move(merged));
}

}  // namespace robust_batches
