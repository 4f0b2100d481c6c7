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

#ifndef ROBUST_BATCHES_SETS_HPP_
#define ROBUST_BATCHES_SETS_HPP_

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <vector>

namespace robust_batches {

// A subset of the discrete domain {0, ..., ell-1}. Members are kept sorted
// and unique, so comparison is the lexicographic order on sorted members
// (the empty set is smallest).
class BinSubset {
 public:
  BinSubset() = default;
  explicit BinSubset(std::vector<std::size_t> members);
  BinSubset(std::initializer_list<std::size_t> members);

  const std::vector<std::size_t>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(std::size_t bin) const;

  // Largest member + 1, or 0 when empty.
  std::size_t extent() const {
    return members_.empty() ? 0 : members_.back() + 1;
  }

  // Number of maximal runs of consecutive bins.
  std::size_t run_count() const;

  // Indicator vector of length ell; throws UsageError if a member >= ell.
  std::vector<char> mask(std::size_t ell) const;

  BinSubset complement(std::size_t ell) const;

  auto operator<=>(const BinSubset&) const = default;

 private:
  std::vector<std::size_t> members_;
};

struct Interval {
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  double lo = -kInf;
  double hi = kInf;
  bool lo_closed = false;
  bool hi_closed = false;

  bool contains(double x) const {
    const bool above = lo_closed ? x >= lo : x > lo;
    const bool below = hi_closed ? x <= hi : x < hi;
    return above && below;
  }

  bool empty() const {
    return lo > hi || (lo == hi && !(lo_closed && hi_closed));
  }

  // True when every real in `inner` lies in this interval.
  bool covers(const Interval& inner) const;

  bool operator==(const Interval&) const = default;
};

// Disjoint, sorted union of intervals. Adjacent intervals that touch without
// a gap (e.g. (a,b] and (b,c]) are kept separate only when the caller builds
// them that way; lift_subset merges them.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  // Throws UsageError unless the intervals are nonempty, sorted and disjoint.
  explicit IntervalUnion(std::vector<Interval> intervals);

  const std::vector<Interval>& intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }
  bool empty() const { return intervals_.empty(); }
  bool contains(double x) const;

  // Normalizes possibly overlapping intervals into a disjoint sorted union.
  static IntervalUnion from_overlapping(std::vector<Interval> intervals);

  bool operator==(const IntervalUnion&) const = default;

 private:
  std::vector<Interval> intervals_;
};

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_SETS_HPP_
