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


// Reading and writing batch files, partitions, fits and reports.
//
// Batch files are JSON lines: a header {"n": N, "m": M, ...} followed by one
// {"id": I, "samples": [...], "truth": "good"|"adversarial"} per batch.
// Labeled samples are [x, y] pairs.

#ifndef ROBUST_BATCHES_IO_HPP_
#define ROBUST_BATCHES_IO_HPP_

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "robust_batches/classify.hpp"
#include "robust_batches/clean.hpp"
#include "robust_batches/core.hpp"
#include "robust_batches/estimate.hpp"
#include "robust_batches/partition.hpp"

namespace robust_batches {

using Json = nlohmann::ordered_json;

// Throws UsageError naming the line and field on malformed input.
BatchCollection read_batches(std::istream& in);
BatchCollection read_batches_file(const std::string& path);

// `extra` fields are merged into the header line.
void write_batches(std::ostream& out, const BatchCollection& collection,
                   const Json& extra = Json::object());

Json to_json(const IntervalPartition& partition);
IntervalPartition partition_from_json(const Json& j);

Json to_json(const PiecewisePolynomial& fit);
PiecewisePolynomial fit_from_json(const Json& j);

// Intervals as {"lo", "hi", "lo_closed", "hi_closed"}; infinite ends are null.
Json to_json(const KIntervalHypothesis& h);
KIntervalHypothesis hypothesis_from_json(const Json& j);

Json to_json(const CleaningRound& round);
Json to_json(const CleaningReport& report);
Json to_json(const ClassifyReport& report);

// Top-level scalars of a report as "key,value" lines; nested objects are
// flattened with dotted keys and arrays are written as their length.
std::string to_csv(const Json& report);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_IO_HPP_
