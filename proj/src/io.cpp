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


#include "robust_batches/io.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <istream>
#include <ostream>
#include <sstream>

#include "robust_batches/error.hpp"

namespace robust_batches {
namespace {

std::string where(std::size_t line) { return "line " + std::to_string(line) + ": "; }

const Json& field(const Json& obj, const char* name, std::size_t line) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw UsageError(where(line) + "missing field \"" + std::string(name) + "\"");
  }
  return obj.at(name);
}

std::size_t positive_int(const Json& v, const char* name, std::size_t line) {
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw UsageError(where(line) + "field \"" + std::string(name) +
                     "\" must be a positive integer");
  }
  return v.get<std::size_t>();
}

double finite_number(const Json& v, const std::string& what, std::size_t line) {
  if (!v.is_number()) throw UsageError(where(line) + what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw UsageError(where(line) + what + " must be finite");
  return x;
}

Json number_or_null(double x) {
  return std::isfinite(x) ? Json(x) : Json(nullptr);
}

}  // namespace

BatchCollection read_batches(std::istream& in) {
  std::string text;
  std::size_t line = 0;
  std::optional<std::size_t> n;
  std::optional<std::size_t> m;
  std::vector<Batch> batches;
  std::vector<Truth> truth;
  bool any_truth = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw UsageError(where(line) + "invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw UsageError(where(line) + "expected a JSON object");
    if (!n) {
      n = positive_int(field(obj, "n", line), "n", line);
      m = positive_int(field(obj, "m", line), "m", line);
      continue;
    }
    Batch b;
    const Json& id = field(obj, "id", line);
    if (!id.is_number_integer()) throw UsageError(where(line) + "field \"id\" must be an integer");
    b.id = id.get<std::int64_t>();
    const Json& samples = field(obj, "samples", line);
    if (!samples.is_array()) throw UsageError(where(line) + "field \"samples\" must be an array");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Json& s = samples[i];
      const std::string what = "samples[" + std::to_string(i) + "]";
      if (s.is_array()) {
        if (s.size() != 2) throw UsageError(where(line) + what + " must be [x, y]");
        b.samples.push_back(finite_number(s[0], what, line));
        if (!s[1].is_number_integer() || (s[1].get<long long>() != 0 && s[1].get<long long>() != 1)) {
          throw UsageError(where(line) + what + " label must be 0 or 1");
        }
        b.labels.push_back(static_cast<std::uint8_t>(s[1].get<int>()));
      } else {
        b.samples.push_back(finite_number(s, what, line));
      }
    }
    if (!b.labels.empty() && b.labels.size() != b.samples.size()) {
      throw UsageError(where(line) + "samples mix labeled and unlabeled entries");
    }
    if (b.samples.size() != *n) {
      throw UsageError(where(line) + "field \"samples\" has " +
                       std::to_string(b.samples.size()) + " entries, header says n = " +
                       std::to_string(*n));
    }
    if (obj.contains("truth")) {
      const Json& t = obj.at("truth");
      if (t == "good") {
        truth.push_back(Truth::kGood);
      } else if (t == "adversarial") {
        truth.push_back(Truth::kAdversarial);
      } else {
        throw UsageError(where(line) + "field \"truth\" must be \"good\" or \"adversarial\"");
      }
      any_truth = true;
    } else {
      if (any_truth) throw UsageError(where(line) + "field \"truth\" missing on some batches");
    }
    if (any_truth && truth.size() != batches.size() + 1) {
      throw UsageError(where(line) + "field \"truth\" missing on some batches");
    }
    batches.push_back(std::move(b));
  }
  if (!n) throw UsageError("batch file: missing header line {\"n\", \"m\"}");
  if (batches.size() != *m) {
    throw UsageError("batch file: header says m = " + std::to_string(*m) +
                     " but " + std::to_string(batches.size()) + " batches follow");
  }
  if (any_truth) return BatchCollection(std::move(batches), std::move(truth));
  return BatchCollection(std::move(batches));
}

BatchCollection read_batches_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input file '" + path + "'");
  return read_batches(in);
}

void write_batches(std::ostream& out, const BatchCollection& collection,
                   const Json& extra) {
  Json header = {{"n", collection.n()}, {"m", collection.m()}};
  for (const auto& [key, value] : extra.items()) header[key] = value;
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < collection.m(); ++i) {
    const Batch& b = collection.batch(i);
    Json line = {{"id", b.id}};
    Json samples = Json::array();
    for (std::size_t j = 0; j < b.samples.size(); ++j) {
      if (b.labeled()) {
        samples.push_back(Json::array({b.samples[j], static_cast<int>(b.labels[j])}));
      } else {
        samples.push_back(b.samples[j]);
      }
    }
    line["samples"] = std::move(samples);
    if (collection.has_truth()) {
      line["truth"] = (*collection.truth())[i] == Truth::kGood ? "good" : "adversarial";
    }
    out << line.dump() << '\n';
  }
}

Json to_json(const IntervalPartition& partition) {
  return {{"ell", partition.ell()}, {"boundaries", partition.boundaries()}};
}

IntervalPartition partition_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("boundaries") || !j.at("boundaries").is_array()) {
    throw UsageError("partition: missing field \"boundaries\"");
  }
  std::vector<double> cuts;
  for (const auto& v : j.at("boundaries")) {
    cuts.push_back(finite_number(v, "partition boundary", 1));
  }
  IntervalPartition p(std::move(cuts));
  if (j.contains("ell") && j.at("ell") != p.ell()) {
    throw UsageError("partition: field \"ell\" disagrees with the boundaries");
  }
  return p;
}

Json to_json(const PiecewisePolynomial& fit) {
  return {{"breakpoints", fit.breakpoints()}, {"coefficients", fit.coefficients()}};
}

PiecewisePolynomial fit_from_json(const Json& j) {
  const Json& f = j.contains("fit") ? j.at("fit") : j;
  if (!f.contains("breakpoints") || !f.contains("coefficients")) {
    throw UsageError("fit: missing field \"breakpoints\" or \"coefficients\"");
  }
  try {
    return PiecewisePolynomial(f.at("breakpoints").get<std::vector<double>>(),
                               f.at("coefficients").get<std::vector<std::vector<double>>>());
  } catch (const Json::exception& e) {
    throw UsageError(std::string("fit: malformed numbers (") + e.what() + ")");
  }
}

Json to_json(const KIntervalHypothesis& h) {
  Json intervals = Json::array();
  for (const auto& iv : h.region().intervals()) {
    intervals.push_back({{"lo", number_or_null(iv.lo)},
                         {"hi", number_or_null(iv.hi)},
                         {"lo_closed", iv.lo_closed},
                         {"hi_closed", iv.hi_closed}});
  }
  return {{"intervals", intervals}};
}

KIntervalHypothesis hypothesis_from_json(const Json& j) {
  const Json& h = j.contains("hypothesis") ? j.at("hypothesis") : j;
  if (!h.contains("intervals")) throw UsageError("hypothesis: missing field \"intervals\"");
  std::vector<Interval> out;
  for (const auto& v : h.at("intervals")) {
    Interval iv;
    iv.lo = v.at("lo").is_null() ? -Interval::kInf : v.at("lo").get<double>();
    iv.hi = v.at("hi").is_null() ? Interval::kInf : v.at("hi").get<double>();
    iv.lo_closed = v.at("lo_closed").get<bool>();
    iv.hi_closed = v.at("hi_closed").get<bool>();
    out.push_back(iv);
  }
  return KIntervalHypothesis(IntervalUnion(std::move(out)));
}

Json to_json(const CleaningRound& round) {
  return {{"subset", round.subset.members()},
          {"score", round.score},
          {"median", round.median},
          {"removed", round.removed}};
}

namespace {

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? Json(*v) : Json(nullptr);
}

Json rounds_json(const std::vector<CleaningRound>& rounds) {
  Json out = Json::array();
  for (const auto& r : rounds) out.push_back(to_json(r));
  return out;
}

}  // namespace

Json to_json(const CleaningReport& r) {
  Json j;
  j["m"] = r.m;
  j["n"] = r.n;
  j["ell"] = r.ell;
  j["k"] = r.k;
  j["beta"] = r.beta;
  j["tau"] = r.tau;
  j["kappa_g"] = r.kappa_g;
  j["rounds"] = r.rounds.size();
  j["final_score"] = r.final_score;
  j["max_cell_occupancy"] = r.max_cell_occupancy;
  put_optional(j, "fk_before", r.fk_before);
  put_optional(j, "fk_after", r.fk_after);
  put_optional(j, "retention_good", r.retention_good);
  put_optional(j, "removed_adversarial", r.removed_adversarial);
  put_optional(j, "removed_good", r.removed_good);
  j["retained_count"] = r.retained_ids.size();
  j["retained_ids"] = r.retained_ids;
  j["round_log"] = rounds_json(r.rounds);
  j["warnings"] = r.warnings;
  j["partition"] = to_json(r.partition);
  return j;
}

Json to_json(const ClassifyReport& r) {
  Json j;
  j["m"] = r.m;
  j["n"] = r.n;
  j["k"] = r.k;
  j["beta"] = r.beta;
  j["tau"] = r.tau;
  j["kappa_g"] = r.kappa_g;
  j["ell_label0"] = r.ell_label0;
  j["ell_label1"] = r.ell_label1;
  j["rounds"] = r.rounds.size();
  j["final_score"] = r.final_score;
  j["empirical_loss"] = r.empirical_loss;
  put_optional(j, "retention_good", r.retention_good);
  j["retained_count"] = r.retained_ids.size();
  j["retained_ids"] = r.retained_ids;
  j["round_log"] = rounds_json(r.rounds);
  j["warnings"] = r.warnings;
  return j;
}

namespace {

void flatten(const Json& j, const std::string& prefix, std::ostringstream& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten(value, name, out);
    } else if (value.is_array()) {
      out << name << "_count," << value.size() << '\n';
    } else if (value.is_string()) {
      std::string s = value.get<std::string>();
      if (s.find_first_of(",\"\n") != std::string::npos) {
        std::string quoted = "\"";
        for (char ch : s) {
          if (ch == '"') quoted += '"';
          quoted += ch;
        }
        s = quoted + "\"";
      }
      out << name << ',' << s << '\n';
    } else {
      out << name << ',' << value.dump() << '\n';
    }
  }
}

}  // namespace

std::string to_csv(const Json& report) {
  std::ostringstream out;
  out << "key,value\n";
  flatten(report, "", out);
  return out.str();
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw UsageError("'" + path + "' is not valid JSON (" + e.what() + ")");
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace robust_batches
