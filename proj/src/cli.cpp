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


#include "robust_batches/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "robust_batches/classify.hpp"
#include "robust_batches/clean.hpp"
#include "robust_batches/error.hpp"
#include "robust_batches/estimate.hpp"
#include "robust_batches/io.hpp"
#include "robust_batches/selftest.hpp"
#include "robust_batches/simulate.hpp"

namespace robust_batches {
namespace {

struct Flags {
  std::string input;
  std::string out;
  std::string retained;
  std::string partition_out;
  std::string fit_out;
  std::string report_in;
  std::string format = "json";
  std::string target;
  std::string labels;
  std::string attack = "none";
  std::string detector = "spectral";
  std::uint64_t seed = 0;
  double beta = 0.1;
  std::size_t k = 0;  // 0 = command default
  std::size_t t = 1;
  std::size_t d = 1;
  std::size_t m = 1000;
  std::size_t n = 100;
  std::size_t candidates = 0;
  std::size_t grid = 128;
  std::size_t ell = 0;
  int threads = -1;
  bool no_clean = false;
};

std::size_t resolve_threads(int flag) {
  if (flag >= 0) return static_cast<std::size_t>(flag);
  if (const char* env = std::getenv("ROBUST_BATCHES_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 0) return static_cast<std::size_t>(v);
    throw UsageError("ROBUST_BATCHES_THREADS must be a nonnegative integer");
  }
  return 0;
}

DetectorOptions detector_options(const Flags& f) {
  DetectorOptions d;
  d.kind = f.detector == "brute" ? DetectorKind::kBrute : DetectorKind::kSpectral;
  d.candidates = f.candidates;
  d.seed = derive_seed(f.seed, 0xd7);
  d.threads = resolve_threads(f.threads);
  return d;
}

Json detector_config(const Flags& f) {
  return {{"detector", f.detector}, {"candidates", f.candidates}};
}

void emit(const Json& doc, const Flags& f, std::ostream& out) {
  const std::string text = f.format == "csv" ? to_csv(doc) : doc.dump(2) + "\n";
  if (f.out.empty() || f.out == "-") {
    out << text;
  } else {
    write_text_file(f.out, text);
  }
}

Json envelope(const std::string& command, Json config) {
  Json doc;
  doc["command"] = command;
  doc["generator_version"] = kGeneratorVersion;
  doc["config"] = std::move(config);
  return doc;
}

void write_retained(const std::string& path, const BatchCollection& collection,
                    const SubCollection& retained) {
  if (path.empty()) return;
  std::ostringstream text;
  write_batches(text, collection.select(retained));
  write_text_file(path, text.str());
}

std::optional<TargetSpec> optional_target(const Flags& f) {
  if (f.target.empty()) return std::nullopt;
  return TargetSpec::parse(f.target);
}

int cmd_simulate(const Flags& f, std::ostream& out) {
  const auto target = TargetSpec::parse(f.target);
  const auto attack = AttackSpec::parse(f.attack);
  std::optional<LabeledTarget> labels;
  if (!f.labels.empty()) labels = LabeledTarget::parse(target, f.labels);
  SimulationConfig config{f.m, f.n, f.beta, f.seed, resolve_threads(f.threads)};
  const auto coll = build_collection(target, attack, config, labels ? &*labels : nullptr);
  Json extra;
  extra["generator_version"] = kGeneratorVersion;
  extra["config"] = {{"target", target.to_string()},
                     {"labels", labels ? labels->to_string() : ""},
                     {"attack", attack.to_string()},
                     {"m", f.m},
                     {"n", f.n},
                     {"beta", f.beta},
                     {"seed", f.seed}};
  std::ostringstream text;
  write_batches(text, coll, extra);
  if (f.out.empty() || f.out == "-") {
    out << text.str();
  } else {
    write_text_file(f.out, text.str());
  }
  return kExitOk;
}

int cmd_clean(const Flags& f, std::ostream& out) {
  const auto coll = read_batches_file(f.input);
  const auto target = optional_target(f);
  CleanOptions opts;
  opts.k = f.k == 0 ? 2 : f.k;
  opts.beta = f.beta;
  opts.detector = detector_options(f);
  if (f.ell) opts.ell = f.ell;
  Rng rng(derive_seed(f.seed, 0xc1));
  std::function<double(double)> cdf;
  if (target) cdf = [&](double x) { return target->cdf(x); };
  const auto result = robust_clean_fk(coll, opts, rng, cdf);

  Json config = {{"input", f.input}, {"k", opts.k}, {"beta", f.beta},
                 {"seed", f.seed},   {"target", f.target}};
  config.update(detector_config(f));
  if (f.ell) config["ell"] = f.ell;
  Json doc = envelope("clean", std::move(config));
  doc["report"] = to_json(result.report);
  emit(doc, f, out);
  write_retained(f.retained, coll, result.retained);
  if (!f.partition_out.empty()) {
    write_text_file(f.partition_out, to_json(result.report.partition).dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_estimate(const Flags& f, std::ostream& out) {
  const auto coll = read_batches_file(f.input);
  const auto target = optional_target(f);
  const std::size_t k = f.k == 0 ? std::max<std::size_t>(1, 2 * f.t * f.d) : f.k;
  if (!(f.beta > 0.0) || f.beta > CorruptionParams::kMaxBeta) {
    throw DomainError("beta must lie in (0, 0.4]; the cleaning guarantees "
                      "assume at most a 0.4 fraction of adversarial batches");
  }
  const auto pooled = coll.pooled_sorted_samples();
  IntervalPartition partition;
  SubCollection retained = all_indices(coll.m());
  Json clean_json = nullptr;
  if (f.no_clean) {
    const std::size_t ell = f.ell ? f.ell : choose_ell(k, coll.n(), f.beta, pooled.size());
    partition = build_partition(pooled, ell);
  } else {
    CleanOptions opts;
    opts.k = k;
    opts.beta = f.beta;
    opts.detector = detector_options(f);
    if (f.ell) opts.ell = f.ell;
    Rng rng(derive_seed(f.seed, 0xc1));
    std::function<double(double)> cdf;
    if (target) cdf = [&](double x) { return target->cdf(x); };
    auto result = robust_clean_fk(coll, opts, rng, cdf);
    retained = std::move(result.retained);
    partition = result.report.partition;
    clean_json = to_json(result.report);
  }
  if (retained.empty()) throw std::runtime_error("cleaning removed every batch");
  const auto masses = pooled_empirical(discretize(coll, partition), retained);

  FitOptions fit_opts;
  fit_opts.d = f.d;
  fit_opts.grid_limit = f.grid;
  fit_opts.threads = resolve_threads(f.threads);
  std::vector<FitResult> fits;
  std::vector<std::vector<double>> candidate_masses;
  for (std::size_t pieces = 1; pieces <= f.t; ++pieces) {
    fit_opts.t = pieces;
    fits.push_back(fit_piecewise(masses, partition, pooled.front(), pooled.back(), fit_opts));
    candidate_masses.push_back(fits.back().fit.cell_masses(partition));
  }
  const std::size_t chosen = yatracos_select(candidate_masses, masses, k);
  const FitResult& best = fits[chosen];

  Json config = {{"input", f.input}, {"beta", f.beta}, {"t", f.t},
                 {"d", f.d},         {"k", k},         {"seed", f.seed},
                 {"clean", !f.no_clean}, {"grid", f.grid}, {"target", f.target}};
  config.update(detector_config(f));
  if (f.ell) config["ell"] = f.ell;
  Json doc = envelope("estimate", std::move(config));
  Json report;
  report["chosen_candidate_pieces"] = chosen + 1;
  report["fit_pieces"] = best.fit.pieces();
  report["fk_distance_to_cleaned"] = best.fk_distance;
  report["l1_mass_error"] = best.l1_mass_error;
  report["flagged"] = best.flagged;
  report["notes"] = best.notes;
  Json per = Json::array();
  for (const auto& c : fits) per.push_back(c.fk_distance);
  report["candidate_fk_distances"] = per;
  report["tv_fit"] = target ? Json(evaluate_density(best.fit, target->density())) : Json(nullptr);
  report["retained_count"] = retained.size();
  report["cleaning"] = clean_json;
  doc["report"] = report;
  doc["fit"] = to_json(best.fit);
  emit(doc, f, out);
  if (!f.fit_out.empty()) write_text_file(f.fit_out, to_json(best.fit).dump(2) + "\n");
  write_retained(f.retained, coll, retained);
  return kExitOk;
}

int cmd_classify(const Flags& f, std::ostream& out) {
  const auto coll = read_batches_file(f.input);
  ClassifyOptions opts;
  opts.k = f.k == 0 ? 2 : f.k;
  opts.beta = f.beta;
  opts.detector = detector_options(f);
  opts.clean = !f.no_clean;
  Rng rng(derive_seed(f.seed, 0xc1));
  const auto result = robust_classify(coll, opts, rng);

  Json config = {{"input", f.input}, {"k", opts.k}, {"beta", f.beta},
                 {"seed", f.seed}, {"clean", opts.clean},
                 {"target", f.target}, {"labels", f.labels}};
  config.update(detector_config(f));
  Json doc = envelope("classify", std::move(config));
  Json report = to_json(result.report);
  if (!f.target.empty() && !f.labels.empty()) {
    const auto labeled = LabeledTarget::parse(TargetSpec::parse(f.target), f.labels);
    const double r = labeled.risk(result.hypothesis);
    report["risk"] = r;
    report["excess_risk"] = r - labeled.optimal_risk(opts.k);
  }
  doc["report"] = report;
  doc["hypothesis"] = to_json(result.hypothesis);
  emit(doc, f, out);
  write_retained(f.retained, coll, result.retained);
  return kExitOk;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  const auto coll = read_batches_file(f.input);
  const auto target = TargetSpec::parse(f.target);
  const Json prior = read_json_file(f.report_in);
  const Json& rep = prior.contains("report") ? prior.at("report") : prior;

  std::map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < coll.m(); ++i) index[coll.batch(i).id] = i;
  SubCollection retained;
  const Json* ids = nullptr;
  if (rep.contains("retained_ids")) ids = &rep.at("retained_ids");
  if (!ids && rep.contains("cleaning") && rep.at("cleaning").is_object()) {
    ids = &rep.at("cleaning").at("retained_ids");
  }
  if (ids) {
    for (const auto& id : *ids) {
      auto it = index.find(id.get<std::int64_t>());
      if (it == index.end()) throw UsageError("report: retained id not in the input");
      retained.push_back(it->second);
    }
    std::sort(retained.begin(), retained.end());
  } else {
    retained = all_indices(coll.m());
  }
  const std::size_t k = f.k == 0 ? 2 : f.k;

  IntervalPartition partition;
  const Json* part = nullptr;
  if (rep.contains("partition")) part = &rep.at("partition");
  if (!part && rep.contains("cleaning") && rep.at("cleaning").is_object()) {
    part = &rep.at("cleaning").at("partition");
  }
  if (part) {
    partition = partition_from_json(*part);
  } else {
    const auto pooled = coll.pooled_sorted_samples();
    partition = build_partition(pooled, choose_ell(k, coll.n(), f.beta, pooled.size()));
  }

  std::optional<PiecewisePolynomial> fit;
  if (prior.contains("fit")) fit = fit_from_json(prior.at("fit"));
  std::optional<KIntervalHypothesis> hyp;
  std::optional<LabeledTarget> labels;
  if (prior.contains("hypothesis")) {
    hyp = hypothesis_from_json(prior.at("hypothesis"));
    if (f.labels.empty()) throw UsageError("eval: --labels is required for a classifier report");
    labels = LabeledTarget::parse(target, f.labels);
  }
  const auto m = compute_metrics(coll, retained, target, partition, k,
                                 fit ? &*fit : nullptr, hyp ? &*hyp : nullptr,
                                 labels ? &*labels : nullptr);
  Json doc = envelope("eval", {{"input", f.input}, {"report", f.report_in},
                               {"target", f.target}, {"labels", f.labels}, {"k", k}});
  Json metrics;
  metrics["retention_good"] = m.retention_good;
  metrics["retained_adversarial"] = m.retained_adversarial;
  metrics["fk_before"] = m.fk_before;
  metrics["fk_after"] = m.fk_after;
  metrics["tv_fit"] = m.tv_fit ? Json(*m.tv_fit) : Json(nullptr);
  metrics["excess_risk"] = m.excess_risk ? Json(*m.excess_risk) : Json(nullptr);
  metrics["ell"] = partition.ell();
  doc["metrics"] = metrics;
  emit(doc, f, out);
  return kExitOk;
}

int cmd_selftest(const Flags& f, std::ostream& out) {
  bool ok = true;
  for (const auto& r : run_selftest(f.seed)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitRuntime;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Robust learning from batches with adversarial contamination"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", f.seed, "Random seed");
    sub->add_option("--threads", f.threads,
                    "Worker threads (default: $ROBUST_BATCHES_THREADS, else all cores)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", f.out, "Output path ('-' or empty: stdout)");
  };
  auto report_format = [&](CLI::App* sub) {
    sub->add_option("--format", f.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}));
  };
  auto detector = [&](CLI::App* sub) {
    sub->add_option("--detector", f.detector, "Corruption detector")
        ->check(CLI::IsMember({"brute", "spectral"}));
    sub->add_option("--candidates", f.candidates,
                    "Spectral prefix sizes tried per sign (0: all)");
    sub->add_option("--ell", f.ell, "Override the partition size");
  };

  auto* sim = app.add_subcommand("simulate", "Generate a batch file");
  common(sim);
  sim->add_option("--target", f.target, "Target distribution spec")->required();
  sim->add_option("--labels", f.labels, "Label model: A:B,...@ETA_IN,ETA_OUT");
  sim->add_option("--attack", f.attack, "Attack spec");
  sim->add_option("--m", f.m, "Number of batches")->check(CLI::PositiveNumber);
  sim->add_option("--n", f.n, "Samples per batch")->check(CLI::PositiveNumber);
  sim->add_option("--beta", f.beta, "Adversarial fraction");

  auto* cln = app.add_subcommand("clean", "Remove adversarial batches");
  common(cln);
  report_format(cln);
  detector(cln);
  cln->add_option("--input", f.input, "Batch file")->required();
  cln->add_option("--k", f.k, "Number of intervals")->check(CLI::PositiveNumber);
  cln->add_option("--beta", f.beta, "Adversarial fraction bound");
  cln->add_option("--target", f.target, "Reference target for fk_before/fk_after");
  cln->add_option("--retained", f.retained, "Write retained batches here");
  cln->add_option("--partition", f.partition_out, "Write the partition here");

  auto* est = app.add_subcommand("estimate", "Fit a piecewise-polynomial density");
  common(est);
  report_format(est);
  detector(est);
  est->add_option("--input", f.input, "Batch file")->required();
  est->add_option("--beta", f.beta, "Adversarial fraction bound");
  est->add_option("--t", f.t, "Maximum number of pieces")->check(CLI::PositiveNumber);
  est->add_option("--d", f.d, "Polynomial degree")->check(CLI::Range(0, 8));
  est->add_option("--k", f.k, "Cleaning intervals (default 2td)");
  est->add_option("--grid", f.grid, "Breakpoint grid limit")->check(CLI::PositiveNumber);
  est->add_option("--target", f.target, "Target spec for the TV metric");
  est->add_option("--fit", f.fit_out, "Write the bare fit JSON here");
  est->add_option("--retained", f.retained, "Write retained batches here");
  est->add_flag("--no-clean", f.no_clean, "Fit all batches without cleaning");

  auto* cls = app.add_subcommand("classify", "Robust k-interval classifier");
  common(cls);
  report_format(cls);
  detector(cls);
  cls->add_option("--input", f.input, "Labeled batch file")->required();
  cls->add_option("--k", f.k, "Number of intervals")->check(CLI::PositiveNumber);
  cls->add_option("--beta", f.beta, "Adversarial fraction bound");
  cls->add_option("--target", f.target, "Target spec for the excess-risk metric");
  cls->add_option("--labels", f.labels, "Label model for the excess-risk metric");
  cls->add_option("--retained", f.retained, "Write retained batches here");
  cls->add_flag("--no-clean", f.no_clean, "Plain ERM on all batches");

  auto* evl = app.add_subcommand("eval", "Score a report against the truth");
  common(evl);
  report_format(evl);
  evl->add_option("--input", f.input, "Batch file with truth flags")->required();
  evl->add_option("--report", f.report_in, "Report from clean/estimate/classify")->required();
  evl->add_option("--target", f.target, "Target spec")->required();
  evl->add_option("--labels", f.labels, "Label model (classifier reports)");
  evl->add_option("--k", f.k, "Intervals for the F_k metric")->check(CLI::PositiveNumber);
  evl->add_option("--beta", f.beta, "Used to size the partition when the report has none");

  auto* st = app.add_subcommand("selftest", "Run the oracle-equivalence suites");
  st->add_option("--seed", f.seed, "Random seed");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(f, out);
    if (cln->parsed()) return cmd_clean(f, out);
    if (est->parsed()) return cmd_estimate(f, out);
    if (cls->parsed()) return cmd_classify(f, out);
    if (evl->parsed()) return cmd_eval(f, out);
    if (st->parsed()) return cmd_selftest(f, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace robust_batches
