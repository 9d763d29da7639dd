// Copyright 2026 The mpclear Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mpclear/cli.hpp"

#include <cctype>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mpclear/instance_io.hpp"

namespace mpclear {

namespace {

std::string format_double(double v, const char* fmt) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

bool within(double a, double b, double rel_tol) {
  return std::fabs(a - b) <= rel_tol * std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

}  // namespace

SummaryRow summary_row(const std::string& instance, const ClearResult& result) {
  SummaryRow row;
  row.instance = instance;
  row.method = std::string(to_string(result.method));
  if (result.solution) row.welfare = result.solution->welfare;
  row.gap = result.gap;
  if (result.benders) {
    row.cuts_classical = result.benders->cuts_classical;
    row.cuts_nogood = result.benders->cuts_no_good;
    row.cuts_strengthened =
        result.benders->cuts_strengthened_global + result.benders->cuts_strengthened_local;
  }
  row.nodes = result.nodes;
  row.runtime_s = result.runtime_s;
  return row;
}

std::string to_csv_line(const SummaryRow& row) {
  std::ostringstream line;
  line << row.instance << ',' << row.method << ','
       << (row.welfare ? format_double(*row.welfare, "%.6f") : std::string()) << ','
       << format_double(100.0 * row.gap, "%.2f") << ',' << row.cuts_classical << ','
       << row.cuts_nogood << ',' << row.cuts_strengthened << ',' << row.nodes << ','
       << format_double(row.runtime_s, "%.6f");
  return line.str();
}

std::string welfare_label(Method method) {
  return includes_fixed_costs(clearing_mode(method)) ? "welfare" : "welfare_without_fixed_costs";
}

nlohmann::ordered_json clear_report(const Instance& instance, const std::string& name,
                                    const ClearResult& result,
                                    const VerificationReport* verification) {
  nlohmann::ordered_json doc;
  doc["instance"] = name;
  doc["method"] = std::string(to_string(result.method));
  doc["status"] = std::string(to_string(result.status));
  if (result.solution) {
    const auto& sol = *result.solution;
    doc["welfare_label"] = welfare_label(result.method);
    doc[welfare_label(result.method)] = sol.welfare;
    const InstanceIndex idx(instance);
    auto prices = nlohmann::ordered_json::array();
    for (const auto& loc : instance.network.locations) {
      for (const auto& per : instance.network.periods) {
        prices.push_back({{"location", loc},
                          {"period", per},
                          {"price", sol.duals.price[idx.cell(loc, per)]}});
      }
    }
    doc["prices"] = prices;
    auto acceptance = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
      acceptance.push_back(
          {{"bid", instance.mp_bids[c].id}, {"accepted", sol.primal.u[c] > 0.5}});
    }
    doc["acceptance"] = acceptance;
    doc["profit"] = profit_report_json(profit_report(instance, sol));
  }
  if (verification) {
    doc["verification"] = verification->to_json();
  }
  doc["stats"] = result.to_json();
  if (result.solution) doc["solution"] = solution_to_json(instance, *result.solution);
  return doc;
}

CompareOutcome compare_methods(const Instance& instance, const std::string& name,
                               const std::vector<Method>& methods,
                               const ClearOptions& base, double rel_tol) {
  CompareOutcome out;
  std::vector<ClearResult> results;
  for (Method m : methods) {
    ClearOptions o = base;
    o.method = m;
    results.push_back(clear(instance, o));
    out.rows.push_back(summary_row(name, results.back()));
  }
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    nlohmann::ordered_json row;
    row["method"] = std::string(to_string(r.method));
    row["status"] = std::string(to_string(r.status));
    row["welfare_label"] = welfare_label(r.method);
    if (r.solution) row["welfare"] = r.solution->welfare;
    row["gap"] = r.gap;
    row["nodes"] = r.nodes;
    row["runtime_s"] = r.runtime_s;
    if (r.benders) row["benders"] = r.benders->to_json();
    rows.push_back(row);
  }
  auto agreements = nlohmann::ordered_json::array();
  auto non_comparable = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (std::size_t j = i + 1; j < results.size(); ++j) {
      const auto& a = results[i];
      const auto& b = results[j];
      const std::string pair =
          std::string(to_string(a.method)) + " vs " + std::string(to_string(b.method));
      if (welfare_label(a.method) != welfare_label(b.method)) {
        non_comparable.push_back({{"pair", pair},
                                  {"reason", "different welfare definitions: " +
                                                 welfare_label(a.method) + " and " +
                                                 welfare_label(b.method)}});
        continue;
      }
      bool ok;
      std::string detail;
      if (a.solution && b.solution) {
        ok = within(a.solution->welfare, b.solution->welfare, rel_tol);
        detail = format_double(a.solution->welfare, "%.6f") + " and " +
                 format_double(b.solution->welfare, "%.6f");
      } else {
        ok = a.status == b.status;
        detail = std::string(to_string(a.status)) + " and " + std::string(to_string(b.status));
      }
      agreements.push_back({{"pair", pair}, {"agree", ok}, {"detail", detail}});
      if (!ok && out.agree) {
        out.agree = false;
        out.offending = pair + ": " + detail;
      }
    }
  }
  out.report["instance"] = name;
  out.report["rel_tol"] = rel_tol;
  out.report["rows"] = rows;
  out.report["agreements"] = agreements;
  out.report["non_comparable"] = non_comparable;
  out.report["agree"] = out.agree;
  if (out.offending) out.report["offending"] = *out.offending;
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + tmp.string());
    file << text;
    if (!file.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

struct CommonFlags {
  std::string backend;
  std::string policy = "strengthened_plus_nogood";
  double tol = 1e-6;
  double time_limit = kInf;
  bool no_ramping = false;
  bool verbose = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--backend", backend, "Solver backend (highs, highs-bc)");
    cmd->add_option("--policy", policy,
                    "Benders cut policy: strengthened_plus_nogood, nogood_only, classical_only");
    cmd->add_option("--tol", tol, "Verification and worker tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--time-limit", time_limit, "Solver time limit in seconds");
    cmd->add_flag("--no-ramping", no_ramping, "Ignore load-gradient limits");
    cmd->add_flag("--verbose", verbose, "Solver log on stderr");
  }

  ClearOptions options(Method method) const {
    ClearOptions o;
    o.method = method;
    o.policy = cut_policy_from_string(policy);
    o.backend = backend;
    o.tol = tol;
    o.ramping = !no_ramping;
    o.solve.time_limit = time_limit;
    o.solve.verbose = verbose;
    return o;
  }
};

struct GenFlags {
  SyntheticParams params;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n-mp", params.n_mp, "MP bids")->check(CLI::PositiveNumber);
    cmd->add_option("--steps", params.steps_per_curve, "Steps per MP curve")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--periods", params.n_periods, "Periods")->check(CLI::PositiveNumber);
    cmd->add_option("--locations", params.n_locations, "Locations")->check(CLI::PositiveNumber);
    cmd->add_option("--hourly-per-cell", params.hourly_per_cell,
                    "Hourly demand and supply steps per cell")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--buy-share", params.buy_mp_share, "Fraction of buy-side MP bids")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--atc", params.atc_capacity, "Interconnector capacity");
    cmd->add_option("--cost-scale", params.cost_scale, "Cost multiplier");
    cmd->add_option("--price-bound", params.price_bound, "Price bound")
        ->check(CLI::PositiveNumber);
  }
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream list(text);
  std::string part;
  while (std::getline(list, part, ',')) {
    const auto dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(part));
      } else {
        const auto lo = std::stoull(part.substr(0, dash));
        const auto hi = std::stoull(part.substr(dash + 1));
        if (hi < lo) throw std::invalid_argument("empty range");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("bad seed list '" + text + "'");
    }
  }
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

std::string instance_name(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

int exit_for_status(SolveStatus status) {
  if (status == SolveStatus::kInfeasible) return kExitInfeasible;
  return status == SolveStatus::kOptimal ? kExitOk : kExitError;
}

int cmd_clear(const std::string& path, const std::string& method_text,
              const CommonFlags& flags, const std::string& output, const std::string& csv,
              std::ostream& out, std::ostream& err) {
  const Instance instance = parse_instance_file(path);
  const Method method = method_from_string(method_text);
  const auto result = clear(instance, flags.options(method));
  std::optional<VerificationReport> verification;
  if (result.solution) verification = verify(instance, *result.solution, flags.tol);
  const std::string name = instance_name(path);
  const auto report = clear_report(instance, name, result, verification ? &*verification : nullptr);
  emit(output, report.dump(2) + "\n", out);
  std::string csv_path = csv;
  if (csv_path.empty() && !output.empty() && output != "-") {
    csv_path = std::filesystem::path(output).replace_extension(".csv").string();
  }
  if (!csv_path.empty()) {
    write_file_atomic(csv_path,
                      std::string(kCsvHeader) + "\n" + to_csv_line(summary_row(name, result)) + "\n");
  }
  if (result.benders && result.benders->fallback) {
    err << "note: " << *result.benders->fallback << "\n";
  }
  if (verification && !verification->ok()) {
    err << "error: solution failed verification:";
    for (const auto& f : verification->failures()) err << ' ' << f;
    err << "\n";
    return kExitError;
  }
  if (result.status != SolveStatus::kOptimal) {
    err << "status: " << to_string(result.status) << "\n";
  }
  return exit_for_status(result.status);
}

int cmd_verify(const std::string& path, const std::string& solution_path, double tol,
               const std::string& output, bool csv, std::ostream& out, std::ostream& err) {
  const Instance instance = parse_instance_file(path);
  std::ifstream file(solution_path);
  if (!file) throw std::runtime_error("cannot open " + solution_path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(file);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(solution_path + ": " + e.what());
  }
  // A clear report embeds the solution under "solution".
  const auto& body = doc.contains("solution") ? doc.at("solution") : doc;
  const ClearingSolution sol = solution_from_json(body);
  const auto report = verify(instance, sol, tol);
  emit(output, csv ? report.to_csv() : report.to_json().dump(2) + "\n", out);
  if (!report.ok()) {
    err << "verification failed:";
    for (const auto& f : report.failures()) err << ' ' << f;
    err << "\n";
    return kExitError;
  }
  return kExitOk;
}

int cmd_oracle(const std::string& path, const std::string& mode_text, bool no_cross_check,
               double tol, std::size_t max_bids, const std::string& output, std::ostream& out) {
  const Instance instance = parse_instance_file(path);
  std::string upper = mode_text;
  for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  const ClearingMode mode = clearing_mode_from_string(upper);
  const auto result = brute_force_oracle(instance, mode, nullptr, !no_cross_check, tol, max_bids);
  emit(output, result.to_json(instance).dump(2) + "\n", out);
  return result.best ? kExitOk : kExitInfeasible;
}

int cmd_compare(const std::string& path, const std::vector<std::string>& method_texts,
                const CommonFlags& flags, double rel_tol, const std::string& output,
                const std::string& csv, std::ostream& out, std::ostream& err) {
  const Instance instance = parse_instance_file(path);
  std::vector<Method> methods;
  for (const auto& m : method_texts) methods.push_back(method_from_string(m));
  const auto outcome =
      compare_methods(instance, instance_name(path), methods, flags.options(Method::kMPC), rel_tol);
  emit(output, outcome.report.dump(2) + "\n", out);
  if (!csv.empty()) {
    std::string text = std::string(kCsvHeader) + "\n";
    for (const auto& row : outcome.rows) text += to_csv_line(row) + "\n";
    write_file_atomic(csv, text);
  }
  if (!outcome.agree) {
    err << "disagreement: " << *outcome.offending << "\n";
    return kExitDisagreement;
  }
  return kExitOk;
}

int cmd_bench(const std::vector<std::string>& files, const std::string& seed_text,
              const GenFlags& gen, const std::vector<std::string>& method_texts,
              const CommonFlags& flags, double rel_tol, int jobs, const std::string& output,
              std::ostream& out, std::ostream& err) {
  std::vector<Method> methods;
  for (const auto& m : method_texts) methods.push_back(method_from_string(m));
  struct Task {
    std::string name;
    Instance instance;
  };
  std::vector<Task> tasks;
  for (const auto& f : files) tasks.push_back({instance_name(f), parse_instance_file(f)});
  if (!seed_text.empty()) {
    for (auto seed : parse_seeds(seed_text)) {
      tasks.push_back({"seed-" + std::to_string(seed), generate_synthetic(seed, gen.params)});
    }
  }
  if (tasks.empty()) throw std::invalid_argument("bench needs instance files or --seeds");

  std::vector<std::optional<CompareOutcome>> outcomes(tasks.size());
  std::vector<std::string> failures(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        outcomes[i] = compare_methods(tasks[i].instance, tasks[i].name, methods,
                                      flags.options(Method::kMPC), rel_tol);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const int n_threads = std::clamp(jobs, 1, static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kExitOk;
  std::string text = std::string(kCsvHeader) + "\n";
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!outcomes[i]) {
      err << "error: " << tasks[i].name << ": " << failures[i] << "\n";
      code = kExitError;
      continue;
    }
    for (const auto& row : outcomes[i]->rows) text += to_csv_line(row) + "\n";
    if (!outcomes[i]->agree) {
      err << "disagreement on " << tasks[i].name << ": " << *outcomes[i]->offending << "\n";
      if (code == kExitOk) code = kExitDisagreement;
    }
  }
  emit(output, text, out);
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Market clearing with minimum profit conditions", "mpclear"};
  app.require_subcommand(1);

  std::string path, solution_path, output, csv, method, mode = "mpc", seeds;
  std::vector<std::string> methods, files;
  CommonFlags common;
  GenFlags gen;
  double rel_tol = 1e-5;
  bool no_cross_check = false, csv_out = false;
  std::size_t max_bids = kOracleMaxBids;
  std::uint64_t seed = 0;
  int jobs = 1;
  const std::string method_help = "Method: mpc, mic, umfs, benders-iterative, benders-callback";

  auto* c_clear = app.add_subcommand("clear", "Clear one instance");
  c_clear->add_option("instance", path, "Instance JSON")->required()->check(CLI::ExistingFile);
  c_clear->add_option("-m,--method", method, method_help)->required();
  c_clear->add_option("-o,--output", output, "Report JSON (default stdout)");
  c_clear->add_option("--csv", csv, "CSV summary path");
  common.attach(c_clear);

  auto* c_verify = app.add_subcommand("verify", "Check a solution against equilibrium conditions");
  c_verify->add_option("instance", path, "Instance JSON")->required()->check(CLI::ExistingFile);
  c_verify->add_option("solution", solution_path, "Solution or clear report JSON")
      ->required()
      ->check(CLI::ExistingFile);
  c_verify->add_option("--tol", common.tol, "Tolerance")->check(CLI::PositiveNumber);
  c_verify->add_option("-o,--output", output, "Report path (default stdout)");
  c_verify->add_flag("--csv", csv_out, "Per-check CSV instead of JSON");

  auto* c_oracle = app.add_subcommand("oracle", "Enumerate every commitment vector");
  c_oracle->add_option("instance", path, "Instance JSON")->required()->check(CLI::ExistingFile);
  c_oracle->add_option("--mode", mode, "mpc or mic");
  c_oracle->add_flag("--no-cross-check", no_cross_check, "Skip the worker cross-check");
  c_oracle->add_option("--tol", common.tol, "Tolerance")->check(CLI::PositiveNumber);
  c_oracle->add_option("--max-bids", max_bids, "Refuse larger instances");
  c_oracle->add_option("-o,--output", output, "Report JSON (default stdout)");

  auto* c_compare = app.add_subcommand("compare", "Clear one instance with several methods");
  c_compare->add_option("instance", path, "Instance JSON")->required()->check(CLI::ExistingFile);
  c_compare->add_option("-m,--method", methods, method_help + "; repeat")->required();
  c_compare->add_option("--rel-tol", rel_tol, "Welfare agreement tolerance");
  c_compare->add_option("-o,--output", output, "Report JSON (default stdout)");
  c_compare->add_option("--csv", csv, "CSV table path");
  common.attach(c_compare);

  auto* c_bench = app.add_subcommand("bench", "Run methods over instance files or seeds");
  c_bench->add_option("instances", files, "Instance JSON files")->check(CLI::ExistingFile);
  c_bench->add_option("--seeds", seeds, "Synthetic seeds, e.g. 1-10 or 3,7");
  c_bench->add_option("-m,--method", methods, method_help + "; repeat")->required();
  c_bench->add_option("--rel-tol", rel_tol, "Welfare agreement tolerance");
  c_bench->add_option("-j,--jobs", jobs, "Instances solved concurrently")
      ->check(CLI::PositiveNumber);
  c_bench->add_option("-o,--output", output, "CSV path (default stdout)");
  common.attach(c_bench);
  gen.attach(c_bench);

  auto* c_gen = app.add_subcommand("gen", "Write a synthetic instance");
  c_gen->add_option("--seed", seed, "Generator seed")->required();
  c_gen->add_option("-o,--output", output, "Instance JSON (default stdout)");
  gen.attach(c_gen);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    if (c_clear->parsed()) return cmd_clear(path, method, common, output, csv, out, err);
    if (c_verify->parsed()) {
      return cmd_verify(path, solution_path, common.tol, output, csv_out, out, err);
    }
    if (c_oracle->parsed()) {
      return cmd_oracle(path, mode, no_cross_check, common.tol, max_bids, output, out);
    }
    if (c_compare->parsed()) {
      return cmd_compare(path, methods, common, rel_tol, output, csv, out, err);
    }
    if (c_bench->parsed()) {
      return cmd_bench(files, seeds, gen, methods, common, rel_tol, jobs, output, out, err);
    }
    if (c_gen->parsed()) {
      emit(output, instance_to_json(generate_synthetic(seed, gen.params)).dump(2) + "\n", out);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace mpclear
