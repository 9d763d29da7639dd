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

#include "mpclear/benders.hpp"

#include <chrono>
#include <cmath>

namespace mpclear {

std::string_view to_string(CutKind kind) {
  switch (kind) {
    case CutKind::kClassical:
      return "classical";
    case CutKind::kNoGood:
      return "no_good";
    case CutKind::kStrengthenedGlobal:
      return "strengthened_global";
    case CutKind::kStrengthenedLocal:
      return "strengthened_local";
  }
  return "?";
}

std::string_view to_string(BendersMode mode) {
  return mode == BendersMode::kIterative ? "iterative" : "callback";
}

std::string_view to_string(CutPolicy policy) {
  switch (policy) {
    case CutPolicy::kStrengthenedPlusNoGood:
      return "strengthened_plus_nogood";
    case CutPolicy::kNoGoodOnly:
      return "nogood_only";
    case CutPolicy::kClassicalOnly:
      return "classical_only";
  }
  return "?";
}

CutPolicy cut_policy_from_string(std::string_view text) {
  if (text == "strengthened_plus_nogood") return CutPolicy::kStrengthenedPlusNoGood;
  if (text == "nogood_only") return CutPolicy::kNoGoodOnly;
  if (text == "classical_only") return CutPolicy::kClassicalOnly;
  throw std::invalid_argument("unknown cut policy '" + std::string(text) + "'");
}

namespace {

WorkerOutcome run_worker(const Instance& instance, const Commitment& u_star,
                         double welfare_star, const SolverBackend& backend,
                         double tol, bool recover_duals) {
  WorkerOutcome out;
  out.welfare_star = welfare_star;
  const auto worker = build_worker(instance, u_star);
  const auto res = backend.solve(worker.model, {});
  if (!res.optimal()) {
    throw WorkerError("worker LP ended with status " + std::string(to_string(res.status)));
  }
  out.worker_welfare = res.objective;
  out.worker_point = extract_primal(instance, worker, res.primal);
  out.feasible = out.worker_welfare <= welfare_star + tol * std::max(1.0, std::fabs(welfare_star));
  if (!out.feasible || !recover_duals) return out;

  // Minimising |pi| would spend the tolerated dual-objective slack on
  // shifting prices; minimising the dual objective instead lands on an
  // optimal dual vertex, which is exactly complementary.
  auto prices =
      build_supporting_prices(instance, u_star, welfare_star, ClearingMode::kMPC, {}, tol);
  auto& model = prices.model;
  for (auto& var : model.variables()) var.objective *= 1e-7;
  const int sd = prices.registry.row_at("strong_duality", 0);
  for (const auto& t : model.row(sd).terms) model.add_objective(t.var, t.coef);
  const auto dual = backend.solve(model, {});
  if (!dual.optimal()) {
    throw WorkerError("worker accepts the commitment but no supporting prices were found "
                      "(status " + std::string(to_string(dual.status)) + ")");
  }
  out.duals = extract_dual_columns(instance, prices, dual.primal);
  return out;
}

}  // namespace

WorkerOutcome worker_test(const Instance& instance, const Commitment& u_star,
                          double welfare_star, const SolverBackend& backend,
                          double tol) {
  return run_worker(instance, u_star, welfare_star, backend, tol, true);
}

double CutRecord::slack(const PrimalPoint& point) const {
  double lhs = 0.0;
  for (std::size_t i = 0; i < coef_x_hourly.size(); ++i) lhs += coef_x_hourly[i] * point.x_hourly[i];
  for (std::size_t f = 0; f < coef_x_sub.size(); ++f) lhs += coef_x_sub[f] * point.x_sub[f];
  for (std::size_t c = 0; c < coef_u.size(); ++c) lhs += coef_u[c] * point.u[c];
  for (std::size_t k = 0; k < coef_n.size(); ++k) lhs += coef_n[k] * point.n[k];
  return lhs - rhs;
}

bool CutRecord::satisfied(const PrimalPoint& point, double tol) const {
  return slack(point) >= -tol * std::max(1.0, std::fabs(rhs));
}

Row CutRecord::to_row(const SymbolRegistry& registry, const std::string& name) const {
  Row row;
  row.name = name;
  row.lower = rhs;
  row.upper = kInf;
  const auto put = [&](const std::vector<double>& coef, Sym sym) {
    for (std::size_t j = 0; j < coef.size(); ++j) {
      if (coef[j] != 0.0) row.terms.push_back({registry.at(sym, static_cast<int>(j)), coef[j]});
    }
  };
  put(coef_x_hourly, Sym::kXHourly);
  put(coef_x_sub, Sym::kXSub);
  put(coef_u, Sym::kU);
  put(coef_n, Sym::kN);
  return row;
}

nlohmann::ordered_json CutRecord::to_json() const {
  return {{"kind", std::string(to_string(kind))},
          {"incumbent", incumbent},
          {"accepted", accepted},
          {"rejected", rejected},
          {"coef_x_hourly", coef_x_hourly},
          {"coef_x_sub", coef_x_sub},
          {"coef_u", coef_u},
          {"coef_n", coef_n},
          {"rhs", rhs},
          {"incumbent_welfare", incumbent_welfare},
          {"worker_welfare", worker_welfare}};
}

CutRecord generate_cut(const Instance& instance, CutKind kind,
                       const WorkerOutcome& outcome, const Commitment& u_star,
                       bool master_optimal) {
  if (outcome.feasible) {
    throw std::invalid_argument("no cut for a commitment the worker accepts");
  }
  if (kind == CutKind::kStrengthenedGlobal && !master_optimal) {
    throw CutScopeError(
        "strengthened cut is only globally valid at a master optimum; "
        "use the local form inside branch-and-bound");
  }
  const std::size_t n_c = instance.mp_bids.size();
  if (u_star.size() != n_c) throw std::invalid_argument("commitment size mismatch");

  CutRecord cut;
  cut.kind = kind;
  cut.incumbent = u_star;
  cut.incumbent_welfare = outcome.welfare_star;
  cut.worker_welfare = outcome.worker_welfare;
  for (std::size_t c = 0; c < n_c; ++c) {
    (u_star[c] == 1 ? cut.accepted : cut.rejected).push_back(static_cast<int>(c));
  }
  cut.coef_x_hourly.assign(instance.hourly_bids.size(), 0.0);
  cut.coef_x_sub.assign(instance.sub_bid_count(), 0.0);
  cut.coef_u.assign(n_c, 0.0);
  cut.coef_n.assign(instance.network.export_vars.size(), 0.0);

  switch (kind) {
    case CutKind::kClassical: {
      // welfare(x, u) - sum_c M_c u#_c u_c >= W# - sum_c M_c u#_c
      for (std::size_t i = 0; i < instance.hourly_bids.size(); ++i) {
        const auto& b = instance.hourly_bids[i];
        cut.coef_x_hourly[i] = b.quantity * b.price;
      }
      std::size_t f = 0;
      cut.rhs = outcome.worker_welfare;
      for (std::size_t c = 0; c < n_c; ++c) {
        const auto& bid = instance.mp_bids[c];
        for (const auto& sub : bid.sub_bids) cut.coef_x_sub[f++] = sub.quantity * sub.price;
        const double m = compute_big_m(bid, instance.price_bound);
        const double u_sharp = outcome.worker_point.u.at(c);
        cut.coef_u[c] = -bid.fixed_cost - m * u_sharp;
        cut.rhs -= m * u_sharp;
      }
      break;
    }
    case CutKind::kNoGood:
      // sum_acc (1 - u) + sum_rej u >= 1
      for (int c : cut.accepted) cut.coef_u[c] = -1.0;
      for (int c : cut.rejected) cut.coef_u[c] = 1.0;
      cut.rhs = 1.0 - static_cast<double>(cut.accepted.size());
      break;
    case CutKind::kStrengthenedGlobal:
    case CutKind::kStrengthenedLocal:
      // sum_acc (1 - u) >= 1
      if (cut.accepted.empty()) {
        throw std::logic_error("strengthened cut with no accepted bid");
      }
      for (int c : cut.accepted) cut.coef_u[c] = -1.0;
      cut.rhs = 1.0 - static_cast<double>(cut.accepted.size());
      break;
  }
  return cut;
}

nlohmann::ordered_json BendersStats::to_json() const {
  nlohmann::ordered_json doc;
  doc["iterations"] = iterations;
  doc["cuts"] = {{"classical", cuts_classical},
                 {"no_good", cuts_no_good},
                 {"strengthened_global", cuts_strengthened_global},
                 {"strengthened_local", cuts_strengthened_local}};
  doc["master_nodes"] = master_nodes;
  doc["wall_time_s"] = wall_time_s;
  doc["master_objectives"] = master_objectives;
  doc["mode"] = std::string(to_string(mode_used));
  doc["backend"] = backend_used;
  if (fallback) doc["fallback"] = *fallback;
  return doc;
}

namespace {

using Clock = std::chrono::steady_clock;

void count_cut(BendersStats& stats, CutKind kind) {
  switch (kind) {
    case CutKind::kClassical:
      ++stats.cuts_classical;
      break;
    case CutKind::kNoGood:
      ++stats.cuts_no_good;
      break;
    case CutKind::kStrengthenedGlobal:
      ++stats.cuts_strengthened_global;
      break;
    case CutKind::kStrengthenedLocal:
      ++stats.cuts_strengthened_local;
      break;
  }
}

// Cuts for one rejected incumbent under the policy. A no-good that equals
// the strengthened cut (nothing rejected) is not repeated.
std::vector<CutRecord> cuts_for(const Instance& instance, CutPolicy policy,
                                const WorkerOutcome& outcome, const Commitment& u_star,
                                bool in_tree, bool local_cuts) {
  std::vector<CutRecord> cuts;
  switch (policy) {
    case CutPolicy::kClassicalOnly:
      cuts.push_back(generate_cut(instance, CutKind::kClassical, outcome, u_star));
      break;
    case CutPolicy::kNoGoodOnly:
      cuts.push_back(generate_cut(instance, CutKind::kNoGood, outcome, u_star));
      break;
    case CutPolicy::kStrengthenedPlusNoGood: {
      bool any_rejected = false;
      for (int v : u_star) any_rejected |= v == 0;
      if (!in_tree) {
        cuts.push_back(generate_cut(instance, CutKind::kStrengthenedGlobal, outcome, u_star, true));
        if (any_rejected) cuts.push_back(generate_cut(instance, CutKind::kNoGood, outcome, u_star));
      } else if (local_cuts) {
        cuts.push_back(generate_cut(instance, CutKind::kStrengthenedLocal, outcome, u_star, false));
        if (any_rejected) cuts.push_back(generate_cut(instance, CutKind::kNoGood, outcome, u_star));
      } else {
        cuts.push_back(generate_cut(instance, CutKind::kNoGood, outcome, u_star));
      }
      break;
    }
  }
  return cuts;
}

PrimalPoint rounded(PrimalPoint p) {
  for (auto& v : p.u) v = v > 0.5 ? 1.0 : 0.0;
  return p;
}

ClearingSolution make_solution(const Instance& instance, const PrimalPoint& point,
                               const WorkerOutcome& outcome) {
  ClearingSolution sol;
  sol.mode = ClearingMode::kMPC;
  sol.primal = point;
  sol.duals = *outcome.duals;
  sol.welfare = welfare(instance, point, true);
  return sol;
}

BendersResult iterative(const Instance& instance, const BendersOptions& options,
                        const SolverBackend& backend, Clock::time_point start) {
  BendersResult out;
  out.stats.mode_used = BendersMode::kIterative;
  out.stats.backend_used = backend.name();
  ModelHandle master = build_uwelfare(instance);
  while (out.stats.iterations < options.max_iterations) {
    const auto res = backend.solve(master.model, options.solve);
    out.stats.master_nodes += res.stats.nodes;
    if (res.status == SolveStatus::kInfeasible) {
      out.status = SolveStatus::kInfeasible;
      break;
    }
    if (!res.optimal()) {
      out.status = res.status;
      break;
    }
    ++out.stats.iterations;
    out.stats.master_objectives.push_back(res.objective);
    const PrimalPoint point = rounded(extract_primal(instance, master, res.primal));
    const Commitment u_star = point.commitment();
    const double w_star = welfare(instance, point, true);
    const auto outcome = worker_test(instance, u_star, w_star, backend, options.tol);
    if (outcome.feasible) {
      out.status = SolveStatus::kOptimal;
      out.solution = make_solution(instance, point, outcome);
      break;
    }
    for (auto& cut : cuts_for(instance, options.policy, outcome, u_star, false, false)) {
      const std::string name = "cut_" + std::to_string(out.cuts.size());
      const Row row = cut.to_row(master.registry, name);
      master.model.add_row(row.name, row.terms, row.lower, row.upper);
      count_cut(out.stats, cut.kind);
      out.cuts.push_back(std::move(cut));
    }
  }
  if (out.stats.iterations >= options.max_iterations && !out.solution) {
    out.status = SolveStatus::kLimit;
  }
  out.stats.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

BendersResult callback(const Instance& instance, const BendersOptions& options,
                       const SolverBackend& backend, Clock::time_point start) {
  BendersResult out;
  out.stats.mode_used = BendersMode::kCallback;
  out.stats.backend_used = backend.name();
  const bool local_cuts = backend.capabilities().supports_local_cuts;
  ModelHandle master = build_uwelfare(instance);

  LazyHandler handler = [&](std::span<const double> candidate) {
    ++out.stats.iterations;
    const PrimalPoint point = rounded(extract_primal(instance, master, candidate));
    const Commitment u_star = point.commitment();
    const double w_star = welfare(instance, point, true);
    out.stats.master_objectives.push_back(w_star);
    const auto outcome = run_worker(instance, u_star, w_star, backend, options.tol, false);
    std::vector<LazyRow> rows;
    if (outcome.feasible) return rows;
    for (auto& cut : cuts_for(instance, options.policy, outcome, u_star, true, local_cuts)) {
      const std::string name = "cut_" + std::to_string(out.cuts.size());
      rows.push_back({cut.to_row(master.registry, name), !cut.global()});
      count_cut(out.stats, cut.kind);
      out.cuts.push_back(std::move(cut));
    }
    return rows;
  };

  SolveOptions solve = options.solve;
  solve.disable_heuristics = true;
  const auto res = backend.solve(master.model, solve, &handler);
  out.stats.master_nodes = res.stats.nodes;
  out.status = res.status;
  if (res.optimal()) {
    const PrimalPoint point = rounded(extract_primal(instance, master, res.primal));
    const double w_star = welfare(instance, point, true);
    const auto outcome = worker_test(instance, point.commitment(), w_star, backend, options.tol);
    if (!outcome.feasible) {
      throw WorkerError("branch-and-cut returned an incumbent the worker rejects");
    }
    out.solution = make_solution(instance, point, outcome);
  }
  out.stats.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

}  // namespace

BendersResult solve_benders(const Instance& instance, const BendersOptions& options) {
  require_valid(instance);
  const auto start = Clock::now();
  std::string name = options.backend;
  if (options.mode == BendersMode::kIterative) {
    const auto backend = make_backend(name.empty() ? "highs" : name);
    return iterative(instance, options, *backend, start);
  }
  const auto backend = make_backend(name.empty() ? "highs-bc" : name);
  const auto caps = backend->capabilities();
  std::optional<std::string> shortfall;
  if (!caps.supports_lazy_constraints) {
    shortfall = "backend '" + backend->name() + "' has no lazy constraints";
  } else if (!caps.supports_heuristics_toggle) {
    shortfall = "backend '" + backend->name() + "' cannot disable primal heuristics";
  }
  if (shortfall) {
    auto out = iterative(instance, options, *backend, start);
    out.stats.fallback = *shortfall + "; re-ran in iterative mode";
    return out;
  }
  return callback(instance, options, *backend, start);
}

}  // namespace mpclear
