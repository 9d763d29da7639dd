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

#include "mpclear/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "Highs.h"

namespace mpclear {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
    case SolveStatus::kLimit:
      return "limit";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double to_highs(double v) {
  if (v == kInf) return kHighsInf;
  if (v == -kInf) return -kHighsInf;
  return v;
}

HighsLp to_highs_lp(const Model& model, bool keep_integrality) {
  HighsLp lp;
  const auto& vars = model.variables();
  const auto& rows = model.rows();
  lp.num_col_ = static_cast<HighsInt>(vars.size());
  lp.num_row_ = static_cast<HighsInt>(rows.size());
  lp.sense_ = model.sense() == Sense::kMaximize ? ObjSense::kMaximize
                                                : ObjSense::kMinimize;
  lp.offset_ = model.objective_offset();
  for (const auto& v : vars) {
    lp.col_cost_.push_back(v.objective);
    lp.col_lower_.push_back(to_highs(v.lower));
    lp.col_upper_.push_back(to_highs(v.upper));
  }
  for (const auto& r : rows) {
    lp.row_lower_.push_back(to_highs(r.lower));
    lp.row_upper_.push_back(to_highs(r.upper));
  }
  // Row-wise assembly is natural for our rows.
  lp.a_matrix_.format_ = MatrixFormat::kRowwise;
  lp.a_matrix_.num_col_ = lp.num_col_;
  lp.a_matrix_.num_row_ = lp.num_row_;
  lp.a_matrix_.start_.assign(1, 0);
  for (const auto& r : rows) {
    for (const auto& t : r.terms) {
      if (t.coef == 0.0) continue;
      lp.a_matrix_.index_.push_back(t.var);
      lp.a_matrix_.value_.push_back(t.coef);
    }
    lp.a_matrix_.start_.push_back(
        static_cast<HighsInt>(lp.a_matrix_.index_.size()));
  }
  if (keep_integrality && model.is_mip()) {
    for (const auto& v : vars) {
      lp.integrality_.push_back(v.type == VarType::kInteger
                                    ? HighsVarType::kInteger
                                    : HighsVarType::kContinuous);
    }
  }
  return lp;
}

void configure(Highs& highs, const SolveOptions& options) {
  highs.setOptionValue("output_flag", options.verbose);
  highs.setOptionValue("threads", 1);
  highs.setOptionValue("random_seed", 0);
  if (std::isfinite(options.time_limit)) {
    highs.setOptionValue("time_limit", options.time_limit);
  }
  highs.setOptionValue("mip_rel_gap", options.mip_rel_gap);
  highs.setOptionValue("mip_abs_gap", 0.0);
  highs.setOptionValue("mip_feasibility_tolerance", options.feasibility_tol);
  highs.setOptionValue("primal_feasibility_tolerance", options.feasibility_tol);
  highs.setOptionValue("dual_feasibility_tolerance", options.feasibility_tol);
  if (options.disable_heuristics) {
    highs.setOptionValue("mip_heuristic_effort", 0.0);
  }
}

void check_call(HighsStatus status, const char* what) {
  if (status == HighsStatus::kError) {
    throw SolverError(std::string("HiGHS call failed: ") + what);
  }
}

SolveStatus map_status(HighsModelStatus status, bool has_solution) {
  switch (status) {
    case HighsModelStatus::kOptimal:
      return SolveStatus::kOptimal;
    case HighsModelStatus::kInfeasible:
      return SolveStatus::kInfeasible;
    case HighsModelStatus::kUnbounded:
      return SolveStatus::kUnbounded;
    case HighsModelStatus::kTimeLimit:
    case HighsModelStatus::kIterationLimit:
    case HighsModelStatus::kSolutionLimit:
    case HighsModelStatus::kInterrupt:
    case HighsModelStatus::kObjectiveBound:
    case HighsModelStatus::kObjectiveTarget:
      return SolveStatus::kLimit;
    default:
      break;
  }
  (void)has_solution;
  throw SolverError("HiGHS returned model status '" +
                    Highs().modelStatusToString(status) + "'");
}

// Runs the loaded model, disambiguating "unbounded or infeasible" with a
// presolve-free re-run.
HighsModelStatus run_checked(Highs& highs) {
  check_call(highs.run(), "run");
  auto status = highs.getModelStatus();
  if (status == HighsModelStatus::kUnboundedOrInfeasible) {
    highs.setOptionValue("presolve", "off");
    check_call(highs.run(), "run without presolve");
    status = highs.getModelStatus();
    highs.setOptionValue("presolve", "choose");
  }
  return status;
}

class HighsBackend final : public SolverBackend {
 public:
  std::string name() const override { return "highs"; }

  SolverCapabilities capabilities() const override {
    return {.supports_lazy_constraints = false,
            .supports_local_cuts = false,
            .supports_heuristics_toggle = true};
  }

  SolveResult solve(const Model& model, const SolveOptions& options,
                    const LazyHandler* lazy) const override {
    if (lazy != nullptr && *lazy) {
      throw UnsupportedCapability("backend 'highs' has no lazy constraints");
    }
    const auto start = Clock::now();
    SolveResult result;
    if (model.variables().empty()) {
      result.status = SolveStatus::kOptimal;
      result.objective = model.objective_offset();
      result.row_duals.assign(model.rows().size(), 0.0);
      return result;
    }
    Highs highs;
    configure(highs, options);
    check_call(highs.passModel(to_highs_lp(model, true)), "passModel");
    const auto status = run_checked(highs);
    const auto& info = highs.getInfo();
    const auto& sol = highs.getSolution();
    result.status = map_status(status, sol.value_valid);
    result.stats.nodes = model.is_mip() ? info.mip_node_count : 0;
    if (model.is_mip()) result.stats.mip_gap = info.mip_gap;
    result.stats.simplex_iterations = info.simplex_iteration_count;
    if (sol.value_valid) {
      result.primal = sol.col_value;
      result.objective = model.objective_value(result.primal);
    }
    if (!model.is_mip() && sol.dual_valid) {
      // HiGHS already reports d(objective)/d(bound) in the model's sense.
      result.row_duals = sol.row_dual;
    }
    if (result.status == SolveStatus::kOptimal && !sol.value_valid) {
      throw SolverError("HiGHS reported optimal without a primal solution");
    }
    result.stats.wall_time_s = seconds_since(start);
    return result;
  }
};

// Best-bound branch-and-bound over LP relaxations solved by HiGHS. Supports
// lazy rows, including rows that are only active below the node that
// generated them. No primal heuristics: every incumbent is a node LP optimum.
class BranchAndCutBackend final : public SolverBackend {
 public:
  std::string name() const override { return "highs-bc"; }

  SolverCapabilities capabilities() const override {
    return {.supports_lazy_constraints = true,
            .supports_local_cuts = true,
            .supports_heuristics_toggle = true};
  }

  SolveResult solve(const Model& model, const SolveOptions& options,
                    const LazyHandler* lazy) const override;
};

struct Node {
  std::vector<double> lower;  // bounds of integer columns only
  std::vector<double> upper;
  std::vector<int> local_rows;  // ids into the local row table
  double bound = kInf;          // parent LP bound, in maximisation terms
  long long order = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.order < b.order;  // deeper (later) nodes first on ties
  }
};

SolveResult BranchAndCutBackend::solve(const Model& model,
                                       const SolveOptions& options,
                                       const LazyHandler* lazy) const {
  const auto start = Clock::now();
  const double flip = model.sense() == Sense::kMaximize ? 1.0 : -1.0;
  const double int_tol = 1e-6;

  std::vector<int> int_cols;
  for (std::size_t j = 0; j < model.variables().size(); ++j) {
    if (model.variable(static_cast<int>(j)).type == VarType::kInteger) {
      int_cols.push_back(static_cast<int>(j));
    }
  }

  Highs highs;
  SolveOptions lp_options = options;
  configure(highs, lp_options);
  check_call(highs.passModel(to_highs_lp(model, false)), "passModel");

  struct LocalRow {
    HighsInt highs_row;
    double lower;
    double upper;
  };
  std::vector<LocalRow> local_table;
  std::vector<int> active_local;

  auto add_row = [&](const Row& row) {
    std::vector<HighsInt> idx;
    std::vector<double> val;
    for (const auto& t : row.terms) {
      idx.push_back(t.var);
      val.push_back(t.coef);
    }
    check_call(highs.addRow(to_highs(row.lower), to_highs(row.upper),
                            static_cast<HighsInt>(idx.size()), idx.data(),
                            val.data()),
               "addRow");
    return highs.getNumRow() - 1;
  };

  auto activate = [&](const std::vector<int>& wanted) {
    for (int id : active_local) {
      check_call(highs.changeRowBounds(local_table[id].highs_row, -kHighsInf,
                                       kHighsInf),
                 "changeRowBounds");
    }
    for (int id : wanted) {
      check_call(highs.changeRowBounds(local_table[id].highs_row,
                                       to_highs(local_table[id].lower),
                                       to_highs(local_table[id].upper)),
                 "changeRowBounds");
    }
    active_local = wanted;
  };

  SolveResult result;
  bool have_incumbent = false;
  double incumbent_value = -kInf;  // maximisation terms
  long long order = 0;
  bool hit_limit = false;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  {
    Node root;
    for (int j : int_cols) {
      root.lower.push_back(model.variable(j).lower);
      root.upper.push_back(model.variable(j).upper);
    }
    open.push(std::move(root));
  }

  const double prune_tol = 1e-9;
  while (!open.empty()) {
    if (std::isfinite(options.time_limit) &&
        seconds_since(start) > options.time_limit) {
      hit_limit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (have_incumbent &&
        node.bound <= incumbent_value + prune_tol * std::max(1.0, std::fabs(incumbent_value))) {
      continue;
    }
    ++result.stats.nodes;
    for (std::size_t k = 0; k < int_cols.size(); ++k) {
      check_call(highs.changeColBounds(int_cols[k], to_highs(node.lower[k]),
                                       to_highs(node.upper[k])),
                 "changeColBounds");
    }
    activate(node.local_rows);

    // Re-solve the node until the handler accepts or the node is pruned.
    while (true) {
      const auto status = run_checked(highs);
      result.stats.simplex_iterations += highs.getInfo().simplex_iteration_count;
      if (status == HighsModelStatus::kInfeasible) break;
      if (status == HighsModelStatus::kUnbounded) {
        if (result.stats.nodes == 1 && !have_incumbent) {
          result.status = SolveStatus::kUnbounded;
          result.stats.wall_time_s = seconds_since(start);
          return result;
        }
        throw SolverError("unbounded node relaxation below the root");
      }
      if (status != HighsModelStatus::kOptimal) {
        if (status == HighsModelStatus::kTimeLimit) {
          hit_limit = true;
          break;
        }
        throw SolverError("node relaxation ended with status '" +
                          highs.modelStatusToString(status) + "'");
      }
      const auto& x = highs.getSolution().col_value;
      const double value = flip * model.objective_value(x);
      if (have_incumbent &&
          value <= incumbent_value + prune_tol * std::max(1.0, std::fabs(incumbent_value))) {
        break;
      }

      // Most fractional integer column.
      int branch_k = -1;
      double best_frac = int_tol;
      for (std::size_t k = 0; k < int_cols.size(); ++k) {
        const double v = x[int_cols[k]];
        const double frac = std::fabs(v - std::round(v));
        if (frac > best_frac) {
          best_frac = frac;
          branch_k = static_cast<int>(k);
        }
      }

      if (branch_k < 0) {
        std::vector<double> candidate(x.begin(), x.end());
        for (int j : int_cols) candidate[j] = std::round(candidate[j]);
        std::vector<LazyRow> rows;
        if (lazy != nullptr && *lazy) rows = (*lazy)(candidate);
        if (rows.empty()) {
          have_incumbent = true;
          incumbent_value = value;
          result.primal = std::move(candidate);
          break;
        }
        bool separates = false;
        for (const auto& lr : rows) {
          double a = 0.0;
          for (const auto& t : lr.row.terms) a += t.coef * candidate[t.var];
          const double tol = 1e-7 * std::max(1.0, std::fabs(a));
          if (a < lr.row.lower - tol || a > lr.row.upper + tol) separates = true;
        }
        if (!separates) {
          throw SolverError("lazy rows do not cut off the rejected candidate");
        }
        for (auto& lr : rows) {
          if (lr.local) {
            local_table.push_back({add_row(lr.row), lr.row.lower, lr.row.upper});
            node.local_rows.push_back(static_cast<int>(local_table.size()) - 1);
            active_local.push_back(static_cast<int>(local_table.size()) - 1);
          } else {
            add_row(lr.row);
          }
        }
        continue;
      }

      const double v = x[int_cols[branch_k]];
      Node down = node;
      down.upper[branch_k] = std::floor(v);
      down.bound = value;
      down.order = ++order;
      Node up = node;
      up.lower[branch_k] = std::ceil(v);
      up.bound = value;
      up.order = ++order;
      open.push(std::move(down));
      open.push(std::move(up));
      break;
    }
    if (hit_limit) break;
  }

  if (have_incumbent) {
    result.status = hit_limit ? SolveStatus::kLimit : SolveStatus::kOptimal;
    result.objective = model.objective_value(result.primal);
    if (hit_limit) result.stats.mip_gap = kInf;
  } else {
    result.status = hit_limit ? SolveStatus::kLimit : SolveStatus::kInfeasible;
  }
  result.stats.wall_time_s = seconds_since(start);
  return result;
}

}  // namespace

std::unique_ptr<SolverBackend> make_backend(std::string_view name) {
  if (name == "highs") return std::make_unique<HighsBackend>();
  if (name == "highs-bc") return std::make_unique<BranchAndCutBackend>();
  throw SolverError("unknown solver backend '" + std::string(name) + "'");
}

std::vector<std::string> backend_names() { return {"highs", "highs-bc"}; }

}  // namespace mpclear
