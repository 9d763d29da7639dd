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

#ifndef MPCLEAR_BENDERS_HPP_
#define MPCLEAR_BENDERS_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mpclear/formulation.hpp"
#include "mpclear/market.hpp"
#include "mpclear/solution.hpp"
#include "mpclear/solver.hpp"

namespace mpclear {

enum class CutKind { kClassical, kNoGood, kStrengthenedGlobal, kStrengthenedLocal };
enum class BendersMode { kIterative, kCallback };
enum class CutPolicy { kStrengthenedPlusNoGood, kNoGoodOnly, kClassicalOnly };

std::string_view to_string(CutKind kind);
std::string_view to_string(BendersMode mode);
std::string_view to_string(CutPolicy policy);
CutPolicy cut_policy_from_string(std::string_view text);

// Result of the price-supportability test for one commitment.
struct WorkerOutcome {
  bool feasible = false;
  double welfare_star = 0.0;
  double worker_welfare = 0.0;
  // Worker optimum; u# is 0 wherever u* is 0.
  PrimalPoint worker_point;
  // Supporting duals, present when feasible.
  std::optional<DualBlock> duals;
};

class WorkerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// welfare_star must be the exact fixed-u welfare of the incumbent.
WorkerOutcome worker_test(const Instance& instance, const Commitment& u_star,
                          double welfare_star, const SolverBackend& backend,
                          double tol = 1e-6);

// A row sum(coef * value) >= rhs over the primal point of the market.
struct CutRecord {
  CutKind kind = CutKind::kNoGood;
  Commitment incumbent;
  std::vector<int> accepted;
  std::vector<int> rejected;
  std::vector<double> coef_x_hourly;
  std::vector<double> coef_x_sub;
  std::vector<double> coef_u;
  std::vector<double> coef_n;
  double rhs = 0.0;
  // Provenance.
  double incumbent_welfare = 0.0;
  double worker_welfare = 0.0;

  bool global() const { return kind != CutKind::kStrengthenedLocal; }
  // lhs - rhs; nonnegative when the point satisfies the cut.
  double slack(const PrimalPoint& point) const;
  bool satisfied(const PrimalPoint& point, double tol = 1e-6) const;
  Row to_row(const SymbolRegistry& registry, const std::string& name) const;
  nlohmann::ordered_json to_json() const;
};

class CutScopeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Strengthened global cuts are only valid at master optima; pass
// master_optimal = false from inside a branch-and-bound search.
CutRecord generate_cut(const Instance& instance, CutKind kind,
                       const WorkerOutcome& outcome, const Commitment& u_star,
                       bool master_optimal = true);

struct BendersOptions {
  BendersMode mode = BendersMode::kIterative;
  CutPolicy policy = CutPolicy::kStrengthenedPlusNoGood;
  // Empty picks "highs" for iterative and "highs-bc" for callback mode.
  std::string backend;
  SolveOptions solve;
  double tol = 1e-6;
  int max_iterations = 1 << 20;
};

struct BendersStats {
  int iterations = 0;
  int cuts_classical = 0;
  int cuts_no_good = 0;
  int cuts_strengthened_global = 0;
  int cuts_strengthened_local = 0;
  long long master_nodes = 0;
  double wall_time_s = 0.0;
  std::vector<double> master_objectives;
  BendersMode mode_used = BendersMode::kIterative;
  std::string backend_used;
  std::optional<std::string> fallback;  // why callback mode was not used

  int total_cuts() const {
    return cuts_classical + cuts_no_good + cuts_strengthened_global +
           cuts_strengthened_local;
  }
  nlohmann::ordered_json to_json() const;
};

struct BendersResult {
  SolveStatus status = SolveStatus::kInfeasible;
  std::optional<ClearingSolution> solution;
  BendersStats stats;
  std::vector<CutRecord> cuts;
};

BendersResult solve_benders(const Instance& instance,
                            const BendersOptions& options = {});

}  // namespace mpclear

#endif  // MPCLEAR_BENDERS_HPP_
