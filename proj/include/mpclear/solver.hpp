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

#ifndef MPCLEAR_SOLVER_HPP_
#define MPCLEAR_SOLVER_HPP_

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mpclear/model.hpp"

namespace mpclear {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kLimit };

std::string_view to_string(SolveStatus status);

struct SolveOptions {
  double time_limit = kInf;
  double mip_rel_gap = 0.0;
  double feasibility_tol = 1e-7;
  bool disable_heuristics = false;
  bool verbose = false;
};

struct SolveStats {
  long long nodes = 0;
  long long simplex_iterations = 0;
  double mip_gap = 0.0;  // relative, as reported by the engine
  double wall_time_s = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kLimit;
  double objective = 0.0;
  std::vector<double> primal;  // one entry per model variable
  // LP only: d(objective)/d(row bound). For a maximisation, binding <= rows
  // carry nonnegative duals and binding >= rows nonpositive ones.
  std::vector<double> row_duals;
  SolveStats stats;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

struct SolverCapabilities {
  bool supports_lazy_constraints = false;
  bool supports_local_cuts = false;
  bool supports_heuristics_toggle = false;
};

// A row returned by a lazy-constraint handler. Local rows stay active only
// in the branch-and-bound subtree of the node that produced the incumbent.
struct LazyRow {
  Row row;
  bool local = false;
};

// Called with every integer-feasible candidate before it may become the
// incumbent. An empty return accepts the candidate.
using LazyHandler = std::function<std::vector<LazyRow>(std::span<const double>)>;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedCapability : public SolverError {
 public:
  using SolverError::SolverError;
};

class SolverBackend {
 public:
  virtual ~SolverBackend() = default;

  virtual std::string name() const = 0;
  virtual SolverCapabilities capabilities() const = 0;

  // Throws SolverError on engine failure; never fabricates a status.
  virtual SolveResult solve(const Model& model, const SolveOptions& options,
                            const LazyHandler* lazy = nullptr) const = 0;
};

// "highs": HiGHS simplex and branch-and-cut, no lazy rows.
// "highs-bc": depth-first-by-bound branch-and-bound over HiGHS LP
// relaxations with lazy and node-local rows; incumbents only ever come from
// node LP optima.
std::unique_ptr<SolverBackend> make_backend(std::string_view name);
std::vector<std::string> backend_names();

}  // namespace mpclear

#endif  // MPCLEAR_SOLVER_HPP_
