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

#ifndef MPCLEAR_CLEARING_HPP_
#define MPCLEAR_CLEARING_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mpclear/benders.hpp"
#include "mpclear/market.hpp"
#include "mpclear/solution.hpp"
#include "mpclear/solver.hpp"

namespace mpclear {

enum class Method { kMPC, kMIC, kUMFS, kBendersIterative, kBendersCallback };

std::string_view to_string(Method method);
Method method_from_string(std::string_view text);
std::vector<std::string> method_names();
ClearingMode clearing_mode(Method method);

struct ClearOptions {
  Method method = Method::kMPC;
  CutPolicy policy = CutPolicy::kStrengthenedPlusNoGood;
  std::string backend;  // empty: method default
  SolveOptions solve;
  double tol = 1e-6;
  bool ramping = true;
};

struct ClearResult {
  Method method = Method::kMPC;
  SolveStatus status = SolveStatus::kInfeasible;
  std::optional<ClearingSolution> solution;
  double gap = 0.0;
  long long nodes = 0;
  double runtime_s = 0.0;
  std::optional<BendersStats> benders;
  std::vector<CutRecord> cuts;

  nlohmann::ordered_json to_json() const;
};

// Primal-dual methods solve the MILP and then re-solve it as an LP with the
// commitment fixed, so reported duals come from an LP vertex.
ClearResult clear(const Instance& instance, const ClearOptions& options = {});

// Sets du^r on rejected bids to the smallest value that satisfies their
// commitment dual row; zero elsewhere.
void fill_reject_duals(const Instance& instance, ClearingSolution& solution);

}  // namespace mpclear

#endif  // MPCLEAR_CLEARING_HPP_
