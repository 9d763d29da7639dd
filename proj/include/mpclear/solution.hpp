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

#ifndef MPCLEAR_SOLUTION_HPP_
#define MPCLEAR_SOLUTION_HPP_

#include <string_view>
#include <vector>

#include "json.hpp"
#include "mpclear/market.hpp"

namespace mpclear {

// MPC: fixed costs in the welfare and in the profit condition.
// MIC: fixed costs out of the welfare; income condition with start-up and
//      ad-hoc variable cost instead.
// UMFS: MPC feasible set with explicit shadow costs of acceptance.
enum class ClearingMode { kMPC, kMIC, kUMFS };

std::string_view to_string(ClearingMode mode);
ClearingMode clearing_mode_from_string(std::string_view text);

// Commitment vector, one 0/1 entry per MP bid.
using Commitment = std::vector<int>;

struct PrimalPoint {
  std::vector<double> x_hourly;  // per hourly bid
  std::vector<double> x_sub;     // per flattened sub-bid
  std::vector<double> u;         // per MP bid
  std::vector<double> n;         // per export variable

  Commitment commitment() const;  // u rounded to 0/1
};

// Dual-side values. Ramping multipliers are indexed bid * (T - 1) + t and
// are empty when no load-gradient rows exist.
struct DualBlock {
  std::vector<double> price;  // per (location, period) cell
  std::vector<double> v;      // per resource
  std::vector<double> s_hourly;
  std::vector<double> s_max;
  std::vector<double> s_min;
  std::vector<double> s_commit;
  std::vector<double> du_accept;
  std::vector<double> du_reject;
  std::vector<double> g_up;
  std::vector<double> g_down;
};

struct ClearingSolution {
  PrimalPoint primal;
  DualBlock duals;
  double welfare = 0.0;
  ClearingMode mode = ClearingMode::kMPC;
};

// sum_i Q_i P_i x_i + sum_hc Q_hc P_hc x_hc (- sum_c F_c u_c).
double welfare(const Instance& instance, const PrimalPoint& primal,
               bool include_fixed_costs);

inline bool includes_fixed_costs(ClearingMode mode) {
  return mode != ClearingMode::kMIC;
}

nlohmann::ordered_json solution_to_json(const Instance& instance,
                                        const ClearingSolution& solution);
ClearingSolution solution_from_json(const nlohmann::json& doc);

}  // namespace mpclear

#endif  // MPCLEAR_SOLUTION_HPP_
