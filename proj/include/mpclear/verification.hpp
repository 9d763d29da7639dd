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

#ifndef MPCLEAR_VERIFICATION_HPP_
#define MPCLEAR_VERIFICATION_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpclear/market.hpp"
#include "mpclear/solution.hpp"
#include "mpclear/solver.hpp"

namespace mpclear {

struct CheckResult {
  std::string name;
  double max_residual = 0.0;  // raw, in the units of the check
  double max_scaled = 0.0;    // residual / max(1, scale); compared to tol
  bool pass = true;
  std::vector<std::string> offenders;
};

struct VerificationReport {
  double tol = 1e-6;
  std::vector<CheckResult> checks;

  bool ok() const;
  const CheckResult* find(const std::string& name) const;
  std::vector<std::string> failures() const;
  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

// Dual vectors missing or mis-sized for the instance and mode.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Residual r passes when r <= tol * max(1, scale), scale being the
// magnitude of the terms that make up r. Prices within tol of a limit price
// count as at-the-money.
VerificationReport verify(const Instance& instance,
                          const ClearingSolution& solution, double tol = 1e-6);

struct OracleRecord {
  Commitment u;
  bool primal_feasible = false;
  double welfare = 0.0;
  bool mp_feasible = false;
  // Worker max-form verdict (MPC mode only) for the cross-check.
  std::optional<bool> worker_feasible;
};

struct OracleResult {
  ClearingMode mode = ClearingMode::kMPC;
  std::optional<Commitment> best;
  double best_welfare = 0.0;
  std::vector<OracleRecord> records;  // in enumeration order

  const OracleRecord* record(const Commitment& u) const;
  // Commitments tied with the best welfare within rel_tol.
  std::vector<Commitment> optimal_set(double rel_tol = 1e-6) const;
  nlohmann::ordered_json to_json(const Instance& instance) const;
};

class EnumerationLimit : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kOracleMaxBids = 20;

// Enumerates every commitment vector. MPC: fixed-u welfare with fixed costs
// and the supporting-price LP as the MP test, cross-checked with the worker
// form when cross_check is set. MIC: fixed-u welfare without fixed costs and
// the MIC primal-dual LP with the commitment fixed.
OracleResult brute_force_oracle(const Instance& instance,
                                ClearingMode mode = ClearingMode::kMPC,
                                const SolverBackend* backend = nullptr,
                                bool cross_check = true, double tol = 1e-6,
                                std::size_t max_bids = kOracleMaxBids);

struct ProfitRow {
  Id bid;
  bool accepted = false;
  double volume = 0.0;          // sum of -Q x; positive for sells
  double revenue = 0.0;         // sum of (-Q x) pi
  double marginal_cost = 0.0;   // sum of (-Q x) P
  double fixed_cost = 0.0;      // F u
  double profit = 0.0;          // revenue - marginal_cost - fixed_cost
  // MIC view: start-up cost plus ad-hoc variable cost.
  std::optional<double> mic_cost;
  std::optional<double> mic_profit;
};

std::vector<ProfitRow> profit_report(const Instance& instance,
                                     const ClearingSolution& solution);
nlohmann::ordered_json profit_report_json(const std::vector<ProfitRow>& rows);
std::string profit_report_csv(const std::vector<ProfitRow>& rows);

}  // namespace mpclear

#endif  // MPCLEAR_VERIFICATION_HPP_
