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

#ifndef MPCLEAR_FORMULATION_HPP_
#define MPCLEAR_FORMULATION_HPP_

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "mpclear/market.hpp"
#include "mpclear/model.hpp"
#include "mpclear/solution.hpp"

namespace mpclear {

enum class Variant { kUWelfare, kUWelfareFixedU, kUMFS, kMPC, kMIC };

std::string_view to_string(Variant variant);

struct FormulationConfig {
  Variant variant = Variant::kMPC;
  // Add load-gradient rows for every MP bid that carries ramp limits.
  bool ramping = true;
  // Bound prices to [-price_bound, price_bound]. Unset means on for every
  // primal-dual variant.
  std::optional<bool> price_bound_rows;
  double feasibility_tol = 1e-6;
  // Per-bid replacement for compute_big_m, keyed by bid id.
  std::map<Id, double> big_m_override;
  // Required by kUWelfareFixedU.
  std::optional<Commitment> fixed_u;
  // Drop integrality of u (continuous relaxation).
  bool relax = false;
};

class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Sym {
  kXHourly,    // x_i
  kXSub,       // x_hc, flat sub-bid index
  kU,          // u_c
  kN,          // n_k
  kPrice,      // pi, cell index
  kV,          // v_m
  kSHourly,    // s_i
  kSMax,       // s_hc^max
  kSMin,       // s_hc^min
  kSCommit,    // s_c
  kDuAccept,   // du^a_c
  kDuReject,   // du^r_c
  kGUp,        // g^up_{c,t}, second index t
  kGDown,      // g^down_{c,t}
  kPriceAbs,   // |pi| epigraph variable of the supporting-price LP
};

std::string_view to_string(Sym sym);

// Maps every symbol occurrence to a column and every constraint family
// member to a row.
class SymbolRegistry {
 public:
  void bind(Sym sym, int a, int b, int var);
  void bind(Sym sym, int a, int var) { bind(sym, a, 0, var); }
  std::optional<int> find(Sym sym, int a, int b = 0) const;
  int at(Sym sym, int a, int b = 0) const;  // throws std::out_of_range
  std::size_t count(Sym sym) const;

  void bind_row(const std::string& family, int a, int b, int row);
  void bind_row(const std::string& family, int a, int row) {
    bind_row(family, a, 0, row);
  }
  std::optional<int> find_row(const std::string& family, int a,
                              int b = 0) const;
  int row_at(const std::string& family, int a, int b = 0) const;
  std::size_t row_count(const std::string& family) const;
  std::vector<std::string> families() const;

  nlohmann::ordered_json to_json(const Model& model) const;

 private:
  std::map<std::tuple<Sym, int, int>, int> vars_;
  std::map<std::tuple<std::string, int, int>, int> rows_;
};

struct ModelHandle {
  Model model;
  SymbolRegistry registry;
  FormulationConfig config;
  std::vector<double> big_m;  // per MP bid; empty for pure primal builds
  bool primal_dual = false;
};

// Upper bound on both the loss and the missed surplus of bid c at prices in
// [-price_bound, price_bound].
double compute_big_m(const MPBid& bid, double price_bound);
double compute_big_m(const MPBid& bid, double price_bound,
                     const FormulationConfig& config);

// Welfare maximisation over the primal rows. With fixed_u the result is an
// LP whose row duals are the fixed-commitment dual values; relax drops
// integrality instead.
ModelHandle build_uwelfare(const Instance& instance,
                           const std::optional<Commitment>& fixed_u = {},
                           bool relax = false);

// Dispatches on config.variant.
ModelHandle build_model(const Instance& instance,
                        const FormulationConfig& config);

// Primal-dual MILP (UMFS, MPC or MIC).
ModelHandle build_marketclearing_mpc(const Instance& instance,
                                     const FormulationConfig& config);

// Load-gradient rows on bids with ramp limits; extends dual rows of
// primal-dual builds.
ModelHandle add_ramping(ModelHandle handle, const Instance& instance);

// Welfare over the LP relaxation with u_c pinned to 0 where u_star_c = 0.
ModelHandle build_worker(const Instance& instance, const Commitment& u_star,
                         bool include_fixed_costs = true);

// Feasibility LP in the dual space for a fixed commitment: dual rows with
// du^a = 0, du^r only on rejected bids, strong duality against
// welfare_star, and in MIC mode income rows evaluated at x_sub (required
// then). Minimises sum |pi|.
ModelHandle build_supporting_prices(const Instance& instance,
                                    const Commitment& u, double welfare_star,
                                    ClearingMode mode,
                                    std::span<const double> x_sub = {},
                                    double tol = 1e-6);

// The welfare expression as a term list over the primal columns.
std::vector<Term> welfare_terms(const Instance& instance,
                                const SymbolRegistry& registry,
                                bool include_fixed_costs);

PrimalPoint extract_primal(const Instance& instance, const ModelHandle& handle,
                           std::span<const double> values);

// Dual values held in columns of a primal-dual or supporting-price model.
DualBlock extract_dual_columns(const Instance& instance,
                               const ModelHandle& handle,
                               std::span<const double> values);

// Dual values from the row duals of a fixed-commitment LP.
DualBlock extract_row_duals(const Instance& instance, const ModelHandle& handle,
                            std::span<const double> row_duals);

}  // namespace mpclear

#endif  // MPCLEAR_FORMULATION_HPP_
