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

#include "mpclear/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mpclear {

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::kUWelfare:
      return "UWELFARE";
    case Variant::kUWelfareFixedU:
      return "UWELFARE_FIXED_U";
    case Variant::kUMFS:
      return "UMFS";
    case Variant::kMPC:
      return "MPC";
    case Variant::kMIC:
      return "MIC";
  }
  return "?";
}

std::string_view to_string(Sym sym) {
  switch (sym) {
    case Sym::kXHourly:
      return "x_i";
    case Sym::kXSub:
      return "x_hc";
    case Sym::kU:
      return "u_c";
    case Sym::kN:
      return "n_k";
    case Sym::kPrice:
      return "pi_lt";
    case Sym::kV:
      return "v_m";
    case Sym::kSHourly:
      return "s_i";
    case Sym::kSMax:
      return "s_hc_max";
    case Sym::kSMin:
      return "s_hc_min";
    case Sym::kSCommit:
      return "s_c";
    case Sym::kDuAccept:
      return "du_a_c";
    case Sym::kDuReject:
      return "du_r_c";
    case Sym::kGUp:
      return "g_up_ct";
    case Sym::kGDown:
      return "g_down_ct";
    case Sym::kPriceAbs:
      return "abs_pi_lt";
  }
  return "?";
}

void SymbolRegistry::bind(Sym sym, int a, int b, int var) {
  if (!vars_.emplace(std::make_tuple(sym, a, b), var).second) {
    throw std::logic_error("symbol " + std::string(to_string(sym)) +
                           " bound twice at index " + std::to_string(a));
  }
}

std::optional<int> SymbolRegistry::find(Sym sym, int a, int b) const {
  auto it = vars_.find({sym, a, b});
  if (it == vars_.end()) return std::nullopt;
  return it->second;
}

int SymbolRegistry::at(Sym sym, int a, int b) const {
  auto v = find(sym, a, b);
  if (!v) {
    throw std::out_of_range("symbol " + std::string(to_string(sym)) +
                            " not registered at index " + std::to_string(a));
  }
  return *v;
}

std::size_t SymbolRegistry::count(Sym sym) const {
  std::size_t n = 0;
  for (const auto& [key, var] : vars_) n += std::get<0>(key) == sym;
  return n;
}

void SymbolRegistry::bind_row(const std::string& family, int a, int b,
                              int row) {
  if (!rows_.emplace(std::make_tuple(family, a, b), row).second) {
    throw std::logic_error("row family " + family + " bound twice at index " +
                           std::to_string(a));
  }
}

std::optional<int> SymbolRegistry::find_row(const std::string& family, int a,
                                             int b) const {
  auto it = rows_.find({family, a, b});
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

int SymbolRegistry::row_at(const std::string& family, int a, int b) const {
  auto r = find_row(family, a, b);
  if (!r) {
    throw std::out_of_range("row family " + family + " has no index " +
                            std::to_string(a));
  }
  return *r;
}

std::size_t SymbolRegistry::row_count(const std::string& family) const {
  std::size_t n = 0;
  for (const auto& [key, row] : rows_) n += std::get<0>(key) == family;
  return n;
}

std::vector<std::string> SymbolRegistry::families() const {
  std::set<std::string> names;
  for (const auto& [key, row] : rows_) names.insert(std::get<0>(key));
  return {names.begin(), names.end()};
}

nlohmann::ordered_json SymbolRegistry::to_json(const Model& model) const {
  nlohmann::ordered_json doc;
  doc["variables"] = nlohmann::ordered_json::array();
  for (const auto& [key, var] : vars_) {
    doc["variables"].push_back({{"symbol", std::string(to_string(std::get<0>(key)))},
                                {"index", {std::get<1>(key), std::get<2>(key)}},
                                {"column", var},
                                {"name", model.variable(var).name}});
  }
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& [key, row] : rows_) {
    doc["rows"].push_back({{"family", std::get<0>(key)},
                           {"index", {std::get<1>(key), std::get<2>(key)}},
                           {"row", row},
                           {"name", model.row(row).name}});
  }
  return doc;
}

double compute_big_m(const MPBid& bid, double price_bound) {
  double m = bid.fixed_cost;
  for (const auto& sub : bid.sub_bids) {
    m += std::fabs(sub.quantity) * (price_bound + std::fabs(sub.price));
  }
  return m;
}

double compute_big_m(const MPBid& bid, double price_bound,
                     const FormulationConfig& config) {
  auto it = config.big_m_override.find(bid.id);
  if (it != config.big_m_override.end()) return it->second;
  return compute_big_m(bid, price_bound);
}

namespace {

std::string idx_name(std::string_view stem, std::size_t a) {
  return std::string(stem) + "_" + std::to_string(a);
}

std::string idx_name(std::string_view stem, std::size_t a, std::size_t b) {
  return std::string(stem) + "_" + std::to_string(a) + "_" + std::to_string(b);
}

struct PrimalOptions {
  bool mip = false;             // binary u, boxed x
  std::optional<Commitment> fixed_u;
  const Commitment* pinned = nullptr;  // u_c <= 0 where pinned[c] == 0
  bool include_fixed_costs = true;
};

void check_commitment(const Instance& instance, const Commitment& u) {
  if (u.size() != instance.mp_bids.size()) {
    throw ConfigurationError("commitment vector has " + std::to_string(u.size()) +
                             " entries for " +
                             std::to_string(instance.mp_bids.size()) + " MP bids");
  }
  for (int v : u) {
    if (v != 0 && v != 1) throw ConfigurationError("commitment entries must be 0 or 1");
  }
}

void add_primal(ModelHandle& h, const Instance& inst, const InstanceIndex& idx,
                const PrimalOptions& opt) {
  auto& m = h.model;
  auto& reg = h.registry;
  const double box = opt.mip ? 1.0 : kInf;

  for (std::size_t i = 0; i < inst.hourly_bids.size(); ++i) {
    const auto& b = inst.hourly_bids[i];
    reg.bind(Sym::kXHourly, static_cast<int>(i),
             m.add_variable(idx_name("x_h", i), 0.0, box, b.quantity * b.price));
  }
  for (std::size_t c = 0; c < inst.mp_bids.size(); ++c) {
    const auto& bid = inst.mp_bids[c];
    double upper = opt.mip ? 1.0 : kInf;
    if (opt.pinned != nullptr && (*opt.pinned)[c] == 0) upper = 0.0;
    const bool integer = opt.mip;
    reg.bind(Sym::kU, static_cast<int>(c),
             m.add_variable(idx_name("u", c), 0.0, upper,
                            opt.include_fixed_costs ? -bid.fixed_cost : 0.0,
                            integer ? VarType::kInteger : VarType::kContinuous));
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const auto& sub = bid.sub_bids[k];
      const std::size_t flat = idx.sub_bid_offset(c) + k;
      // Boxed in MIP builds only; LP builds keep x_hc free so that row duals
      // carry the whole dual solution.
      reg.bind(Sym::kXSub, static_cast<int>(flat),
               m.add_variable(idx_name("x_s", flat), opt.mip ? 0.0 : -kInf,
                              opt.mip ? 1.0 : kInf, sub.quantity * sub.price));
    }
  }
  for (std::size_t k = 0; k < inst.network.export_vars.size(); ++k) {
    reg.bind(Sym::kN, static_cast<int>(k),
             m.add_variable(idx_name("n", k), -kInf, kInf));
  }

  for (std::size_t i = 0; i < inst.hourly_bids.size(); ++i) {
    const int row = m.add_le(idx_name("hourly_cap", i),
                             {{reg.at(Sym::kXHourly, static_cast<int>(i)), 1.0}}, 1.0);
    reg.bind_row("hourly_cap", static_cast<int>(i), row);
  }
  for (std::size_t c = 0; c < inst.mp_bids.size(); ++c) {
    const auto& bid = inst.mp_bids[c];
    const int u = reg.at(Sym::kU, static_cast<int>(c));
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const int flat = static_cast<int>(idx.sub_bid_offset(c) + k);
      const int x = reg.at(Sym::kXSub, flat);
      reg.bind_row("sub_bid_cap", flat,
                   m.add_le(idx_name("sub_bid_cap", flat), {{x, 1.0}, {u, -1.0}}, 0.0));
      reg.bind_row("sub_bid_min", flat,
                   m.add_ge(idx_name("sub_bid_min", flat),
                            {{x, 1.0}, {u, -bid.sub_bids[k].min_ratio}}, 0.0));
    }
    reg.bind_row("commitment_cap", static_cast<int>(c),
                 m.add_le(idx_name("commitment_cap", c), {{u, 1.0}}, 1.0));
  }

  std::vector<std::vector<Term>> balance(idx.cell_count());
  for (std::size_t i = 0; i < inst.hourly_bids.size(); ++i) {
    balance[idx.hourly_cell(i)].push_back(
        {reg.at(Sym::kXHourly, static_cast<int>(i)), inst.hourly_bids[i].quantity});
  }
  for (std::size_t c = 0; c < inst.mp_bids.size(); ++c) {
    const auto& bid = inst.mp_bids[c];
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const std::size_t flat = idx.sub_bid_offset(c) + k;
      balance[idx.sub_bid_cell(flat)].push_back(
          {reg.at(Sym::kXSub, static_cast<int>(flat)), bid.sub_bids[k].quantity});
    }
  }
  for (std::size_t k = 0; k < inst.network.export_vars.size(); ++k) {
    for (const auto& coef : inst.network.export_vars[k].coefficients) {
      balance[idx.cell(coef.location, coef.period)].push_back(
          {reg.at(Sym::kN, static_cast<int>(k)), -coef.value});
    }
  }
  for (std::size_t cell = 0; cell < balance.size(); ++cell) {
    reg.bind_row("balance", static_cast<int>(cell),
                 m.add_eq(idx_name("balance", cell), std::move(balance[cell]), 0.0));
  }
  for (std::size_t r = 0; r < inst.network.resources.size(); ++r) {
    const auto& res = inst.network.resources[r];
    std::vector<Term> terms;
    for (const auto& t : res.coefficients) {
      terms.push_back({reg.at(Sym::kN, static_cast<int>(idx.export_var(t.export_var))),
                       t.value});
    }
    reg.bind_row("resource_cap", static_cast<int>(r),
                 m.add_le(idx_name("resource_cap", r), std::move(terms), res.capacity));
  }

  if (opt.fixed_u) {
    for (std::size_t c = 0; c < inst.mp_bids.size(); ++c) {
      const int u = reg.at(Sym::kU, static_cast<int>(c));
      if ((*opt.fixed_u)[c] == 1) {
        reg.bind_row("fix_accept", static_cast<int>(c),
                     m.add_le(idx_name("fix_accept", c), {{u, -1.0}}, -1.0));
      } else {
        reg.bind_row("fix_reject", static_cast<int>(c),
                     m.add_le(idx_name("fix_reject", c), {{u, 1.0}}, 0.0));
      }
    }
  }
}

bool ramped(const MPBid& bid) { return bid.ramp.has_value(); }

}  // namespace

std::vector<Term> welfare_terms(const Instance& instance,
                                const SymbolRegistry& registry,
                                bool include_fixed_costs) {
  std::vector<Term> terms;
  for (std::size_t i = 0; i < instance.hourly_bids.size(); ++i) {
    const auto& b = instance.hourly_bids[i];
    terms.push_back({registry.at(Sym::kXHourly, static_cast<int>(i)), b.quantity * b.price});
  }
  int flat = 0;
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    const auto& bid = instance.mp_bids[c];
    for (const auto& sub : bid.sub_bids) {
      terms.push_back({registry.at(Sym::kXSub, flat++), sub.quantity * sub.price});
    }
    if (include_fixed_costs && bid.fixed_cost != 0.0) {
      terms.push_back({registry.at(Sym::kU, static_cast<int>(c)), -bid.fixed_cost});
    }
  }
  return terms;
}

ModelHandle build_uwelfare(const Instance& instance,
                           const std::optional<Commitment>& fixed_u,
                           bool relax) {
  FormulationConfig config;
  config.variant = fixed_u ? Variant::kUWelfareFixedU : Variant::kUWelfare;
  config.fixed_u = fixed_u;
  config.relax = relax;
  return build_model(instance, config);
}

ModelHandle build_model(const Instance& instance,
                        const FormulationConfig& config) {
  require_valid(instance);
  if (config.variant == Variant::kUMFS || config.variant == Variant::kMPC ||
      config.variant == Variant::kMIC) {
    return build_marketclearing_mpc(instance, config);
  }
  ModelHandle h;
  h.config = config;
  PrimalOptions opt;
  if (config.variant == Variant::kUWelfareFixedU) {
    if (!config.fixed_u) {
      throw ConfigurationError("UWELFARE_FIXED_U requires a commitment vector");
    }
    check_commitment(instance, *config.fixed_u);
    opt.fixed_u = config.fixed_u;
  } else {
    opt.mip = !config.relax;
  }
  const InstanceIndex idx(instance);
  add_primal(h, instance, idx, opt);
  if (config.ramping && instance.has_ramping()) {
    h = add_ramping(std::move(h), instance);
  }
  return h;
}

ModelHandle build_marketclearing_mpc(const Instance& instance,
                                     const FormulationConfig& config) {
  if (config.variant != Variant::kUMFS && config.variant != Variant::kMPC &&
      config.variant != Variant::kMIC) {
    throw ConfigurationError("variant " + std::string(to_string(config.variant)) +
                             " is not a primal-dual formulation");
  }
  require_valid(instance);
  const bool mic = config.variant == Variant::kMIC;
  const bool umfs = config.variant == Variant::kUMFS;
  if (mic) {
    for (const auto& bid : instance.mp_bids) {
      if (!bid.mic) {
        throw ConfigurationError("MIC variant needs mic data on bid '" + bid.id + "'");
      }
    }
  }

  ModelHandle h;
  h.config = config;
  h.primal_dual = true;
  const InstanceIndex idx(instance);
  PrimalOptions opt;
  opt.mip = !config.relax;
  opt.include_fixed_costs = !mic;
  add_primal(h, instance, idx, opt);

  auto& m = h.model;
  auto& reg = h.registry;
  const bool bound_prices = config.price_bound_rows.value_or(true);
  const double pb = instance.price_bound;

  for (std::size_t cell = 0; cell < idx.cell_count(); ++cell) {
    reg.bind(Sym::kPrice, static_cast<int>(cell),
             m.add_variable(idx_name("pi", cell), bound_prices ? -pb : -kInf,
                            bound_prices ? pb : kInf));
  }
  for (std::size_t r = 0; r < instance.network.resources.size(); ++r) {
    reg.bind(Sym::kV, static_cast<int>(r), m.add_variable(idx_name("v", r), 0.0, kInf));
  }
  for (std::size_t i = 0; i < instance.hourly_bids.size(); ++i) {
    reg.bind(Sym::kSHourly, static_cast<int>(i),
             m.add_variable(idx_name("s_h", i), 0.0, kInf));
  }
  for (std::size_t f = 0; f < idx.sub_bid_count(); ++f) {
    reg.bind(Sym::kSMax, static_cast<int>(f), m.add_variable(idx_name("s_max", f), 0.0, kInf));
    reg.bind(Sym::kSMin, static_cast<int>(f), m.add_variable(idx_name("s_min", f), 0.0, kInf));
  }
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    reg.bind(Sym::kSCommit, static_cast<int>(c),
             m.add_variable(idx_name("s_c", c), 0.0, kInf));
    if (umfs) {
      reg.bind(Sym::kDuAccept, static_cast<int>(c),
               m.add_variable(idx_name("du_a", c), 0.0, kInf));
      reg.bind(Sym::kDuReject, static_cast<int>(c),
               m.add_variable(idx_name("du_r", c), 0.0, kInf));
    }
  }

  // Dual rows of x_i and x_hc.
  for (std::size_t i = 0; i < instance.hourly_bids.size(); ++i) {
    const auto& b = instance.hourly_bids[i];
    const int pi = reg.at(Sym::kPrice, static_cast<int>(idx.hourly_cell(i)));
    reg.bind_row("dual_hourly", static_cast<int>(i),
                 m.add_ge(idx_name("dual_hourly", i),
                          {{reg.at(Sym::kSHourly, static_cast<int>(i)), 1.0},
                           {pi, b.quantity}},
                          b.quantity * b.price));
  }
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    const auto& bid = instance.mp_bids[c];
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const auto& sub = bid.sub_bids[k];
      const int f = static_cast<int>(idx.sub_bid_offset(c) + k);
      const int pi = reg.at(Sym::kPrice, static_cast<int>(idx.sub_bid_cell(f)));
      reg.bind_row("dual_sub_bid", f,
                   m.add_eq(idx_name("dual_sub_bid", f),
                            {{reg.at(Sym::kSMax, f), 1.0},
                             {reg.at(Sym::kSMin, f), -1.0},
                             {pi, sub.quantity}},
                            sub.quantity * sub.price));
    }
  }

  // Dual rows of u_c, linearised with the commitment.
  h.big_m.resize(instance.mp_bids.size());
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    const auto& bid = instance.mp_bids[c];
    const int ci = static_cast<int>(c);
    const double big_m = compute_big_m(bid, pb, config);
    h.big_m[c] = big_m;
    const double fixed = mic ? 0.0 : bid.fixed_cost;
    std::vector<Term> terms{{reg.at(Sym::kSCommit, ci), 1.0}};
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const int f = static_cast<int>(idx.sub_bid_offset(c) + k);
      terms.push_back({reg.at(Sym::kSMax, f), -1.0});
      terms.push_back({reg.at(Sym::kSMin, f), bid.sub_bids[k].min_ratio});
    }
    const int u = reg.at(Sym::kU, ci);
    if (umfs) {
      terms.push_back({reg.at(Sym::kDuReject, ci), 1.0});
      terms.push_back({reg.at(Sym::kDuAccept, ci), -1.0});
      reg.bind_row("dual_commitment", ci,
                   m.add_ge(idx_name("dual_commitment", c), std::move(terms), -fixed));
      reg.bind_row("deactivate_reject", ci,
                   m.add_le(idx_name("deactivate_reject", c),
                            {{reg.at(Sym::kDuReject, ci), 1.0}, {u, big_m}}, big_m));
      reg.bind_row("deactivate_accept", ci,
                   m.add_le(idx_name("deactivate_accept", c),
                            {{reg.at(Sym::kDuAccept, ci), 1.0}, {u, -big_m}}, 0.0));
    } else {
      // s_c >= sum(s_max - r s_min) - F - M (1 - u)
      terms.push_back({u, -big_m});
      reg.bind_row("dual_commitment", ci,
                   m.add_ge(idx_name("dual_commitment", c), std::move(terms),
                            -fixed - big_m));
    }
  }

  // Dual rows of n_k.
  for (std::size_t k = 0; k < instance.network.export_vars.size(); ++k) {
    std::vector<Term> terms;
    for (std::size_t r = 0; r < instance.network.resources.size(); ++r) {
      for (const auto& t : instance.network.resources[r].coefficients) {
        if (idx.export_var(t.export_var) == k) {
          terms.push_back({reg.at(Sym::kV, static_cast<int>(r)), t.value});
        }
      }
    }
    for (const auto& coef : instance.network.export_vars[k].coefficients) {
      terms.push_back({reg.at(Sym::kPrice, static_cast<int>(idx.cell(coef.location, coef.period))),
                       -coef.value});
    }
    reg.bind_row("dual_export", static_cast<int>(k),
                 m.add_eq(idx_name("dual_export", k), std::move(terms), 0.0));
  }

  // welfare >= sum s_i + sum s_c + sum w v (- sum du^a)
  {
    std::vector<Term> terms = welfare_terms(instance, reg, !mic);
    for (std::size_t i = 0; i < instance.hourly_bids.size(); ++i) {
      terms.push_back({reg.at(Sym::kSHourly, static_cast<int>(i)), -1.0});
    }
    for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
      terms.push_back({reg.at(Sym::kSCommit, static_cast<int>(c)), -1.0});
      if (umfs) terms.push_back({reg.at(Sym::kDuAccept, static_cast<int>(c)), 1.0});
    }
    for (std::size_t r = 0; r < instance.network.resources.size(); ++r) {
      terms.push_back({reg.at(Sym::kV, static_cast<int>(r)),
                       -instance.network.resources[r].capacity});
    }
    reg.bind_row("strong_duality", 0, m.add_ge("strong_duality", std::move(terms), 0.0));
  }

  if (mic) {
    // s_c - sum Q P x + sum Q V x >= F~ u, i.e. income covers F~ and V.
    for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
      const auto& bid = instance.mp_bids[c];
      const int ci = static_cast<int>(c);
      std::vector<Term> terms{{reg.at(Sym::kSCommit, ci), 1.0}};
      for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
        const auto& sub = bid.sub_bids[k];
        const int f = static_cast<int>(idx.sub_bid_offset(c) + k);
        terms.push_back({reg.at(Sym::kXSub, f),
                         sub.quantity * (bid.mic->variable_cost - sub.price)});
      }
      terms.push_back({reg.at(Sym::kU, ci), -bid.mic->startup_cost});
      reg.bind_row("mic_income", ci,
                   m.add_ge(idx_name("mic_income", c), std::move(terms), 0.0));
    }
  }

  if (config.ramping && instance.has_ramping()) {
    h = add_ramping(std::move(h), instance);
  }
  return h;
}

ModelHandle add_ramping(ModelHandle h, const Instance& instance) {
  const InstanceIndex idx(instance);
  const std::size_t periods = idx.period_count();
  auto& m = h.model;
  auto& reg = h.registry;
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    const auto& bid = instance.mp_bids[c];
    if (!ramped(bid)) continue;
    if (!bid.is_sell()) {
      throw ConfigurationError("ramp limits on buy-side MP bid '" + bid.id + "'");
    }
    const int ci = static_cast<int>(c);
    const int u = reg.at(Sym::kU, ci);
    // Output in period t is sum over the bid's sub-bids in t of -Q x.
    std::vector<std::vector<Term>> output(periods);
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const std::size_t f = idx.sub_bid_offset(c) + k;
      output[idx.sub_bid_period(f)].push_back(
          {reg.at(Sym::kXSub, static_cast<int>(f)), -bid.sub_bids[k].quantity});
    }
    for (std::size_t t = 0; t + 1 < periods; ++t) {
      const int ti = static_cast<int>(t);
      std::vector<Term> up;
      std::vector<Term> down;
      for (const auto& term : output[t + 1]) {
        up.push_back(term);
        down.push_back({term.var, -term.coef});
      }
      for (const auto& term : output[t]) {
        up.push_back({term.var, -term.coef});
        down.push_back(term);
      }
      up.push_back({u, -bid.ramp->up});
      down.push_back({u, -bid.ramp->down});
      reg.bind_row("ramp_up", ci, ti, m.add_le(idx_name("ramp_up", c, t), std::move(up), 0.0));
      reg.bind_row("ramp_down", ci, ti,
                   m.add_le(idx_name("ramp_down", c, t), std::move(down), 0.0));
    }
    if (!h.primal_dual) continue;

    for (std::size_t t = 0; t + 1 < periods; ++t) {
      const int ti = static_cast<int>(t);
      reg.bind(Sym::kGUp, ci, ti, m.add_variable(idx_name("g_up", c, t), 0.0, kInf));
      reg.bind(Sym::kGDown, ci, ti, m.add_variable(idx_name("g_down", c, t), 0.0, kInf));
    }
    // x_hc in period tau sits in the pair rows tau (as -o_t) and tau-1
    // (as o_{t+1}).
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const int f = static_cast<int>(idx.sub_bid_offset(c) + k);
      const double q = bid.sub_bids[k].quantity;
      const std::size_t tau = idx.sub_bid_period(f);
      const int row = reg.row_at("dual_sub_bid", f);
      if (tau + 1 < periods) {
        m.add_to_row(row, reg.at(Sym::kGUp, ci, static_cast<int>(tau)), q);
        m.add_to_row(row, reg.at(Sym::kGDown, ci, static_cast<int>(tau)), -q);
      }
      if (tau >= 1) {
        m.add_to_row(row, reg.at(Sym::kGUp, ci, static_cast<int>(tau - 1)), -q);
        m.add_to_row(row, reg.at(Sym::kGDown, ci, static_cast<int>(tau - 1)), q);
      }
    }
    const int commit_row = reg.row_at("dual_commitment", ci);
    for (std::size_t t = 0; t + 1 < periods; ++t) {
      const int ti = static_cast<int>(t);
      m.add_to_row(commit_row, reg.at(Sym::kGUp, ci, ti), -bid.ramp->up);
      m.add_to_row(commit_row, reg.at(Sym::kGDown, ci, ti), -bid.ramp->down);
    }
  }
  return h;
}

ModelHandle build_worker(const Instance& instance, const Commitment& u_star,
                         bool include_fixed_costs) {
  require_valid(instance);
  check_commitment(instance, u_star);
  ModelHandle h;
  h.config.variant = Variant::kUWelfare;
  h.config.relax = true;
  PrimalOptions opt;
  opt.pinned = &u_star;
  opt.include_fixed_costs = include_fixed_costs;
  const InstanceIndex idx(instance);
  add_primal(h, instance, idx, opt);
  if (instance.has_ramping()) h = add_ramping(std::move(h), instance);
  return h;
}

ModelHandle build_supporting_prices(const Instance& instance,
                                    const Commitment& u, double welfare_star,
                                    ClearingMode mode,
                                    std::span<const double> x_sub, double tol) {
  require_valid(instance);
  check_commitment(instance, u);
  const InstanceIndex idx(instance);
  const bool mic = mode == ClearingMode::kMIC;
  if (mic && !instance.has_mic_data()) {
    throw ConfigurationError("MIC mode needs mic data on every MP bid");
  }
  if (mic && x_sub.size() != idx.sub_bid_count()) {
    throw ConfigurationError("MIC supporting prices need the sub-bid acceptances");
  }
  const double pb = instance.price_bound;
  const std::size_t periods = idx.period_count();

  ModelHandle h;
  h.model = Model(Sense::kMinimize);
  h.primal_dual = true;
  auto& m = h.model;
  auto& reg = h.registry;

  for (std::size_t cell = 0; cell < idx.cell_count(); ++cell) {
    const int pi = m.add_variable(idx_name("pi", cell), -pb, pb);
    const int abs = m.add_variable(idx_name("abs_pi", cell), 0.0, kInf, 1.0);
    reg.bind(Sym::kPrice, static_cast<int>(cell), pi);
    reg.bind(Sym::kPriceAbs, static_cast<int>(cell), abs);
    m.add_ge(idx_name("abs_pi_pos", cell), {{abs, 1.0}, {pi, -1.0}}, 0.0);
    m.add_ge(idx_name("abs_pi_neg", cell), {{abs, 1.0}, {pi, 1.0}}, 0.0);
  }
  for (std::size_t r = 0; r < instance.network.resources.size(); ++r) {
    reg.bind(Sym::kV, static_cast<int>(r), m.add_variable(idx_name("v", r), 0.0, kInf));
  }
  for (std::size_t i = 0; i < instance.hourly_bids.size(); ++i) {
    reg.bind(Sym::kSHourly, static_cast<int>(i), m.add_variable(idx_name("s_h", i), 0.0, kInf));
  }
  for (std::size_t f = 0; f < idx.sub_bid_count(); ++f) {
    reg.bind(Sym::kSMax, static_cast<int>(f), m.add_variable(idx_name("s_max", f), 0.0, kInf));
    reg.bind(Sym::kSMin, static_cast<int>(f), m.add_variable(idx_name("s_min", f), 0.0, kInf));
  }
  h.big_m.resize(instance.mp_bids.size());
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    const int ci = static_cast<int>(c);
    h.big_m[c] = compute_big_m(instance.mp_bids[c], pb);
    reg.bind(Sym::kSCommit, ci, m.add_variable(idx_name("s_c", c), 0.0, kInf));
    if (u[c] == 0) {
      reg.bind(Sym::kDuReject, ci, m.add_variable(idx_name("du_r", c), 0.0, h.big_m[c]));
    }
    if (instance.mp_bids[c].ramp) {
      for (std::size_t t = 0; t + 1 < periods; ++t) {
        const int ti = static_cast<int>(t);
        reg.bind(Sym::kGUp, ci, ti, m.add_variable(idx_name("g_up", c, t), 0.0, kInf));
        reg.bind(Sym::kGDown, ci, ti, m.add_variable(idx_name("g_down", c, t), 0.0, kInf));
      }
    }
  }

  for (std::size_t i = 0; i < instance.hourly_bids.size(); ++i) {
    const auto& b = instance.hourly_bids[i];
    reg.bind_row("dual_hourly", static_cast<int>(i),
                 m.add_ge(idx_name("dual_hourly", i),
                          {{reg.at(Sym::kSHourly, static_cast<int>(i)), 1.0},
                           {reg.at(Sym::kPrice, static_cast<int>(idx.hourly_cell(i))), b.quantity}},
                          b.quantity * b.price));
  }
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    const auto& bid = instance.mp_bids[c];
    const int ci = static_cast<int>(c);
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const auto& sub = bid.sub_bids[k];
      const int f = static_cast<int>(idx.sub_bid_offset(c) + k);
      std::vector<Term> terms{{reg.at(Sym::kSMax, f), 1.0},
                              {reg.at(Sym::kSMin, f), -1.0},
                              {reg.at(Sym::kPrice, static_cast<int>(idx.sub_bid_cell(f))),
                               sub.quantity}};
      if (bid.ramp) {
        const std::size_t tau = idx.sub_bid_period(f);
        if (tau + 1 < periods) {
          terms.push_back({reg.at(Sym::kGUp, ci, static_cast<int>(tau)), sub.quantity});
          terms.push_back({reg.at(Sym::kGDown, ci, static_cast<int>(tau)), -sub.quantity});
        }
        if (tau >= 1) {
          terms.push_back({reg.at(Sym::kGUp, ci, static_cast<int>(tau - 1)), -sub.quantity});
          terms.push_back({reg.at(Sym::kGDown, ci, static_cast<int>(tau - 1)), sub.quantity});
        }
      }
      reg.bind_row("dual_sub_bid", f,
                   m.add_eq(idx_name("dual_sub_bid", f), std::move(terms),
                            sub.quantity * sub.price));
    }
    const double fixed = mic ? 0.0 : bid.fixed_cost;
    std::vector<Term> terms{{reg.at(Sym::kSCommit, ci), 1.0}};
    if (u[c] == 0) terms.push_back({reg.at(Sym::kDuReject, ci), 1.0});
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const int f = static_cast<int>(idx.sub_bid_offset(c) + k);
      terms.push_back({reg.at(Sym::kSMax, f), -1.0});
      terms.push_back({reg.at(Sym::kSMin, f), bid.sub_bids[k].min_ratio});
    }
    if (bid.ramp) {
      for (std::size_t t = 0; t + 1 < periods; ++t) {
        terms.push_back({reg.at(Sym::kGUp, ci, static_cast<int>(t)), -bid.ramp->up});
        terms.push_back({reg.at(Sym::kGDown, ci, static_cast<int>(t)), -bid.ramp->down});
      }
    }
    reg.bind_row("dual_commitment", ci,
                 m.add_ge(idx_name("dual_commitment", c), std::move(terms), -fixed));
  }
  for (std::size_t k = 0; k < instance.network.export_vars.size(); ++k) {
    std::vector<Term> terms;
    for (std::size_t r = 0; r < instance.network.resources.size(); ++r) {
      for (const auto& t : instance.network.resources[r].coefficients) {
        if (idx.export_var(t.export_var) == k) {
          terms.push_back({reg.at(Sym::kV, static_cast<int>(r)), t.value});
        }
      }
    }
    for (const auto& coef : instance.network.export_vars[k].coefficients) {
      terms.push_back({reg.at(Sym::kPrice, static_cast<int>(idx.cell(coef.location, coef.period))),
                       -coef.value});
    }
    reg.bind_row("dual_export", static_cast<int>(k),
                 m.add_eq(idx_name("dual_export", k), std::move(terms), 0.0));
  }
  {
    const double w_star = welfare_star;
    std::vector<Term> terms;
    for (std::size_t i = 0; i < instance.hourly_bids.size(); ++i) {
      terms.push_back({reg.at(Sym::kSHourly, static_cast<int>(i)), 1.0});
    }
    for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
      terms.push_back({reg.at(Sym::kSCommit, static_cast<int>(c)), 1.0});
    }
    for (std::size_t r = 0; r < instance.network.resources.size(); ++r) {
      terms.push_back({reg.at(Sym::kV, static_cast<int>(r)),
                       instance.network.resources[r].capacity});
    }
    reg.bind_row("strong_duality", 0,
                 m.add_le("strong_duality", std::move(terms),
                          w_star + tol * std::max(1.0, std::fabs(w_star))));
  }
  if (mic) {
    // With the primal fixed, the income condition bounds s_c from below.
    for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
      if (u[c] == 0) continue;
      const auto& bid = instance.mp_bids[c];
      double rhs = bid.mic->startup_cost;
      for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
        const auto& sub = bid.sub_bids[k];
        const std::size_t f = idx.sub_bid_offset(c) + k;
        rhs += sub.quantity * (sub.price - bid.mic->variable_cost) * x_sub[f];
      }
      reg.bind_row("mic_income", static_cast<int>(c),
                   m.add_ge(idx_name("mic_income", c),
                            {{reg.at(Sym::kSCommit, static_cast<int>(c)), 1.0}}, rhs));
    }
  }
  return h;
}

PrimalPoint extract_primal(const Instance& instance, const ModelHandle& handle,
                           std::span<const double> values) {
  const auto& reg = handle.registry;
  PrimalPoint p;
  for (std::size_t i = 0; i < instance.hourly_bids.size(); ++i) {
    p.x_hourly.push_back(values[reg.at(Sym::kXHourly, static_cast<int>(i))]);
  }
  const std::size_t subs = instance.sub_bid_count();
  for (std::size_t f = 0; f < subs; ++f) {
    p.x_sub.push_back(values[reg.at(Sym::kXSub, static_cast<int>(f))]);
  }
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    p.u.push_back(values[reg.at(Sym::kU, static_cast<int>(c))]);
  }
  for (std::size_t k = 0; k < instance.network.export_vars.size(); ++k) {
    p.n.push_back(values[reg.at(Sym::kN, static_cast<int>(k))]);
  }
  return p;
}

namespace {

double column_or_zero(const SymbolRegistry& reg, std::span<const double> values,
                      Sym sym, int a, int b = 0) {
  auto v = reg.find(sym, a, b);
  return v ? values[*v] : 0.0;
}

double row_or_zero(const SymbolRegistry& reg, std::span<const double> duals,
                   const std::string& family, int a, int b = 0) {
  auto r = reg.find_row(family, a, b);
  return r ? duals[*r] : 0.0;
}

}  // namespace

DualBlock extract_dual_columns(const Instance& instance,
                               const ModelHandle& handle,
                               std::span<const double> values) {
  const auto& reg = handle.registry;
  const InstanceIndex idx(instance);
  DualBlock d;
  for (std::size_t cell = 0; cell < idx.cell_count(); ++cell) {
    d.price.push_back(column_or_zero(reg, values, Sym::kPrice, static_cast<int>(cell)));
  }
  for (std::size_t r = 0; r < instance.network.resources.size(); ++r) {
    d.v.push_back(column_or_zero(reg, values, Sym::kV, static_cast<int>(r)));
  }
  for (std::size_t i = 0; i < instance.hourly_bids.size(); ++i) {
    d.s_hourly.push_back(column_or_zero(reg, values, Sym::kSHourly, static_cast<int>(i)));
  }
  for (std::size_t f = 0; f < idx.sub_bid_count(); ++f) {
    d.s_max.push_back(column_or_zero(reg, values, Sym::kSMax, static_cast<int>(f)));
    d.s_min.push_back(column_or_zero(reg, values, Sym::kSMin, static_cast<int>(f)));
  }
  const std::size_t pairs = idx.period_count() > 0 ? idx.period_count() - 1 : 0;
  const bool ramps = instance.has_ramping();
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    const int ci = static_cast<int>(c);
    d.s_commit.push_back(column_or_zero(reg, values, Sym::kSCommit, ci));
    d.du_accept.push_back(column_or_zero(reg, values, Sym::kDuAccept, ci));
    d.du_reject.push_back(column_or_zero(reg, values, Sym::kDuReject, ci));
    if (!ramps) continue;
    for (std::size_t t = 0; t < pairs; ++t) {
      d.g_up.push_back(column_or_zero(reg, values, Sym::kGUp, ci, static_cast<int>(t)));
      d.g_down.push_back(column_or_zero(reg, values, Sym::kGDown, ci, static_cast<int>(t)));
    }
  }
  return d;
}

DualBlock extract_row_duals(const Instance& instance, const ModelHandle& handle,
                            std::span<const double> duals) {
  const auto& reg = handle.registry;
  const InstanceIndex idx(instance);
  DualBlock d;
  for (std::size_t cell = 0; cell < idx.cell_count(); ++cell) {
    d.price.push_back(row_or_zero(reg, duals, "balance", static_cast<int>(cell)));
  }
  for (std::size_t r = 0; r < instance.network.resources.size(); ++r) {
    d.v.push_back(row_or_zero(reg, duals, "resource_cap", static_cast<int>(r)));
  }
  for (std::size_t i = 0; i < instance.hourly_bids.size(); ++i) {
    d.s_hourly.push_back(row_or_zero(reg, duals, "hourly_cap", static_cast<int>(i)));
  }
  for (std::size_t f = 0; f < idx.sub_bid_count(); ++f) {
    d.s_max.push_back(row_or_zero(reg, duals, "sub_bid_cap", static_cast<int>(f)));
    // >= row of a maximisation: nonpositive dual.
    d.s_min.push_back(-row_or_zero(reg, duals, "sub_bid_min", static_cast<int>(f)));
  }
  const std::size_t pairs = idx.period_count() > 0 ? idx.period_count() - 1 : 0;
  const bool ramps = instance.has_ramping();
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    const int ci = static_cast<int>(c);
    d.s_commit.push_back(row_or_zero(reg, duals, "commitment_cap", ci));
    d.du_accept.push_back(row_or_zero(reg, duals, "fix_accept", ci));
    d.du_reject.push_back(row_or_zero(reg, duals, "fix_reject", ci));
    if (!ramps) continue;
    for (std::size_t t = 0; t < pairs; ++t) {
      d.g_up.push_back(row_or_zero(reg, duals, "ramp_up", ci, static_cast<int>(t)));
      d.g_down.push_back(row_or_zero(reg, duals, "ramp_down", ci, static_cast<int>(t)));
    }
  }
  return d;
}

}  // namespace mpclear
