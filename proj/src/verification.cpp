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

#include "mpclear/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mpclear/benders.hpp"
#include "mpclear/formulation.hpp"

namespace mpclear {

bool VerificationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<std::string> VerificationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.pass) out.push_back(c.name);
  }
  return out;
}

nlohmann::ordered_json VerificationReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["ok"] = ok();
  doc["tol"] = tol;
  doc["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    doc["checks"].push_back({{"name", c.name},
                             {"pass", c.pass},
                             {"max_residual", c.max_residual},
                             {"max_scaled_residual", c.max_scaled},
                             {"offenders", c.offenders}});
  }
  return doc;
}

std::string VerificationReport::to_csv() const {
  std::ostringstream out;
  out.precision(12);
  out << "check,pass,max_residual,max_scaled_residual,offenders\n";
  for (const auto& c : checks) {
    out << c.name << ',' << (c.pass ? "true" : "false") << ',' << c.max_residual
        << ',' << c.max_scaled << ',';
    for (std::size_t i = 0; i < c.offenders.size(); ++i) {
      out << (i ? ";" : "") << c.offenders[i];
    }
    out << '\n';
  }
  return out.str();
}

namespace {

// Accumulates violations of one named check.
class Check {
 public:
  Check(std::string name, double tol) : tol_(tol) { result_.name = std::move(name); }

  // residual >= 0 is the size of the violation.
  void add(double residual, double scale, const std::string& subject) {
    residual = std::max(0.0, residual);
    const double scaled = residual / std::max(1.0, std::fabs(scale));
    result_.max_residual = std::max(result_.max_residual, residual);
    result_.max_scaled = std::max(result_.max_scaled, scaled);
    if (!(scaled <= tol_)) {  // NaN fails too
      result_.pass = false;
      if (std::find(result_.offenders.begin(), result_.offenders.end(), subject) ==
          result_.offenders.end()) {
        result_.offenders.push_back(subject);
      }
    }
  }

  CheckResult done() { return std::move(result_); }

 private:
  double tol_;
  CheckResult result_;
};

void expect_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw StructuralError(std::string(what) + " has " + std::to_string(got) +
                          " entries, expected " + std::to_string(want));
  }
}

std::string cell_name(const Instance& inst, const InstanceIndex& idx, std::size_t cell) {
  const std::size_t t_count = idx.period_count();
  return "cell " + inst.network.locations[cell / t_count] + "/" +
         inst.network.periods[cell % t_count];
}

std::string sub_name(const Instance& inst, const InstanceIndex& idx, std::size_t f) {
  const std::size_t c = idx.owner(f);
  return inst.mp_bids[c].id + "#" + std::to_string(f - idx.sub_bid_offset(c));
}

}  // namespace

VerificationReport verify(const Instance& instance, const ClearingSolution& sol,
                          double tol) {
  const InstanceIndex idx(instance);
  const auto& p = sol.primal;
  const auto& d = sol.duals;
  const std::size_t n_h = instance.hourly_bids.size();
  const std::size_t n_c = instance.mp_bids.size();
  const std::size_t n_f = idx.sub_bid_count();
  const std::size_t n_k = instance.network.export_vars.size();
  const std::size_t n_m = instance.network.resources.size();
  const std::size_t pairs = idx.period_count() > 0 ? idx.period_count() - 1 : 0;
  const bool ramps = instance.has_ramping();
  const bool mic = sol.mode == ClearingMode::kMIC;

  expect_size(p.x_hourly.size(), n_h, "x_hourly");
  expect_size(p.x_sub.size(), n_f, "x_sub");
  expect_size(p.u.size(), n_c, "u");
  expect_size(p.n.size(), n_k, "n");
  expect_size(d.price.size(), idx.cell_count(), "price");
  expect_size(d.v.size(), n_m, "v");
  expect_size(d.s_hourly.size(), n_h, "s_hourly");
  expect_size(d.s_max.size(), n_f, "s_max");
  expect_size(d.s_min.size(), n_f, "s_min");
  expect_size(d.s_commit.size(), n_c, "s_commit");
  expect_size(d.du_accept.size(), n_c, "du_accept");
  expect_size(d.du_reject.size(), n_c, "du_reject");
  if (ramps) {
    expect_size(d.g_up.size(), n_c * pairs, "g_up");
    expect_size(d.g_down.size(), n_c * pairs, "g_down");
  } else if (!d.g_up.empty() || !d.g_down.empty()) {
    throw StructuralError("ramping multipliers given for an instance without ramp limits");
  }
  if (mic && !instance.has_mic_data()) {
    throw StructuralError("MIC mode solution for an instance without mic data");
  }

  const auto g_up = [&](std::size_t c, std::size_t t) {
    return ramps ? d.g_up[c * pairs + t] : 0.0;
  };
  const auto g_down = [&](std::size_t c, std::size_t t) {
    return ramps ? d.g_down[c * pairs + t] : 0.0;
  };
  const auto fixed = [&](std::size_t c) {
    return mic ? 0.0 : instance.mp_bids[c].fixed_cost;
  };
  const Commitment u = p.commitment();

  VerificationReport report;
  report.tol = tol;

  // Primal side.
  {
    Check c("primal_feasibility", tol);
    for (std::size_t i = 0; i < n_h; ++i) {
      const auto& id = instance.hourly_bids[i].id;
      c.add(-p.x_hourly[i], 1.0, id);
      c.add(p.x_hourly[i] - 1.0, 1.0, id);
    }
    for (std::size_t f = 0; f < n_f; ++f) {
      const std::size_t b = idx.owner(f);
      const double r = instance.mp_bids[b].sub_bids[f - idx.sub_bid_offset(b)].min_ratio;
      c.add(p.x_sub[f] - p.u[b], 1.0, sub_name(instance, idx, f));
      c.add(r * p.u[b] - p.x_sub[f], 1.0, sub_name(instance, idx, f));
    }
    for (std::size_t b = 0; b < n_c; ++b) {
      c.add(-p.u[b], 1.0, instance.mp_bids[b].id);
      c.add(p.u[b] - 1.0, 1.0, instance.mp_bids[b].id);
    }
    std::vector<double> bal(idx.cell_count(), 0.0);
    std::vector<double> scale(idx.cell_count(), 0.0);
    for (std::size_t i = 0; i < n_h; ++i) {
      const double q = instance.hourly_bids[i].quantity * p.x_hourly[i];
      bal[idx.hourly_cell(i)] += q;
      scale[idx.hourly_cell(i)] += std::fabs(q);
    }
    for (std::size_t f = 0; f < n_f; ++f) {
      const std::size_t b = idx.owner(f);
      const double q =
          instance.mp_bids[b].sub_bids[f - idx.sub_bid_offset(b)].quantity * p.x_sub[f];
      bal[idx.sub_bid_cell(f)] += q;
      scale[idx.sub_bid_cell(f)] += std::fabs(q);
    }
    for (std::size_t k = 0; k < n_k; ++k) {
      for (const auto& coef : instance.network.export_vars[k].coefficients) {
        const std::size_t cell = idx.cell(coef.location, coef.period);
        bal[cell] -= coef.value * p.n[k];
        scale[cell] += std::fabs(coef.value * p.n[k]);
      }
    }
    for (std::size_t cell = 0; cell < bal.size(); ++cell) {
      c.add(std::fabs(bal[cell]), scale[cell], cell_name(instance, idx, cell));
    }
    for (std::size_t m = 0; m < n_m; ++m) {
      const auto& res = instance.network.resources[m];
      double a = 0.0;
      double s = std::fabs(res.capacity);
      for (const auto& t : res.coefficients) {
        a += t.value * p.n[idx.export_var(t.export_var)];
        s += std::fabs(t.value * p.n[idx.export_var(t.export_var)]);
      }
      c.add(a - res.capacity, s, res.id);
    }
    if (ramps) {
      for (std::size_t b = 0; b < n_c; ++b) {
        const auto& bid = instance.mp_bids[b];
        if (!bid.ramp) continue;
        std::vector<double> out(idx.period_count(), 0.0);
        for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
          const std::size_t f = idx.sub_bid_offset(b) + k;
          out[idx.sub_bid_period(f)] += -bid.sub_bids[k].quantity * p.x_sub[f];
        }
        for (std::size_t t = 0; t < pairs; ++t) {
          const double s = std::fabs(out[t]) + std::fabs(out[t + 1]);
          c.add(out[t + 1] - out[t] - bid.ramp->up * p.u[b], s, bid.id);
          c.add(out[t] - out[t + 1] - bid.ramp->down * p.u[b], s, bid.id);
        }
      }
    }
    report.checks.push_back(c.done());
  }
  {
    Check c("commitment_integrality", tol);
    for (std::size_t b = 0; b < n_c; ++b) {
      c.add(std::min(std::fabs(p.u[b]), std::fabs(1.0 - p.u[b])), 1.0,
            instance.mp_bids[b].id);
    }
    report.checks.push_back(c.done());
  }
  {
    Check c("price_range", tol);
    for (std::size_t cell = 0; cell < d.price.size(); ++cell) {
      c.add(std::fabs(d.price[cell]) - instance.price_bound, instance.price_bound,
            cell_name(instance, idx, cell));
    }
    report.checks.push_back(c.done());
  }

  // Dual side.
  {
    Check c("dual_signs", tol);
    const auto nonneg = [&](const std::vector<double>& v, const std::string& what) {
      for (std::size_t j = 0; j < v.size(); ++j) {
        c.add(-v[j], 1.0, what + "[" + std::to_string(j) + "]");
      }
    };
    nonneg(d.v, "v");
    nonneg(d.s_hourly, "s_i");
    nonneg(d.s_max, "s_max");
    nonneg(d.s_min, "s_min");
    nonneg(d.s_commit, "s_c");
    nonneg(d.du_accept, "du_a");
    nonneg(d.du_reject, "du_r");
    nonneg(d.g_up, "g_up");
    nonneg(d.g_down, "g_down");
    report.checks.push_back(c.done());
  }

  // Left-hand side minus right-hand side of each dual row.
  std::vector<double> hourly_row(n_h), hourly_scale(n_h);
  for (std::size_t i = 0; i < n_h; ++i) {
    const auto& b = instance.hourly_bids[i];
    const double pi = d.price[idx.hourly_cell(i)];
    hourly_row[i] = d.s_hourly[i] + b.quantity * pi - b.quantity * b.price;
    hourly_scale[i] = std::fabs(d.s_hourly[i]) + std::fabs(b.quantity) *
                                                     (std::fabs(pi) + std::fabs(b.price));
  }
  std::vector<double> sub_row(n_f), sub_scale(n_f);
  for (std::size_t f = 0; f < n_f; ++f) {
    const std::size_t b = idx.owner(f);
    const auto& bid = instance.mp_bids[b];
    const auto& sub = bid.sub_bids[f - idx.sub_bid_offset(b)];
    const double pi = d.price[idx.sub_bid_cell(f)];
    double lhs = d.s_max[f] - d.s_min[f] + sub.quantity * pi;
    double scale = std::fabs(d.s_max[f]) + std::fabs(d.s_min[f]) +
                   std::fabs(sub.quantity) * (std::fabs(pi) + std::fabs(sub.price));
    if (bid.ramp) {
      const std::size_t tau = idx.sub_bid_period(f);
      const double q = sub.quantity;
      if (tau + 1 < idx.period_count()) {
        lhs += q * g_up(b, tau) - q * g_down(b, tau);
        scale += std::fabs(q) * (g_up(b, tau) + g_down(b, tau));
      }
      if (tau >= 1) {
        lhs += -q * g_up(b, tau - 1) + q * g_down(b, tau - 1);
        scale += std::fabs(q) * (g_up(b, tau - 1) + g_down(b, tau - 1));
      }
    }
    sub_row[f] = lhs - sub.quantity * sub.price;
    sub_scale[f] = scale;
  }
  // s_c + du^r - du^a - sum(s_max - r s_min) - ramp terms + F
  std::vector<double> commit_row(n_c), commit_scale(n_c);
  std::vector<double> ramp_term(n_c, 0.0);
  for (std::size_t b = 0; b < n_c; ++b) {
    const auto& bid = instance.mp_bids[b];
    double lhs = d.s_commit[b] + d.du_reject[b] - d.du_accept[b];
    double scale = std::fabs(d.s_commit[b]) + std::fabs(d.du_reject[b]) +
                   std::fabs(d.du_accept[b]) + fixed(b);
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const std::size_t f = idx.sub_bid_offset(b) + k;
      lhs -= d.s_max[f] - bid.sub_bids[k].min_ratio * d.s_min[f];
      scale += std::fabs(d.s_max[f]) + bid.sub_bids[k].min_ratio * std::fabs(d.s_min[f]);
    }
    if (bid.ramp) {
      for (std::size_t t = 0; t < pairs; ++t) {
        ramp_term[b] += bid.ramp->up * g_up(b, t) + bid.ramp->down * g_down(b, t);
      }
      lhs -= ramp_term[b];
      scale += ramp_term[b];
    }
    commit_row[b] = lhs + fixed(b);
    commit_scale[b] = scale;
  }
  std::vector<double> export_row(n_k, 0.0), export_scale(n_k, 0.0);
  for (std::size_t m = 0; m < n_m; ++m) {
    for (const auto& t : instance.network.resources[m].coefficients) {
      const std::size_t k = idx.export_var(t.export_var);
      export_row[k] += t.value * d.v[m];
      export_scale[k] += std::fabs(t.value * d.v[m]);
    }
  }
  for (std::size_t k = 0; k < n_k; ++k) {
    for (const auto& coef : instance.network.export_vars[k].coefficients) {
      const double pi = d.price[idx.cell(coef.location, coef.period)];
      export_row[k] -= coef.value * pi;
      export_scale[k] += std::fabs(coef.value * pi);
    }
  }

  {
    Check c("dual_feasibility", tol);
    for (std::size_t i = 0; i < n_h; ++i) {
      c.add(-hourly_row[i], hourly_scale[i], instance.hourly_bids[i].id);
    }
    for (std::size_t f = 0; f < n_f; ++f) {
      c.add(std::fabs(sub_row[f]), sub_scale[f], sub_name(instance, idx, f));
    }
    for (std::size_t b = 0; b < n_c; ++b) {
      c.add(-commit_row[b], commit_scale[b], instance.mp_bids[b].id);
    }
    report.checks.push_back(c.done());
  }
  {
    Check c("network_duality", tol);
    for (std::size_t k = 0; k < n_k; ++k) {
      c.add(std::fabs(export_row[k]), export_scale[k], instance.network.export_vars[k].id);
    }
    report.checks.push_back(c.done());
  }
  {
    // Accepted bids carry no shadow cost of rejection and vice versa; MPC and
    // MIC clearing has no shadow cost of acceptance at all.
    Check c("shadow_costs", tol);
    for (std::size_t b = 0; b < n_c; ++b) {
      const auto& id = instance.mp_bids[b].id;
      if (u[b] == 1) c.add(std::fabs(d.du_reject[b]), 1.0, id);
      if (u[b] == 0 || sol.mode != ClearingMode::kUMFS) {
        c.add(std::fabs(d.du_accept[b]), 1.0, id);
      }
    }
    report.checks.push_back(c.done());
  }

  // Complementarity.
  {
    Check c("complementarity_hourly", tol);
    for (std::size_t i = 0; i < n_h; ++i) {
      const auto& id = instance.hourly_bids[i].id;
      c.add(std::fabs(p.x_hourly[i] * hourly_row[i]), hourly_scale[i], id);
      c.add(std::fabs(d.s_hourly[i] * (1.0 - p.x_hourly[i])), d.s_hourly[i], id);
    }
    report.checks.push_back(c.done());
  }
  {
    Check c("complementarity_sub_bid", tol);
    for (std::size_t f = 0; f < n_f; ++f) {
      const std::size_t b = idx.owner(f);
      const double r = instance.mp_bids[b].sub_bids[f - idx.sub_bid_offset(b)].min_ratio;
      const auto name = sub_name(instance, idx, f);
      c.add(std::fabs(d.s_max[f] * (p.u[b] - p.x_sub[f])), d.s_max[f], name);
      c.add(std::fabs(d.s_min[f] * (p.x_sub[f] - r * p.u[b])), d.s_min[f], name);
    }
    report.checks.push_back(c.done());
  }
  {
    Check c("complementarity_commitment", tol);
    for (std::size_t b = 0; b < n_c; ++b) {
      const auto& id = instance.mp_bids[b].id;
      c.add(std::fabs(d.s_commit[b] * (1.0 - p.u[b])), d.s_commit[b], id);
      c.add(std::fabs(p.u[b] * commit_row[b]), commit_scale[b], id);
    }
    report.checks.push_back(c.done());
  }
  {
    Check c("complementarity_network", tol);
    for (std::size_t m = 0; m < n_m; ++m) {
      const auto& res = instance.network.resources[m];
      double a = 0.0;
      for (const auto& t : res.coefficients) a += t.value * p.n[idx.export_var(t.export_var)];
      c.add(std::fabs(d.v[m] * (res.capacity - a)), d.v[m] * std::max(1.0, std::fabs(res.capacity)),
            res.id);
    }
    report.checks.push_back(c.done());
  }
  if (ramps) {
    Check c("complementarity_ramping", tol);
    for (std::size_t b = 0; b < n_c; ++b) {
      const auto& bid = instance.mp_bids[b];
      if (!bid.ramp) continue;
      std::vector<double> out(idx.period_count(), 0.0);
      for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
        const std::size_t f = idx.sub_bid_offset(b) + k;
        out[idx.sub_bid_period(f)] += -bid.sub_bids[k].quantity * p.x_sub[f];
      }
      for (std::size_t t = 0; t < pairs; ++t) {
        const double up_slack = bid.ramp->up * p.u[b] - (out[t + 1] - out[t]);
        const double down_slack = bid.ramp->down * p.u[b] - (out[t] - out[t + 1]);
        c.add(std::fabs(g_up(b, t) * up_slack), g_up(b, t), bid.id);
        c.add(std::fabs(g_down(b, t) * down_slack), g_down(b, t), bid.id);
      }
    }
    report.checks.push_back(c.done());
  }

  // Strong duality, in equality form.
  const double w = welfare(instance, p, !mic);
  {
    Check c("strong_duality", tol);
    double dual_obj = 0.0;
    double scale = std::fabs(w);
    for (double s : d.s_hourly) {
      dual_obj += s;
      scale += std::fabs(s);
    }
    for (std::size_t b = 0; b < n_c; ++b) {
      dual_obj += d.s_commit[b] - d.du_accept[b];
      scale += std::fabs(d.s_commit[b]) + std::fabs(d.du_accept[b]);
    }
    for (std::size_t m = 0; m < n_m; ++m) {
      dual_obj += instance.network.resources[m].capacity * d.v[m];
      scale += std::fabs(instance.network.resources[m].capacity * d.v[m]);
    }
    c.add(std::fabs(w - dual_obj), scale, "welfare");
    report.checks.push_back(c.done());
  }
  {
    Check c("welfare_recomputed", tol);
    c.add(std::fabs(sol.welfare - w), w, "welfare");
    report.checks.push_back(c.done());
  }

  // Surplus interpretation and money-ness of hourly bids.
  {
    Check c("surplus_hourly", tol);
    for (std::size_t i = 0; i < n_h; ++i) {
      const auto& b = instance.hourly_bids[i];
      const double pi = d.price[idx.hourly_cell(i)];
      c.add(std::fabs(d.s_hourly[i] - b.quantity * (b.price - pi) * p.x_hourly[i]),
            hourly_scale[i], b.id);
    }
    report.checks.push_back(c.done());
  }
  {
    Check c("money_band_hourly", tol);
    for (std::size_t i = 0; i < n_h; ++i) {
      const auto& b = instance.hourly_bids[i];
      const double pi = d.price[idx.hourly_cell(i)];
      if (std::fabs(b.price - pi) <= tol) continue;  // at the money
      const bool itm = b.quantity * (b.price - pi) > 0.0;
      c.add(itm ? 1.0 - p.x_hourly[i] : p.x_hourly[i], 1.0, b.id);
    }
    report.checks.push_back(c.done());
  }
  {
    // For accepted bids without load-gradient rows, each step is at its
    // ceiling when in the money and at its floor when out of it.
    Check surplus("surplus_sub_bid", tol);
    Check band("money_band_sub_bid", tol);
    for (std::size_t b = 0; b < n_c; ++b) {
      const auto& bid = instance.mp_bids[b];
      if (u[b] != 1 || bid.ramp) continue;
      for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
        const auto& sub = bid.sub_bids[k];
        const std::size_t f = idx.sub_bid_offset(b) + k;
        const double pi = d.price[idx.sub_bid_cell(f)];
        const auto name = sub_name(instance, idx, f);
        surplus.add(std::fabs(d.s_max[f] - sub.min_ratio * d.s_min[f] -
                              sub.quantity * (sub.price - pi) * p.x_sub[f]),
                    sub_scale[f], name);
        if (std::fabs(sub.price - pi) <= tol) continue;
        const bool itm = sub.quantity * (sub.price - pi) > 0.0;
        band.add(itm ? p.u[b] - p.x_sub[f] : p.x_sub[f] - sub.min_ratio * p.u[b], 1.0, name);
      }
    }
    report.checks.push_back(surplus.done());
    report.checks.push_back(band.done());
  }

  // Minimum profit / maximum payment: accepted bids never lose money.
  std::vector<double> surplus_at_prices(n_c, 0.0);
  std::vector<double> surplus_scale(n_c, 0.0);
  for (std::size_t b = 0; b < n_c; ++b) {
    const auto& bid = instance.mp_bids[b];
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const auto& sub = bid.sub_bids[k];
      const std::size_t f = idx.sub_bid_offset(b) + k;
      const double pi = d.price[idx.sub_bid_cell(f)];
      surplus_at_prices[b] += sub.quantity * (sub.price - pi) * p.x_sub[f];
      surplus_scale[b] += std::fabs(sub.quantity) * (std::fabs(sub.price) + std::fabs(pi));
    }
  }
  {
    Check c("mp_condition", tol);
    for (std::size_t b = 0; b < n_c; ++b) {
      if (u[b] != 1) continue;
      c.add(fixed(b) - surplus_at_prices[b], surplus_scale[b] + fixed(b),
            instance.mp_bids[b].id);
    }
    report.checks.push_back(c.done());
  }
  if (ramps) {
    Check c("ramping_surplus", tol);
    for (std::size_t b = 0; b < n_c; ++b) {
      const auto& bid = instance.mp_bids[b];
      if (u[b] != 1 || !bid.ramp) continue;
      double lhs = ramp_term[b];
      for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
        const std::size_t f = idx.sub_bid_offset(b) + k;
        lhs += d.s_max[f] - bid.sub_bids[k].min_ratio * d.s_min[f];
      }
      c.add(std::fabs(lhs - surplus_at_prices[b]), surplus_scale[b] + ramp_term[b], bid.id);
    }
    report.checks.push_back(c.done());
  }
  if (mic) {
    Check identity("mic_income_identity", tol);
    Check condition("mic_condition", tol);
    for (std::size_t b = 0; b < n_c; ++b) {
      const auto& bid = instance.mp_bids[b];
      double income = 0.0;
      double marginal = 0.0;
      double volume = 0.0;
      double scale = std::fabs(d.s_commit[b]);
      for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
        const auto& sub = bid.sub_bids[k];
        const std::size_t f = idx.sub_bid_offset(b) + k;
        const double pi = d.price[idx.sub_bid_cell(f)];
        income += -sub.quantity * p.x_sub[f] * pi;
        marginal += sub.quantity * sub.price * p.x_sub[f];
        volume += -sub.quantity * p.x_sub[f];
        scale += std::fabs(sub.quantity) * (std::fabs(pi) + std::fabs(sub.price));
      }
      identity.add(std::fabs(income - (d.s_commit[b] - marginal)), scale, bid.id);
      if (u[b] == 1) {
        const double cost = bid.mic->startup_cost + volume * bid.mic->variable_cost;
        condition.add(cost - income, scale + std::fabs(cost), bid.id);
      }
    }
    report.checks.push_back(identity.done());
    report.checks.push_back(condition.done());
  }
  return report;
}

const OracleRecord* OracleResult::record(const Commitment& u) const {
  for (const auto& r : records) {
    if (r.u == u) return &r;
  }
  return nullptr;
}

std::vector<Commitment> OracleResult::optimal_set(double rel_tol) const {
  std::vector<Commitment> out;
  if (!best) return out;
  for (const auto& r : records) {
    if (r.mp_feasible &&
        std::fabs(r.welfare - best_welfare) <= rel_tol * std::max(1.0, std::fabs(best_welfare))) {
      out.push_back(r.u);
    }
  }
  return out;
}

nlohmann::ordered_json OracleResult::to_json(const Instance& instance) const {
  nlohmann::ordered_json doc;
  doc["mode"] = std::string(to_string(mode));
  if (best) {
    doc["best"] = *best;
    doc["best_welfare"] = best_welfare;
  } else {
    doc["best"] = nullptr;
  }
  std::vector<std::string> ids;
  for (const auto& bid : instance.mp_bids) ids.push_back(bid.id);
  doc["bids"] = ids;
  doc["records"] = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json row{{"u", r.u},
                               {"primal_feasible", r.primal_feasible},
                               {"welfare", r.primal_feasible ? nlohmann::ordered_json(r.welfare)
                                                              : nlohmann::ordered_json(nullptr)},
                               {"mp_feasible", r.mp_feasible}};
    if (r.worker_feasible) row["worker_feasible"] = *r.worker_feasible;
    doc["records"].push_back(std::move(row));
  }
  return doc;
}

OracleResult brute_force_oracle(const Instance& instance, ClearingMode mode,
                                const SolverBackend* backend, bool cross_check,
                                double tol, std::size_t max_bids) {
  require_valid(instance);
  const std::size_t n_c = instance.mp_bids.size();
  if (n_c > max_bids) {
    throw EnumerationLimit("brute-force oracle refuses " + std::to_string(n_c) +
                           " MP bids (limit " + std::to_string(max_bids) +
                           "); use the MPC or Benders clearing methods instead");
  }
  if (mode == ClearingMode::kUMFS) {
    throw std::invalid_argument("oracle supports MPC and MIC modes");
  }
  std::unique_ptr<SolverBackend> owned;
  if (backend == nullptr) {
    owned = make_backend("highs");
    backend = owned.get();
  }
  const bool mic = mode == ClearingMode::kMIC;
  OracleResult out;
  out.mode = mode;
  const std::size_t combos = std::size_t{1} << n_c;
  for (std::size_t mask = 0; mask < combos; ++mask) {
    OracleRecord rec;
    rec.u.resize(n_c);
    for (std::size_t c = 0; c < n_c; ++c) rec.u[c] = static_cast<int>((mask >> c) & 1U);

    const auto fixed = build_uwelfare(instance, rec.u);
    const auto lp = backend->solve(fixed.model, {});
    if (lp.status == SolveStatus::kInfeasible) {
      out.records.push_back(std::move(rec));
      continue;
    }
    if (!lp.optimal()) {
      throw SolverError("fixed-commitment LP ended with status " +
                        std::string(to_string(lp.status)));
    }
    rec.primal_feasible = true;
    const PrimalPoint point = extract_primal(instance, fixed, lp.primal);
    rec.welfare = welfare(instance, point, !mic);

    if (!mic) {
      const double w_mpc = rec.welfare;
      const auto prices = build_supporting_prices(instance, rec.u, w_mpc, mode, {}, tol);
      const auto res = backend->solve(prices.model, {});
      if (res.status != SolveStatus::kOptimal && res.status != SolveStatus::kInfeasible) {
        throw SolverError("supporting-price LP ended with status " +
                          std::string(to_string(res.status)));
      }
      rec.mp_feasible = res.optimal();
      if (cross_check) {
        rec.worker_feasible = worker_test(instance, rec.u, w_mpc, *backend, tol).feasible;
      }
    } else {
      // The income rows couple x and s_c, so search primal and dual together.
      FormulationConfig config;
      config.variant = Variant::kMIC;
      auto h = build_marketclearing_mpc(instance, config);
      for (std::size_t c = 0; c < n_c; ++c) {
        auto& var = h.model.variable(h.registry.at(Sym::kU, static_cast<int>(c)));
        var.lower = var.upper = rec.u[c];
      }
      h.model.relax_integrality();
      const auto res = backend->solve(h.model, {});
      if (res.status != SolveStatus::kOptimal && res.status != SolveStatus::kInfeasible) {
        throw SolverError("MIC fixed-commitment LP ended with status " +
                          std::string(to_string(res.status)));
      }
      rec.mp_feasible = res.optimal();
    }
    if (rec.mp_feasible && (!out.best || rec.welfare > out.best_welfare)) {
      out.best = rec.u;
      out.best_welfare = rec.welfare;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::vector<ProfitRow> profit_report(const Instance& instance,
                                     const ClearingSolution& sol) {
  const InstanceIndex idx(instance);
  std::vector<ProfitRow> rows;
  for (std::size_t b = 0; b < instance.mp_bids.size(); ++b) {
    const auto& bid = instance.mp_bids[b];
    ProfitRow row;
    row.bid = bid.id;
    row.accepted = sol.primal.u[b] > 0.5;
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const auto& sub = bid.sub_bids[k];
      const std::size_t f = idx.sub_bid_offset(b) + k;
      const double flow = -sub.quantity * sol.primal.x_sub[f];
      row.volume += flow;
      row.revenue += flow * sol.duals.price[idx.sub_bid_cell(f)];
      row.marginal_cost += flow * sub.price;
    }
    row.fixed_cost = bid.fixed_cost * sol.primal.u[b];
    row.profit = row.revenue - row.marginal_cost - row.fixed_cost;
    if (bid.mic) {
      row.mic_cost = bid.mic->startup_cost * sol.primal.u[b] + bid.mic->variable_cost * row.volume;
      row.mic_profit = row.revenue - *row.mic_cost;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json profit_report_json(const std::vector<ProfitRow>& rows) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row{{"bid", r.bid},
                               {"accepted", r.accepted},
                               {"volume", r.volume},
                               {"revenue", r.revenue},
                               {"marginal_cost", r.marginal_cost},
                               {"fixed_cost", r.fixed_cost},
                               {"costs", r.marginal_cost + r.fixed_cost},
                               {"profit", r.profit}};
    if (r.mic_cost) {
      row["mic_cost"] = *r.mic_cost;
      row["mic_profit"] = *r.mic_profit;
    }
    doc.push_back(std::move(row));
  }
  return doc;
}

std::string profit_report_csv(const std::vector<ProfitRow>& rows) {
  std::ostringstream out;
  out.precision(12);
  out << "bid,accepted,volume,revenue,marginal_cost,fixed_cost,profit,mic_cost,mic_profit\n";
  for (const auto& r : rows) {
    out << r.bid << ',' << (r.accepted ? 1 : 0) << ',' << r.volume << ',' << r.revenue
        << ',' << r.marginal_cost << ',' << r.fixed_cost << ',' << r.profit << ',';
    if (r.mic_cost) out << *r.mic_cost << ',' << *r.mic_profit;
    else out << ',';
    out << '\n';
  }
  return out.str();
}

}  // namespace mpclear
