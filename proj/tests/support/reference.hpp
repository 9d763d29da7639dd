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

// Reference computations for tests. Nothing here goes through the
// formulation, solver or verification modules: models are built straight
// from the Instance and solved by a small dense simplex.

#ifndef MPCLEAR_TESTS_REFERENCE_HPP_
#define MPCLEAR_TESTS_REFERENCE_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mpclear/market.hpp"

namespace reference {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// max c.x subject to rows and bounds.
struct DenseLp {
  struct Row {
    std::vector<std::pair<int, double>> terms;
    char sense = '<';  // '<', '>' or '='
    double rhs = 0.0;
  };
  std::vector<double> cost, lower, upper;
  std::vector<Row> rows;

  int add_var(double lo, double up, double obj) {
    cost.push_back(obj);
    lower.push_back(lo);
    upper.push_back(up);
    return static_cast<int>(cost.size()) - 1;
  }
  void add_row(std::vector<std::pair<int, double>> terms, char sense, double rhs) {
    rows.push_back({std::move(terms), sense, rhs});
  }
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct DenseResult {
  Status status = Status::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;
};

namespace detail {

// Bland-rule tableau simplex on max c.y, A y = b, y >= 0, b >= 0, with an
// initial basis given by `basis`. Columns flagged in `blocked` never enter.
class Tableau {
 public:
  Tableau(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<int> basis)
      : a_(std::move(a)), b_(std::move(b)), basis_(std::move(basis)) {}

  // Returns false when unbounded.
  bool optimise(const std::vector<double>& c, const std::vector<bool>& blocked) {
    const std::size_t m = a_.size();
    const std::size_t n = c.size();
    for (int iter = 0; iter < 100000; ++iter) {
      int enter = -1;
      for (std::size_t j = 0; j < n && enter < 0; ++j) {
        if (blocked[j]) continue;
        double reduced = -c[j];
        for (std::size_t i = 0; i < m; ++i) reduced += c[basis_[i]] * a_[i][j];
        if (reduced < -kEps) enter = static_cast<int>(j);
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = kInf;
      for (std::size_t i = 0; i < m; ++i) {
        if (a_[i][enter] > kEps) {
          const double ratio = b_[i] / a_[i][enter];
          if (ratio < best - kEps ||
              (ratio <= best + kEps && leave >= 0 && basis_[i] < basis_[leave])) {
            best = ratio;
            leave = static_cast<int>(i);
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw std::runtime_error("reference simplex did not terminate");
  }

  void pivot(int r, int col) {
    const double p = a_[r][col];
    for (auto& v : a_[r]) v /= p;
    b_[r] /= p;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (static_cast<int>(i) == r) continue;
      const double f = a_[i][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < a_[i].size(); ++j) a_[i][j] -= f * a_[r][j];
      b_[i] -= f * b_[r];
    }
    basis_[r] = col;
  }

  double value(const std::vector<double>& c) const {
    double z = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) z += c[basis_[i]] * b_[i];
    return z;
  }

  std::vector<double> point(std::size_t n) const {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < a_.size(); ++i) y[basis_[i]] = b_[i];
    return y;
  }

  std::vector<std::vector<double>>& a() { return a_; }
  std::vector<int>& basis() { return basis_; }

  static constexpr double kEps = 1e-9;

 private:
  std::vector<std::vector<double>> a_;
  std::vector<double> b_;
  std::vector<int> basis_;
};

}  // namespace detail

inline DenseResult solve(const DenseLp& lp) {
  // Substitute x = shift + sign * y (plus y2 for free columns).
  struct Map {
    double shift = 0.0;
    int pos = -1, neg = -1;
  };
  const std::size_t nx = lp.cost.size();
  std::vector<Map> map(nx);
  int ny = 0;
  std::vector<double> cost_y;
  std::vector<std::pair<int, double>> upper_rows;  // (y, bound)
  for (std::size_t j = 0; j < nx; ++j) {
    const double lo = lp.lower[j], up = lp.upper[j];
    if (std::isfinite(lo)) {
      map[j].shift = lo;
      map[j].pos = ny++;
      cost_y.push_back(lp.cost[j]);
      if (std::isfinite(up)) upper_rows.push_back({map[j].pos, up - lo});
    } else if (std::isfinite(up)) {
      map[j].shift = up;
      map[j].neg = ny++;
      cost_y.push_back(-lp.cost[j]);
    } else {
      map[j].pos = ny++;
      cost_y.push_back(lp.cost[j]);
      map[j].neg = ny++;
      cost_y.push_back(-lp.cost[j]);
    }
  }
  double offset = 0.0;
  for (std::size_t j = 0; j < nx; ++j) offset += lp.cost[j] * map[j].shift;

  struct StdRow {
    std::vector<double> coef;
    char sense;
    double rhs;
  };
  std::vector<StdRow> rows;
  for (const auto& r : lp.rows) {
    StdRow s{std::vector<double>(ny, 0.0), r.sense, r.rhs};
    for (const auto& [j, v] : r.terms) {
      s.rhs -= v * map[j].shift;
      if (map[j].pos >= 0) s.coef[map[j].pos] += v;
      if (map[j].neg >= 0) s.coef[map[j].neg] -= v;
    }
    rows.push_back(std::move(s));
  }
  for (const auto& [y, bound] : upper_rows) {
    StdRow s{std::vector<double>(ny, 0.0), '<', bound};
    s.coef[y] = 1.0;
    rows.push_back(std::move(s));
  }
  for (auto& r : rows) {
    if (r.rhs < 0.0) {
      for (auto& v : r.coef) v = -v;
      r.rhs = -r.rhs;
      if (r.sense == '<') {
        r.sense = '>';
      } else if (r.sense == '>') {
        r.sense = '<';
      }
    }
  }
  // Columns: y, then one slack per inequality, then artificials.
  const std::size_t m = rows.size();
  int n_slack = 0;
  for (const auto& r : rows) n_slack += r.sense != '=';
  int n_art = 0;
  for (const auto& r : rows) n_art += r.sense != '<';
  const std::size_t ncol = static_cast<std::size_t>(ny + n_slack + n_art);
  std::vector<std::vector<double>> a(m, std::vector<double>(ncol, 0.0));
  std::vector<double> b(m);
  std::vector<int> basis(m);
  int slack = ny, art = ny + n_slack;
  std::vector<bool> is_art(ncol, false);
  for (std::size_t i = 0; i < m; ++i) {
    for (int j = 0; j < ny; ++j) a[i][j] = rows[i].coef[j];
    b[i] = rows[i].rhs;
    if (rows[i].sense == '<') {
      a[i][slack] = 1.0;
      basis[i] = slack++;
    } else {
      if (rows[i].sense == '>') a[i][slack++] = -1.0;
      a[i][art] = 1.0;
      is_art[art] = true;
      basis[i] = art++;
    }
  }
  detail::Tableau t(std::move(a), std::move(b), std::move(basis));
  std::vector<double> c1(ncol, 0.0);
  for (std::size_t j = 0; j < ncol; ++j) c1[j] = is_art[j] ? -1.0 : 0.0;
  t.optimise(c1, std::vector<bool>(ncol, false));
  DenseResult out;
  if (t.value(c1) < -1e-7) {
    out.status = Status::kInfeasible;
    return out;
  }
  // Drive zero-level artificials out where possible.
  for (std::size_t i = 0; i < m; ++i) {
    if (!is_art[t.basis()[i]]) continue;
    for (std::size_t j = 0; j < ncol; ++j) {
      if (!is_art[j] && std::fabs(t.a()[i][j]) > 1e-9) {
        t.pivot(static_cast<int>(i), static_cast<int>(j));
        break;
      }
    }
  }
  std::vector<double> c2(ncol, 0.0);
  for (int j = 0; j < ny; ++j) c2[j] = cost_y[j];
  if (!t.optimise(c2, is_art)) {
    out.status = Status::kUnbounded;
    return out;
  }
  const auto y = t.point(ncol);
  out.status = Status::kOptimal;
  out.objective = t.value(c2) + offset;
  out.x.resize(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    double v = map[j].shift;
    if (map[j].pos >= 0) v += y[map[j].pos];
    if (map[j].neg >= 0) v -= y[map[j].neg];
    out.x[j] = v;
  }
  return out;
}

// Welfare LP of a market with commitment levels u in [0, u_cap] (continuous
// when relax, otherwise pinned to u_cap).
struct MarketLp {
  DenseLp lp;
  std::vector<int> x_hourly, x_sub, u, n;
};

inline MarketLp market_lp(const mpclear::Instance& inst, const std::vector<int>& u_cap,
                          bool relax, bool include_fixed, bool ramping = true) {
  MarketLp out;
  auto& lp = out.lp;
  std::map<std::pair<std::string, std::string>, int> cell;
  for (const auto& l : inst.network.locations) {
    for (const auto& t : inst.network.periods) {
      const int id = static_cast<int>(cell.size());
      cell[{l, t}] = id;
    }
  }
  std::vector<std::vector<std::pair<int, double>>> balance(cell.size());
  for (const auto& b : inst.hourly_bids) {
    const int x = lp.add_var(0.0, 1.0, b.quantity * b.price);
    out.x_hourly.push_back(x);
    balance[cell.at({b.location, b.period})].push_back({x, b.quantity});
  }
  for (std::size_t c = 0; c < inst.mp_bids.size(); ++c) {
    const auto& bid = inst.mp_bids[c];
    const double cap = u_cap[c];
    const int u = relax ? lp.add_var(0.0, cap, include_fixed ? -bid.fixed_cost : 0.0)
                        : lp.add_var(cap, cap, include_fixed ? -bid.fixed_cost : 0.0);
    out.u.push_back(u);
    std::map<std::string, std::vector<std::pair<int, double>>> output;
    for (const auto& s : bid.sub_bids) {
      const int x = lp.add_var(0.0, kInf, s.quantity * s.price);
      out.x_sub.push_back(x);
      lp.add_row({{x, 1.0}, {u, -1.0}}, '<', 0.0);
      lp.add_row({{x, 1.0}, {u, -s.min_ratio}}, '>', 0.0);
      balance[cell.at({s.location, s.period})].push_back({x, s.quantity});
      output[s.period].push_back({x, -s.quantity});
    }
    if (ramping && bid.ramp) {
      const auto& periods = inst.network.periods;
      for (std::size_t t = 0; t + 1 < periods.size(); ++t) {
        std::vector<std::pair<int, double>> up, down;
        for (const auto& [x, q] : output[periods[t + 1]]) {
          up.push_back({x, q});
          down.push_back({x, -q});
        }
        for (const auto& [x, q] : output[periods[t]]) {
          up.push_back({x, -q});
          down.push_back({x, q});
        }
        up.push_back({u, -bid.ramp->up});
        down.push_back({u, -bid.ramp->down});
        lp.add_row(up, '<', 0.0);
        lp.add_row(down, '<', 0.0);
      }
    }
  }
  for (const auto& e : inst.network.export_vars) {
    const int n = lp.add_var(-kInf, kInf, 0.0);
    out.n.push_back(n);
    for (const auto& coef : e.coefficients) {
      balance[cell.at({coef.location, coef.period})].push_back({n, -coef.value});
    }
  }
  for (auto& row : balance) lp.add_row(row, '=', 0.0);
  for (const auto& r : inst.network.resources) {
    std::vector<std::pair<int, double>> terms;
    for (const auto& t : r.coefficients) {
      for (std::size_t k = 0; k < inst.network.export_vars.size(); ++k) {
        if (inst.network.export_vars[k].id == t.export_var) terms.push_back({out.n[k], t.value});
      }
    }
    lp.add_row(terms, '<', r.capacity);
  }
  return out;
}

struct FixedResult {
  bool feasible = false;
  double welfare = 0.0;
  std::vector<double> x_hourly, x_sub;
};

inline FixedResult fixed_welfare(const mpclear::Instance& inst, const std::vector<int>& u,
                                 bool include_fixed = true, bool ramping = true) {
  const auto m = market_lp(inst, u, false, include_fixed, ramping);
  const auto r = solve(m.lp);
  FixedResult out;
  if (r.status != Status::kOptimal) return out;
  out.feasible = true;
  out.welfare = r.objective;
  for (int j : m.x_hourly) out.x_hourly.push_back(r.x[j]);
  for (int j : m.x_sub) out.x_sub.push_back(r.x[j]);
  return out;
}

// Welfare of the relaxation with u_c in [0, u*_c].
inline double worker_welfare(const mpclear::Instance& inst, const std::vector<int>& u_star) {
  const auto r = solve(market_lp(inst, u_star, true, true).lp);
  if (r.status != Status::kOptimal) throw std::runtime_error("reference worker not optimal");
  return r.objective;
}

struct Oracle {
  std::optional<std::vector<int>> best;
  double best_welfare = -kInf;
  std::map<std::vector<int>, double> welfare;  // primal-feasible commitments
  std::map<std::vector<int>, bool> mp_feasible;
};

// Exhaustive MP-compliant welfare maximisation. A commitment is supported
// by prices iff relaxing its accepted bids cannot raise welfare.
inline Oracle oracle(const mpclear::Instance& inst, double tol = 1e-6) {
  Oracle out;
  const std::size_t n = inst.mp_bids.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<int> u(n);
    for (std::size_t c = 0; c < n; ++c) u[c] = (mask >> c) & 1U;
    const auto f = fixed_welfare(inst, u);
    if (!f.feasible) continue;
    out.welfare[u] = f.welfare;
    const bool mp = worker_welfare(inst, u) <= f.welfare + tol * std::max(1.0, std::fabs(f.welfare));
    out.mp_feasible[u] = mp;
    if (mp && f.welfare > out.best_welfare + 1e-9) {
      out.best_welfare = f.welfare;
      out.best = u;
    }
  }
  return out;
}

inline bool close(double a, double b, double rel = 1e-5) {
  return std::fabs(a - b) <= rel * std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

}  // namespace reference

#endif  // MPCLEAR_TESTS_REFERENCE_HPP_
