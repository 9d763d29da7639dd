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

#include <cmath>
#include <random>

#include "../support/reference.hpp"
#include "doctest.h"
#include "mpclear/formulation.hpp"
#include "mpclear/solver.hpp"

using namespace mpclear;

namespace {

SolveResult solve(const Model& model) { return make_backend("highs")->solve(model, {}); }

double welfare_of(const ModelHandle& h) {
  const auto r = solve(h.model);
  REQUIRE(r.optimal());
  return r.objective;
}

std::vector<Commitment> all_commitments(std::size_t n) {
  std::vector<Commitment> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    Commitment u(n);
    for (std::size_t c = 0; c < n; ++c) u[c] = (mask >> c) & 1U;
    out.push_back(u);
  }
  return out;
}

Instance small_synthetic(std::uint64_t seed) {
  SyntheticParams p;
  p.n_mp = 1 + static_cast<int>(seed % 4);
  p.buy_mp_share = seed % 3 == 0 ? 0.3 : 0.0;
  return generate_synthetic(seed, p);
}

}  // namespace

TEST_CASE("variant structure on toy") {
  const auto toy = toy_instance();
  FormulationConfig mpc;
  const auto h = build_marketclearing_mpc(toy, mpc);
  CHECK(h.primal_dual);
  CHECK(h.registry.count(Sym::kU) == 2);
  CHECK(h.registry.count(Sym::kDuAccept) == 0);
  CHECK(h.registry.count(Sym::kDuReject) == 0);
  CHECK(h.model.integer_count() == 2);

  FormulationConfig umfs;
  umfs.variant = Variant::kUMFS;
  const auto hu = build_marketclearing_mpc(toy, umfs);
  CHECK(hu.registry.count(Sym::kDuAccept) == 2);
  CHECK(hu.registry.count(Sym::kDuReject) == 2);
  CHECK(hu.registry.row_count("deactivate_reject") + hu.registry.row_count("deactivate_accept") == 4);
  CHECK(hu.model.variables().size() == h.model.variables().size() + 4);

  FormulationConfig mic;
  mic.variant = Variant::kMIC;
  const auto hm = build_marketclearing_mpc(toy, mic);
  CHECK(hm.registry.row_count("mic_income") == 2);

  // Prices are boxed by the price bound.
  const auto& pi = h.model.variable(h.registry.at(Sym::kPrice, 0));
  CHECK(pi.lower == -toy.price_bound);
  CHECK(pi.upper == toy.price_bound);
}

TEST_CASE("configuration errors") {
  FormulationConfig fixed;
  fixed.variant = Variant::kUWelfareFixedU;
  CHECK_THROWS_AS(build_model(toy_instance(), fixed), ConfigurationError);
  FormulationConfig mic;
  mic.variant = Variant::kMIC;
  CHECK_THROWS_AS(build_model(mp_loss_instance(), mic), ConfigurationError);
  CHECK_THROWS(build_uwelfare(toy_instance(), Commitment{1}));
}

TEST_CASE("big-M formula and override") {
  const auto toy = toy_instance();
  CHECK(compute_big_m(toy.mp_bids[0], 3000.0) == doctest::Approx(10.0 * (3000.0 + 10.0) + 100.0));
  FormulationConfig c;
  c.big_m_override["MP2"] = 1234.0;
  CHECK(compute_big_m(toy.mp_bids[1], 3000.0, c) == 1234.0);
  CHECK(compute_big_m(toy.mp_bids[0], 3000.0, c) == compute_big_m(toy.mp_bids[0], 3000.0));
}

TEST_CASE("big-M dominates loss and missed surplus at every admissible price") {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = small_synthetic(seed);
    const double pb = inst.price_bound;
    std::uniform_real_distribution<double> price(-pb, pb), level(0.0, 1.0);
    for (const auto& bid : inst.mp_bids) {
      const double m = compute_big_m(bid, pb);
      for (int trial = 0; trial < 200; ++trial) {
        double surplus = 0.0;
        for (const auto& s : bid.sub_bids) surplus += s.quantity * (s.price - price(rng)) * level(rng);
        CHECK(std::fabs(surplus) + bid.fixed_cost <= m);
      }
    }
  }
}

TEST_CASE("fixed-commitment welfare matches the reference LP") {
  const auto toy = toy_instance();
  CHECK(welfare_of(build_uwelfare(toy, Commitment{1, 0})) == doctest::Approx(300.0));
  CHECK(welfare_of(build_uwelfare(toy, Commitment{0, 1})) == doctest::Approx(200.0));
  CHECK(welfare_of(build_uwelfare(toy, Commitment{1, 1})) == doctest::Approx(140.0));
  CHECK(welfare_of(build_uwelfare(toy, Commitment{0, 0})) == doctest::Approx(0.0));
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto inst = small_synthetic(seed);
    for (const auto& u : all_commitments(inst.mp_bids.size())) {
      const auto ref = reference::fixed_welfare(inst, u);
      const auto lib = solve(build_uwelfare(inst, u).model);
      REQUIRE(ref.feasible == lib.optimal());
      if (ref.feasible) CHECK(reference::close(ref.welfare, lib.objective, 1e-7));
    }
  }
}

TEST_CASE("LP relaxation bounds the MILP") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = small_synthetic(seed);
    const double milp = welfare_of(build_uwelfare(inst));
    const double lp = welfare_of(build_uwelfare(inst, std::nullopt, true));
    CHECK(lp >= milp - 1e-6 * std::max(1.0, std::fabs(milp)));
  }
}

TEST_CASE("UMFS with zero acceptance shadow costs has MPC welfare") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = small_synthetic(seed);
    FormulationConfig mpc;
    FormulationConfig umfs;
    umfs.variant = Variant::kUMFS;
    auto pinned = build_marketclearing_mpc(inst, umfs);
    for (std::size_t c = 0; c < inst.mp_bids.size(); ++c) {
      auto& v = pinned.model.variable(pinned.registry.at(Sym::kDuAccept, static_cast<int>(c)));
      v.lower = v.upper = 0.0;
    }
    const double w_mpc = welfare_of(build_marketclearing_mpc(inst, mpc));
    CHECK(reference::close(welfare_of(pinned), w_mpc, 1e-6));
    // Relaxing the MP conditions can only help, and UMFS never beats the
    // unconstrained welfare optimum.
    const double w_umfs = welfare_of(build_marketclearing_mpc(inst, umfs));
    CHECK(w_umfs >= w_mpc - 1e-6 * std::max(1.0, std::fabs(w_mpc)));
    CHECK(w_umfs <= welfare_of(build_uwelfare(inst)) + 1e-6 * std::max(1.0, std::fabs(w_umfs)));
  }
}

TEST_CASE("MPC optimum is the best price-supported commitment") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto inst = small_synthetic(seed);
    const auto ref = reference::oracle(inst);
    REQUIRE(ref.best);
    CHECK(reference::close(welfare_of(build_marketclearing_mpc(inst, {})), ref.best_welfare));
  }
}

TEST_CASE("ramping rows") {
  const auto inst = ramp_instance(5, 5);
  const auto h = build_uwelfare(inst, Commitment{1});
  CHECK(h.registry.row_count("ramp_up") == 1);
  CHECK(h.registry.row_count("ramp_down") == 1);
  const auto r = solve(h.model);
  REQUIRE(r.optimal());
  CHECK(r.objective == doctest::Approx(360.0));
  const auto p = extract_primal(inst, h, r.primal);
  CHECK(p.x_sub[0] * 10.0 == doctest::Approx(2.0));
  CHECK(p.x_sub[1] * 10.0 == doctest::Approx(7.0));
  CHECK(reference::fixed_welfare(inst, {1}).welfare == doctest::Approx(360.0));

  FormulationConfig off;
  off.ramping = false;
  const auto free = build_marketclearing_mpc(inst, off);
  CHECK(free.registry.row_count("ramp_up") == 0);
  CHECK(welfare_of(free) == doctest::Approx(480.0));

  const auto mpc = build_marketclearing_mpc(inst, {});
  CHECK(mpc.registry.count(Sym::kGUp) == 1);
  CHECK(welfare_of(mpc) == doctest::Approx(360.0));
}

TEST_CASE("worker relaxes accepted bids only") {
  const auto toy = toy_instance();
  // Eleven MW for D1 from MP1 in full plus a tenth of MP2.
  CHECK(welfare_of(build_worker(toy, {1, 1})) == doctest::Approx(320.0));
  CHECK(welfare_of(build_worker(toy, {1, 0})) == doctest::Approx(300.0));
  CHECK(welfare_of(build_worker(toy, {0, 0})) == doctest::Approx(0.0));
  CHECK(reference::worker_welfare(toy, {1, 1}) == doctest::Approx(320.0));
  // Half of the indivisible plant plus the cheap step beats the full plant.
  CHECK(welfare_of(build_worker(mp_loss_instance(), {1})) == doctest::Approx(350.0));
}

TEST_CASE("supporting prices") {
  const auto toy = toy_instance();
  const auto h = build_supporting_prices(toy, {1, 0}, 300.0, ClearingMode::kMPC);
  const auto r = solve(h.model);
  REQUIRE(r.optimal());
  const auto d = extract_dual_columns(toy, h, r.primal);
  CHECK(d.price[0] == doctest::Approx(50.0));
  CHECK(solve(build_supporting_prices(toy, {1, 1}, 140.0, ClearingMode::kMPC).model).status ==
        SolveStatus::kInfeasible);
  CHECK_THROWS_AS(build_supporting_prices(toy, {1, 0}, 300.0, ClearingMode::kMIC),
                  ConfigurationError);
}

TEST_CASE("fixed-commitment row duals are prices") {
  const auto toy = toy_instance();
  const auto h = build_uwelfare(toy, Commitment{1, 0});
  const auto r = solve(h.model);
  const auto d = extract_row_duals(toy, h, r.row_duals);
  CHECK(d.price[0] == doctest::Approx(50.0));
}

TEST_CASE("registry and LP text") {
  const auto h = build_marketclearing_mpc(toy_instance(), {});
  CHECK(h.registry.find(Sym::kU, 5) == std::nullopt);
  CHECK_THROWS_AS(h.registry.at(Sym::kU, 5), std::out_of_range);
  const auto text = h.model.to_lp_text();
  CHECK(text.find("Generals") != std::string::npos);
  CHECK(text.find("strong_duality") != std::string::npos);
  const auto doc = h.registry.to_json(h.model);
  CHECK(doc.dump().find("u_0") != std::string::npos);
}
