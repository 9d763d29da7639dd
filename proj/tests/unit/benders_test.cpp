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

#include "../support/reference.hpp"
#include "doctest.h"
#include "mpclear/benders.hpp"
#include "mpclear/clearing.hpp"
#include "mpclear/verification.hpp"

using namespace mpclear;

namespace {

Instance small_synthetic(std::uint64_t seed) {
  SyntheticParams p;
  p.n_mp = 1 + static_cast<int>(seed % 4);
  p.buy_mp_share = seed % 3 == 0 ? 0.3 : 0.0;
  return generate_synthetic(seed, p);
}

double mpc_welfare(const Instance& inst) {
  const auto r = clear(inst, {});
  REQUIRE(r.solution);
  return r.solution->welfare;
}

BendersResult run(const Instance& inst, BendersMode mode, CutPolicy policy,
                  std::string backend = "") {
  BendersOptions o;
  o.mode = mode;
  o.policy = policy;
  o.backend = std::move(backend);
  return solve_benders(inst, o);
}

// Largest left-hand side a commitment can reach on the cut.
double best_lhs(const Instance& inst, const CutRecord& cut, const std::vector<int>& u) {
  double lhs = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) lhs += cut.coef_u[c] * u[c];
  if (cut.kind == CutKind::kClassical) {
    // x-coefficients are the welfare terms, so their maximum is the
    // fixed-commitment welfare plus the fixed costs charged in coef_u.
    double fixed = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) fixed += inst.mp_bids[c].fixed_cost * u[c];
    lhs += reference::fixed_welfare(inst, u).welfare + fixed;
  }
  return lhs;
}

}  // namespace

TEST_CASE("mp-loss: one strengthened cut, then the plant is rejected") {
  const auto inst = mp_loss_instance();
  const auto r = run(inst, BendersMode::kIterative, CutPolicy::kStrengthenedPlusNoGood);
  REQUIRE(r.status == SolveStatus::kOptimal);
  REQUIRE(r.solution);
  CHECK(r.solution->welfare == doctest::Approx(200.0));
  CHECK(r.solution->primal.u[0] == 0.0);
  CHECK(r.stats.iterations == 2);
  CHECK(r.stats.cuts_strengthened_global == 1);
  CHECK(r.stats.total_cuts() == 1);
  REQUIRE(r.cuts.size() == 1);
  CHECK(r.cuts[0].coef_u[0] == -1.0);
  CHECK(r.cuts[0].rhs == 0.0);
  CHECK(r.cuts[0].incumbent_welfare == doctest::Approx(300.0));
  CHECK(r.cuts[0].worker_welfare == doctest::Approx(350.0));
  CHECK(verify(inst, *r.solution).ok());

  const auto cb = run(inst, BendersMode::kCallback, CutPolicy::kStrengthenedPlusNoGood);
  REQUIRE(cb.solution);
  CHECK(cb.stats.mode_used == BendersMode::kCallback);
  CHECK(cb.solution->welfare == doctest::Approx(200.0));
  CHECK(cb.stats.cuts_strengthened_global + cb.stats.cuts_strengthened_local == 1);
}

TEST_CASE("cut construction") {
  const auto inst = mp_loss_instance();
  const auto backend = make_backend("highs");
  const auto out = worker_test(inst, {1}, 300.0, *backend);
  REQUIRE_FALSE(out.feasible);
  CHECK(out.worker_point.u[0] == doctest::Approx(0.5));

  const auto classical = generate_cut(inst, CutKind::kClassical, out, {1});
  const double m = compute_big_m(inst.mp_bids[0], inst.price_bound);
  CHECK(classical.coef_u[0] == doctest::Approx(-100.0 - 0.5 * m));
  CHECK(classical.rhs == doctest::Approx(350.0 - 0.5 * m));
  CHECK(classical.coef_x_hourly[0] == doctest::Approx(500.0));
  CHECK(classical.coef_x_hourly[1] == doctest::Approx(-50.0));

  const auto nogood = generate_cut(inst, CutKind::kNoGood, out, {1});
  CHECK(nogood.coef_u[0] == -1.0);
  CHECK(nogood.rhs == 0.0);
  CHECK(nogood.global());

  CHECK_THROWS_AS(generate_cut(inst, CutKind::kStrengthenedGlobal, out, {1}, false), CutScopeError);
  const auto local = generate_cut(inst, CutKind::kStrengthenedLocal, out, {1}, false);
  CHECK_FALSE(local.global());

  const auto ok = worker_test(inst, {0}, 200.0, *backend);
  CHECK(ok.feasible);
  REQUIRE(ok.duals);
  CHECK(ok.duals->price[0] == doctest::Approx(50.0));
  CHECK_THROWS_AS(generate_cut(inst, CutKind::kNoGood, ok, {0}), std::invalid_argument);
}

TEST_CASE("cut rows evaluate like the record") {
  const auto inst = toy_instance();
  const auto backend = make_backend("highs");
  const auto out = worker_test(inst, {1, 1}, 140.0, *backend);
  REQUIRE_FALSE(out.feasible);
  auto master = build_uwelfare(inst);
  const auto cut = generate_cut(inst, CutKind::kClassical, out, {1, 1});
  const int row = master.model.add_row("c", cut.to_row(master.registry, "c").terms, cut.rhs, kInf);
  const auto fixed = build_uwelfare(inst, Commitment{1, 1});
  const auto r = backend->solve(fixed.model, {});
  const auto point = extract_primal(inst, fixed, r.primal);
  std::vector<double> values(master.model.variables().size(), 0.0);
  for (std::size_t i = 0; i < point.x_hourly.size(); ++i)
    values[master.registry.at(Sym::kXHourly, static_cast<int>(i))] = point.x_hourly[i];
  for (std::size_t f = 0; f < point.x_sub.size(); ++f)
    values[master.registry.at(Sym::kXSub, static_cast<int>(f))] = point.x_sub[f];
  for (std::size_t c = 0; c < point.u.size(); ++c)
    values[master.registry.at(Sym::kU, static_cast<int>(c))] = point.u[c];
  CHECK(master.model.row_activity(row, values) - cut.rhs == doctest::Approx(cut.slack(point)));
  CHECK_FALSE(cut.satisfied(point));
}

TEST_CASE("worker verdict agrees with the reference price test") {
  const auto backend = make_backend("highs");
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = small_synthetic(seed);
    const auto ref = reference::oracle(inst);
    for (const auto& [u, w] : ref.welfare) {
      const auto out = worker_test(inst, u, w, *backend);
      CHECK(out.feasible == ref.mp_feasible.at(u));
      if (out.feasible) CHECK(out.duals.has_value());
    }
  }
}

TEST_CASE("global cuts never exclude a price-supported commitment") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto inst = small_synthetic(seed);
    const auto ref = reference::oracle(inst);
    for (auto policy : {CutPolicy::kStrengthenedPlusNoGood, CutPolicy::kNoGoodOnly,
                        CutPolicy::kClassicalOnly}) {
      for (auto mode : {BendersMode::kIterative, BendersMode::kCallback}) {
        const auto r = run(inst, mode, policy);
        for (const auto& cut : r.cuts) {
          if (!cut.global()) continue;
          for (const auto& [u, feasible] : ref.mp_feasible) {
            if (!feasible) continue;
            CHECK(best_lhs(inst, cut, u) >= cut.rhs - 1e-6 * std::max(1.0, std::fabs(cut.rhs)));
          }
        }
      }
    }
  }
}

TEST_CASE("strengthened cut dominates the no-good of the same incumbent") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto inst = small_synthetic(seed);
    const auto r = run(inst, BendersMode::kIterative, CutPolicy::kNoGoodOnly);
    const auto backend = make_backend("highs");
    for (const auto& ng : r.cuts) {
      const auto out = worker_test(inst, ng.incumbent, ng.incumbent_welfare, *backend);
      const auto st = generate_cut(inst, CutKind::kStrengthenedGlobal, out, ng.incumbent);
      const std::size_t n = inst.mp_bids.size();
      for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        PrimalPoint p;
        p.x_hourly.assign(inst.hourly_bids.size(), 0.0);
        p.x_sub.assign(inst.sub_bid_count(), 0.0);
        p.n.assign(inst.network.export_vars.size(), 0.0);
        for (std::size_t c = 0; c < n; ++c) p.u.push_back(static_cast<double>((mask >> c) & 1U));
        if (st.satisfied(p)) CHECK(ng.satisfied(p));
      }
    }
  }
}

TEST_CASE("iterative master bound never increases") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto inst = small_synthetic(seed);
    for (auto policy : {CutPolicy::kStrengthenedPlusNoGood, CutPolicy::kClassicalOnly}) {
      const auto r = run(inst, BendersMode::kIterative, policy);
      const auto& obj = r.stats.master_objectives;
      for (std::size_t i = 1; i < obj.size(); ++i) {
        CHECK(obj[i] <= obj[i - 1] + 1e-6 * std::max(1.0, std::fabs(obj[i - 1])));
      }
      CHECK(r.stats.iterations == static_cast<int>(obj.size()));
    }
  }
}

TEST_CASE("every policy and mode reaches the MPC welfare") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto inst = small_synthetic(seed);
    const double target = mpc_welfare(inst);
    for (auto policy : {CutPolicy::kStrengthenedPlusNoGood, CutPolicy::kNoGoodOnly,
                        CutPolicy::kClassicalOnly}) {
      for (auto mode : {BendersMode::kIterative, BendersMode::kCallback}) {
        const auto r = run(inst, mode, policy);
        REQUIRE(r.solution);
        CHECK(reference::close(r.solution->welfare, target));
        CHECK(verify(inst, *r.solution, 1e-5).ok());
      }
    }
  }
}

TEST_CASE("callback mode falls back when the backend lacks lazy rows") {
  const auto r = run(toy_instance(), BendersMode::kCallback, CutPolicy::kStrengthenedPlusNoGood,
                     "highs");
  CHECK(r.stats.mode_used == BendersMode::kIterative);
  REQUIRE(r.stats.fallback);
  CHECK(r.stats.fallback->find("lazy") != std::string::npos);
  REQUIRE(r.solution);
  CHECK(r.solution->welfare == doctest::Approx(300.0));
  const auto doc = r.stats.to_json();
  CHECK(doc.contains("fallback"));
  CHECK(doc["mode"] == "iterative");
}

TEST_CASE("policy names") {
  for (auto p : {CutPolicy::kStrengthenedPlusNoGood, CutPolicy::kNoGoodOnly,
                 CutPolicy::kClassicalOnly}) {
    CHECK(cut_policy_from_string(to_string(p)) == p);
  }
  CHECK_THROWS_AS(cut_policy_from_string("magic"), std::invalid_argument);
}
