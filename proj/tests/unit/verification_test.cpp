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

#include <algorithm>

#include "../support/reference.hpp"
#include "doctest.h"
#include "mpclear/clearing.hpp"
#include "mpclear/formulation.hpp"
#include "mpclear/verification.hpp"

using namespace mpclear;

namespace {

ClearingSolution cleared(const Instance& inst, Method method = Method::kMPC) {
  ClearOptions o;
  o.method = method;
  auto r = clear(inst, o);
  REQUIRE(r.solution);
  return *r.solution;
}

bool fails(const VerificationReport& rep, const std::string& name) {
  const auto f = rep.failures();
  return std::find(f.begin(), f.end(), name) != f.end();
}

}  // namespace

TEST_CASE("toy MPC clearing passes every check") {
  const auto toy = toy_instance();
  const auto sol = cleared(toy);
  const auto rep = verify(toy, sol);
  CHECK(rep.ok());
  for (const char* name : {"primal_feasibility", "dual_feasibility", "complementarity_hourly",
                           "complementarity_sub_bid", "complementarity_commitment",
                           "strong_duality", "surplus_hourly", "surplus_sub_bid",
                           "mp_condition"}) {
    CAPTURE(name);
    REQUIRE(rep.find(name) != nullptr);
    CHECK(rep.find(name)->pass);
  }
  CHECK(rep.find("mic_condition") == nullptr);
  CHECK(rep.to_json()["ok"] == true);
  CHECK(rep.to_csv().rfind("check,pass,", 0) == 0);
}

TEST_CASE("perturbations are caught by the matching check") {
  const auto toy = toy_instance();
  const auto sol = cleared(toy);

  auto low = sol;
  low.duals.price[0] = 40.0;
  const auto r1 = verify(toy, low);
  CHECK_FALSE(r1.ok());
  CHECK(fails(r1, "dual_feasibility"));

  auto frac = sol;
  frac.primal.u[1] = 0.5;
  CHECK(fails(verify(toy, frac), "commitment_integrality"));

  auto neg = sol;
  neg.duals.s_hourly[1] = -1.0;
  CHECK(fails(verify(toy, neg), "dual_signs"));

  auto over = sol;
  over.primal.x_hourly[0] = 1.0;
  CHECK(fails(verify(toy, over), "primal_feasibility"));

  auto w = sol;
  w.welfare += 1.0;
  CHECK(fails(verify(toy, w), "welfare_recomputed"));
}

TEST_CASE("structural mismatches throw") {
  const auto toy = toy_instance();
  auto sol = cleared(toy);
  sol.duals.price.clear();
  CHECK_THROWS_AS(verify(toy, sol), StructuralError);
  // MIC mode needs MIC data on every bid.
  auto mic = cleared(mp_loss_instance());
  mic.mode = ClearingMode::kMIC;
  CHECK_THROWS_AS(verify(mp_loss_instance(), mic), StructuralError);
}

TEST_CASE("paradoxically accepted bids fail the MP condition") {
  const auto inst = mp_loss_instance();
  const auto umfs = cleared(inst, Method::kUMFS);
  CHECK(umfs.primal.u[0] == 1.0);
  const auto rep = verify(inst, umfs);
  CHECK(rep.failures() == std::vector<std::string>{"mp_condition"});
  CHECK(verify(inst, cleared(inst)).ok());
}

TEST_CASE("ramping surplus identity") {
  const auto inst = ramp_instance(5, 5);
  const auto sol = cleared(inst);
  const auto rep = verify(inst, sol);
  CHECK(rep.ok());
  REQUIRE(rep.find("ramping_surplus"));
  CHECK(rep.find("ramping_surplus")->max_residual <= 1e-6);
  REQUIRE(rep.find("complementarity_ramping"));
}

TEST_CASE("oracle on toy") {
  const auto toy = toy_instance();
  const auto o = brute_force_oracle(toy);
  REQUIRE(o.best);
  CHECK(*o.best == Commitment{1, 0});
  CHECK(o.best_welfare == doctest::Approx(300.0));
  REQUIRE(o.records.size() == 4);
  CHECK(o.record({0, 1})->mp_feasible);
  CHECK(o.record({0, 1})->welfare == doctest::Approx(200.0));
  CHECK_FALSE(o.record({1, 1})->mp_feasible);
  CHECK(o.record({1, 1})->worker_feasible == false);
  CHECK(o.optimal_set().size() == 1);
  CHECK(o.to_json(toy).contains("records"));
}

TEST_CASE("MIC oracle on toy keeps both single matchings") {
  const auto o = brute_force_oracle(toy_instance(), ClearingMode::kMIC);
  CHECK(o.best_welfare == doctest::Approx(400.0));
  auto set = o.optimal_set();
  std::sort(set.begin(), set.end());
  CHECK(set == std::vector<Commitment>{{0, 1}, {1, 0}});
  CHECK_FALSE(o.record({1, 1})->mp_feasible);
}

TEST_CASE("oracle refuses large instances") {
  SyntheticParams p;
  p.n_mp = 6;
  CHECK_THROWS_AS(brute_force_oracle(generate_synthetic(1, p), ClearingMode::kMPC, nullptr, true,
                                     1e-6, 5),
                  EnumerationLimit);
}

TEST_CASE("library oracle agrees with the reference oracle") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    SyntheticParams p;
    p.n_mp = 1 + static_cast<int>(seed % 4);
    p.buy_mp_share = seed % 2 ? 0.0 : 0.4;
    const auto inst = generate_synthetic(seed, p);
    const auto lib = brute_force_oracle(inst);
    const auto ref = reference::oracle(inst);
    REQUIRE(lib.best.has_value() == ref.best.has_value());
    if (ref.best) CHECK(reference::close(lib.best_welfare, ref.best_welfare));
    for (const auto& rec : lib.records) {
      if (!rec.primal_feasible) continue;
      CHECK(rec.mp_feasible == ref.mp_feasible.at(rec.u));
      REQUIRE(rec.worker_feasible);
      CHECK(*rec.worker_feasible == rec.mp_feasible);
    }
  }
}

TEST_CASE("profit table matches the toy matchings") {
  const auto toy = toy_instance();
  const auto rows = profit_report(toy, cleared(toy));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].accepted);
  CHECK(rows[0].revenue == doctest::Approx(500.0));
  CHECK(rows[0].marginal_cost + rows[0].fixed_cost == doctest::Approx(200.0));
  CHECK(rows[0].profit == doctest::Approx(300.0));
  CHECK_FALSE(rows[1].accepted);
  CHECK(rows[1].profit == doctest::Approx(0.0));
  CHECK(profit_report_json(rows)[0]["costs"] == 200.0);
  CHECK(profit_report_csv(rows).rfind("bid,accepted,", 0) == 0);

  // Both plants at the marginal-cost price of 10.
  const auto both = build_uwelfare(toy, Commitment{1, 1});
  const auto r = make_backend("highs")->solve(both.model, {});
  ClearingSolution s;
  s.primal = extract_primal(toy, both, r.primal);
  s.duals = extract_row_duals(toy, both, r.row_duals);
  s.welfare = r.objective;
  const auto loss = profit_report(toy, s);
  CHECK(s.duals.price[0] == doctest::Approx(10.0));
  CHECK(loss[0].revenue == doctest::Approx(100.0));
  CHECK(loss[0].profit == doctest::Approx(-100.0));
  CHECK(loss[1].profit == doctest::Approx(-200.0));
}

TEST_CASE("MIC clearing reports the income condition") {
  const auto toy = toy_instance();
  const auto sol = cleared(toy, Method::kMIC);
  CHECK(sol.welfare == doctest::Approx(400.0));
  CHECK(sol.primal.u[0] + sol.primal.u[1] == doctest::Approx(1.0));
  const auto rep = verify(toy, sol);
  CHECK(rep.ok());
  REQUIRE(rep.find("mic_condition"));
  const auto rows = profit_report(toy, sol);
  for (const auto& row : rows) {
    REQUIRE(row.mic_profit);
    if (row.accepted) CHECK(*row.mic_profit >= -1e-6);
  }
}
