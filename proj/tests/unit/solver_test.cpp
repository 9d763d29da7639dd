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

#include "doctest.h"
#include "mpclear/solver.hpp"

using namespace mpclear;

namespace {

Model knapsack() {
  Model m(Sense::kMaximize);
  const int a = m.add_variable("a", 0, 1, 5, VarType::kInteger);
  const int b = m.add_variable("b", 0, 1, 4, VarType::kInteger);
  const int c = m.add_variable("c", 0, 1, 3, VarType::kInteger);
  m.add_le("cap", {{a, 2}, {b, 3}, {c, 1}}, 5);
  return m;
}

}  // namespace

TEST_CASE("backend registry") {
  const auto names = backend_names();
  CHECK(std::find(names.begin(), names.end(), "highs") != names.end());
  CHECK(std::find(names.begin(), names.end(), "highs-bc") != names.end());
  CHECK_THROWS_AS(make_backend("cplex"), SolverError);
  CHECK_FALSE(make_backend("highs")->capabilities().supports_lazy_constraints);
  const auto bc = make_backend("highs-bc")->capabilities();
  CHECK(bc.supports_lazy_constraints);
  CHECK(bc.supports_local_cuts);
  CHECK(bc.supports_heuristics_toggle);
}

TEST_CASE("LP optimum and dual signs") {
  Model m(Sense::kMaximize);
  const int x = m.add_variable("x", 0, kInf, 1);
  const int y = m.add_variable("y", 0, kInf, 1);
  m.add_le("r1", {{x, 1}, {y, 2}}, 4);
  m.add_le("r2", {{x, 3}, {y, 1}}, 6);
  const auto r = make_backend("highs")->solve(m, {});
  REQUIRE(r.optimal());
  CHECK(r.objective == doctest::Approx(2.8));
  CHECK(r.primal[x] == doctest::Approx(1.6));
  CHECK(r.primal[y] == doctest::Approx(1.2));
  CHECK(r.row_duals[0] == doctest::Approx(0.4));
  CHECK(r.row_duals[1] == doctest::Approx(0.2));

  Model g(Sense::kMaximize);
  const int z = g.add_variable("z", 0, kInf, -1);
  g.add_ge("floor", {{z, 1}}, 2);
  const auto rg = make_backend("highs")->solve(g, {});
  CHECK(rg.objective == doctest::Approx(-2.0));
  CHECK(rg.row_duals[0] == doctest::Approx(-1.0));
}

TEST_CASE("infeasible and unbounded models") {
  Model inf(Sense::kMaximize);
  const int x = inf.add_variable("x", 0, 1, 1);
  inf.add_ge("too_much", {{x, 1}}, 2);
  CHECK(make_backend("highs")->solve(inf, {}).status == SolveStatus::kInfeasible);
  Model unb(Sense::kMaximize);
  unb.add_variable("x", 0, kInf, 1);
  CHECK(make_backend("highs")->solve(unb, {}).status == SolveStatus::kUnbounded);
}

TEST_CASE("both backends solve a knapsack") {
  for (const char* name : {"highs", "highs-bc"}) {
    const auto r = make_backend(name)->solve(knapsack(), {});
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(9.0));
  }
  CHECK(make_backend("highs")->solve(knapsack(), {}).stats.mip_gap == doctest::Approx(0.0));
}

TEST_CASE("lazy rows are enforced on every incumbent") {
  const auto bc = make_backend("highs-bc");
  int calls = 0;
  LazyHandler handler = [&](std::span<const double> x) {
    ++calls;
    std::vector<LazyRow> rows;
    if (x[0] + x[1] > 1.5) rows.push_back({Row{"no_ab", {{0, -1}, {1, -1}}, -1, kInf}, false});
    return rows;
  };
  SolveOptions opts;
  opts.disable_heuristics = true;
  const auto r = bc->solve(knapsack(), opts, &handler);
  REQUIRE(r.optimal());
  CHECK(calls >= 1);
  CHECK(r.primal[0] + r.primal[1] <= 1.0 + 1e-9);
  CHECK(r.objective == doctest::Approx(8.0));
}

TEST_CASE("local lazy rows stay in their subtree") {
  const auto bc = make_backend("highs-bc");
  // Forbid (a, b) locally; a global incumbent must still respect it.
  LazyHandler handler = [&](std::span<const double> x) {
    std::vector<LazyRow> rows;
    if (x[0] > 0.5 && x[1] > 0.5) rows.push_back({Row{"no_ab", {{0, -1}, {1, -1}}, -1, kInf}, true});
    return rows;
  };
  const auto r = bc->solve(knapsack(), {}, &handler);
  REQUIRE(r.optimal());
  CHECK_FALSE((r.primal[0] > 0.5 && r.primal[1] > 0.5));
}

TEST_CASE("capability shortfalls and useless lazy rows are errors") {
  LazyHandler none = [](std::span<const double>) { return std::vector<LazyRow>{}; };
  CHECK_THROWS_AS(make_backend("highs")->solve(knapsack(), {}, &none), UnsupportedCapability);
  LazyHandler useless = [](std::span<const double>) {
    return std::vector<LazyRow>{{Row{"slack", {{0, 1}}, -1, kInf}, false}};
  };
  CHECK_THROWS_AS(make_backend("highs-bc")->solve(knapsack(), {}, &useless), SolverError);
}
