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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "../support/reference.hpp"
#include "mpclear/benders.hpp"
#include "mpclear/cli.hpp"
#include "mpclear/clearing.hpp"
#include "mpclear/verification.hpp"

using namespace mpclear;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

// Collects failure reasons for one criterion.
struct Criterion {
  std::vector<std::string> problems;

  void expect(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
  bool pass() const { return problems.empty(); }
};

bool abs_close(double a, double b, double tol = 1e-6) { return std::fabs(a - b) <= tol; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct Case {
  std::string name;
  Instance instance;
};

// 50 seeded instances: up to 4 MP bids, 8 sub-bids and 8 hourly bids over
// 2 periods and 2 locations.
std::vector<Case> random_cases() {
  std::vector<Case> out;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SyntheticParams p;
    p.n_mp = 1 + static_cast<int>(seed % 4);
    p.buy_mp_share = seed % 3 == 0 ? 0.3 : 0.0;
    p.n_periods = 2;
    p.n_locations = 2;
    out.push_back({"seed-" + std::to_string(seed), generate_synthetic(seed, p)});
  }
  return out;
}

// Solutions produced by criteria 1 to 4, re-checked by criterion 5.
struct Produced {
  std::string label;
  const Instance* instance;
  ClearingSolution solution;
};

std::vector<Produced> produced;
std::vector<std::pair<const Instance*, CutRecord>> global_cuts;

void keep(const std::string& label, const Instance& inst, const ClearResult& r) {
  if (r.solution) produced.push_back({label, &inst, *r.solution});
}

ClearResult run(const Instance& inst, Method method) {
  ClearOptions o;
  o.method = method;
  return clear(inst, o);
}

Criterion toy_reproduction(const Instance& toy) {
  Criterion c;
  const auto t0 = Clock::now();
  const auto r = run(toy, Method::kMPC);
  const double elapsed = seconds_since(t0);
  keep("toy/mpc", toy, r);
  c.expect(r.solution.has_value(), "no solution");
  if (!r.solution) return c;
  const auto& s = *r.solution;
  c.expect(abs_close(s.welfare, 300.0), "welfare " + fmt(s.welfare));
  c.expect(abs_close(s.duals.price[0], 50.0), "price " + fmt(s.duals.price[0]));
  c.expect(s.primal.u == std::vector<double>{1.0, 0.0}, "acceptance is not (MP1, not MP2)");
  const auto rows = profit_report(toy, s);
  c.expect(abs_close(rows[0].revenue, 500.0), "MP1 revenue " + fmt(rows[0].revenue));
  c.expect(abs_close(rows[0].marginal_cost + rows[0].fixed_cost, 200.0), "MP1 costs");
  c.expect(abs_close(rows[0].profit, 300.0), "MP1 profit " + fmt(rows[0].profit));
  c.expect(elapsed < 1.0, "runtime " + fmt(elapsed) + " s");
  return c;
}

Criterion mic_toy(const Instance& toy) {
  Criterion c;
  const auto t0 = Clock::now();
  const auto r = run(toy, Method::kMIC);
  const double elapsed = seconds_since(t0);
  keep("toy/mic", toy, r);
  c.expect(r.solution.has_value(), "no solution");
  if (!r.solution) return c;
  const auto& s = *r.solution;
  c.expect(abs_close(s.welfare, 400.0), "welfare without fixed costs " + fmt(s.welfare));
  int accepted = 0;
  for (std::size_t b = 0; b < toy.mp_bids.size(); ++b) {
    if (s.primal.u[b] != 1.0) continue;
    ++accepted;
    // Income from the market covers start-up plus variable cost.
    const auto& bid = toy.mp_bids[b];
    c.expect(bid.mic->variable_cost == 10.0, "variable cost is not 10");
    const auto& sub = bid.sub_bids[0];
    const double volume = -sub.quantity * s.primal.x_sub[b];
    const double income = volume * s.duals.price[0];
    const double cost = bid.mic->startup_cost + bid.mic->variable_cost * volume;
    c.expect(income >= cost - 1e-6, bid.id + " income " + fmt(income) + " below " + fmt(cost));
  }
  c.expect(accepted == 1, std::to_string(accepted) + " bids accepted");
  c.expect(elapsed < 1.0, "runtime " + fmt(elapsed) + " s");
  return c;
}

Criterion oracle_equivalence(const std::vector<Case>& cases) {
  Criterion c;
  const auto t0 = Clock::now();
  for (const auto& k : cases) {
    const auto& inst = k.instance;
    c.expect(inst.mp_bids.size() <= 4 && inst.sub_bid_count() <= 8 &&
                 inst.hourly_bids.size() <= 8 && inst.network.periods.size() == 2 &&
                 inst.network.locations.size() == 2,
             k.name + " outside the instance envelope");
    const auto r = run(inst, Method::kMPC);
    keep(k.name + "/mpc", inst, r);
    const auto lib = brute_force_oracle(inst);
    const auto ref = reference::oracle(inst);
    if (!r.solution || !lib.best || !ref.best) {
      c.expect(false, k.name + " missing solution or oracle optimum");
      continue;
    }
    c.expect(reference::close(r.solution->welfare, lib.best_welfare),
             k.name + " MPC " + fmt(r.solution->welfare) + " vs oracle " + fmt(lib.best_welfare));
    c.expect(reference::close(lib.best_welfare, ref.best_welfare),
             k.name + " oracle " + fmt(lib.best_welfare) + " vs reference " + fmt(ref.best_welfare));
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 300.0, "runtime " + fmt(elapsed) + " s");
  return c;
}

Criterion method_equivalence(const std::vector<Case>& cases, const Instance& toy,
                             const Instance& mp_loss) {
  Criterion c;
  const bool callback = make_backend("highs-bc")->capabilities().supports_lazy_constraints;
  std::vector<const Case*> all;
  for (const auto& k : cases) all.push_back(&k);
  const Case toy_case{"toy", toy};
  const Case loss_case{"mp-loss", mp_loss};
  all.push_back(&toy_case);
  all.push_back(&loss_case);
  for (const Case* k : all) {
    const auto& inst = k->name == "toy" ? toy : k->name == "mp-loss" ? mp_loss : k->instance;
    const auto mpc = run(inst, Method::kMPC);
    if (!mpc.solution) {
      c.expect(false, k->name + " MPC has no solution");
      continue;
    }
    std::vector<Method> methods{Method::kBendersIterative};
    if (callback) methods.push_back(Method::kBendersCallback);
    for (Method m : methods) {
      const auto r = run(inst, m);
      keep(k->name + "/" + std::string(to_string(m)), inst, r);
      for (const auto& cut : r.cuts) {
        if (cut.global()) global_cuts.push_back({&inst, cut});
      }
      if (!r.solution) {
        c.expect(false, k->name + " " + std::string(to_string(m)) + " has no solution");
        continue;
      }
      c.expect(reference::close(r.solution->welfare, mpc.solution->welfare),
               k->name + " " + std::string(to_string(m)) + " " + fmt(r.solution->welfare) +
                   " vs MPC " + fmt(mpc.solution->welfare));
      if (m == Method::kBendersCallback) {
        c.expect(r.benders && r.benders->mode_used == BendersMode::kCallback,
                 k->name + " callback mode fell back");
      }
      if (k->name == "mp-loss") {
        const int strengthened =
            r.benders->cuts_strengthened_global + r.benders->cuts_strengthened_local;
        c.expect(strengthened == 1, "mp-loss " + std::string(to_string(m)) + " generated " +
                                        std::to_string(strengthened) + " strengthened cuts");
        c.expect(abs_close(r.solution->welfare, 200.0), "mp-loss welfare " + fmt(r.solution->welfare));
      }
    }
  }
  const auto ref = reference::oracle(mp_loss);
  c.expect(ref.best && abs_close(ref.best_welfare, 200.0), "mp-loss reference optimum is not 200");
  c.expect(callback, "no backend offers lazy constraints");
  return c;
}

Criterion verification_suite() {
  Criterion c;
  for (const auto& p : produced) {
    const auto rep = verify(*p.instance, p.solution, 1e-5);
    if (rep.ok()) continue;
    std::string what = p.label + " fails";
    for (const auto& f : rep.failures()) what += " " + f;
    c.expect(false, what);
  }
  // Toy MPC and MIC, 50 MPC runs, two Benders modes on 52 instances.
  c.expect(produced.size() == 2 + 50 + 2 * 52, "only " + std::to_string(produced.size()) + " solutions");
  return c;
}

Criterion ramping() {
  Criterion c;
  const auto inst = ramp_instance(5.0, 5.0);
  const auto r = run(inst, Method::kMPC);
  if (!r.solution) {
    c.expect(false, "no solution");
    return c;
  }
  const auto& s = *r.solution;
  const double o1 = -inst.mp_bids[0].sub_bids[0].quantity * s.primal.x_sub[0];
  const double o2 = -inst.mp_bids[0].sub_bids[1].quantity * s.primal.x_sub[1];
  c.expect(abs_close(o1, 2.0) && abs_close(o2, 7.0), "output (" + fmt(o1) + ", " + fmt(o2) + ")");
  c.expect(abs_close(s.welfare, 360.0), "welfare " + fmt(s.welfare));
  const auto ref = reference::oracle(inst);
  c.expect(ref.best && abs_close(ref.best_welfare, 360.0), "reference optimum " + fmt(ref.best_welfare));
  const auto rep = verify(inst, s, 1e-5);
  const auto* identity = rep.find("ramping_surplus");
  c.expect(identity && identity->max_residual <= 1e-6, "ramping surplus identity residual");
  c.expect(rep.ok(), "verification failed");

  const auto loose = ramp_instance(100.0, 100.0);
  const auto rl = run(loose, Method::kMPC);
  ClearOptions off;
  off.ramping = false;
  const auto rn = clear(loose, off);
  if (!rl.solution || !rn.solution) {
    c.expect(false, "no solution without binding ramps");
    return c;
  }
  c.expect(rl.solution->welfare == rn.solution->welfare,
           "non-binding ramps " + fmt(rl.solution->welfare) + " vs no ramps " +
               fmt(rn.solution->welfare));
  return c;
}

Criterion bench() {
  Criterion c;
  std::ostringstream out, err;
  const int code = run_cli({"bench", "--seeds", "1-10", "-m", "mpc", "-m", "benders-iterative", "-m",
                            "benders-callback"},
                           out, err);
  c.expect(code == kExitOk, "bench exit code " + std::to_string(code) + " " + err.str());
  std::stringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  c.expect(line == kCsvHeader, "CSV header");
  int rows = 0;
  std::map<std::string, std::vector<double>> welfare;
  while (std::getline(lines, line)) {
    ++rows;
    std::vector<std::string> f;
    std::stringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) f.push_back(cell);
    if (f.size() != 9) {
      c.expect(false, "malformed row " + line);
      continue;
    }
    c.expect(f[3] == "0.00", f[0] + " " + f[1] + " gap " + f[3]);
    for (int k = 4; k <= 6; ++k) c.expect(std::stoi(f[k]) >= 0, "negative cut count");
    c.expect(!f[2].empty(), f[0] + " " + f[1] + " has no welfare");
    if (!f[2].empty()) welfare[f[0]].push_back(std::stod(f[2]));
  }
  c.expect(rows == 30, std::to_string(rows) + " rows");
  for (const auto& [name, w] : welfare) {
    for (double v : w) c.expect(reference::close(v, w.front()), name + " welfare disagreement");
  }
  return c;
}

Criterion cut_soundness(const std::vector<Case>& cases) {
  Criterion c;
  // More cuts from the other policies on the random instances.
  for (const auto& k : cases) {
    for (auto policy : {CutPolicy::kNoGoodOnly, CutPolicy::kClassicalOnly}) {
      BendersOptions o;
      o.policy = policy;
      for (auto& cut : solve_benders(k.instance, o).cuts) {
        if (cut.global()) global_cuts.push_back({&k.instance, std::move(cut)});
      }
    }
  }
  std::map<const Instance*, OracleResult> oracles;
  std::size_t checked = 0;
  for (const auto& [inst, cut] : global_cuts) {
    if (inst->mp_bids.size() > 4) continue;
    auto it = oracles.find(inst);
    if (it == oracles.end()) it = oracles.emplace(inst, brute_force_oracle(*inst)).first;
    for (const auto& rec : it->second.records) {
      if (!rec.mp_feasible) continue;
      double lhs = 0.0;
      for (std::size_t b = 0; b < rec.u.size(); ++b) lhs += cut.coef_u[b] * rec.u[b];
      if (cut.kind == CutKind::kClassical) {
        // The x part of a classical cut peaks at the fixed-commitment
        // optimum, where it equals welfare plus the fixed costs.
        double fixed = 0.0;
        for (std::size_t b = 0; b < rec.u.size(); ++b) fixed += inst->mp_bids[b].fixed_cost * rec.u[b];
        lhs += rec.welfare + fixed;
      }
      ++checked;
      if (lhs < cut.rhs - 1e-6 * std::max(1.0, std::fabs(cut.rhs))) {
        std::string u;
        for (int v : rec.u) u += std::to_string(v);
        c.expect(false, std::string(to_string(cut.kind)) + " cut excludes MP-feasible u=" + u);
      }
    }
  }
  c.expect(!global_cuts.empty(), "no cuts were generated");
  std::printf("  (%zu global cuts, %zu cut/commitment pairs checked)\n", global_cuts.size(), checked);
  return c;
}

}  // namespace

int main() {
  const auto toy = toy_instance();
  const auto mp_loss = mp_loss_instance();
  const auto cases = random_cases();

  struct Entry {
    int id;
    const char* title;
    std::function<Criterion()> run;
  };
  const std::vector<Entry> entries{
      {1, "toy reproduction", [&] { return toy_reproduction(toy); }},
      {2, "MIC-mode toy", [&] { return mic_toy(toy); }},
      {3, "oracle equivalence on 50 instances", [&] { return oracle_equivalence(cases); }},
      {4, "Benders matches direct MPC", [&] { return method_equivalence(cases, toy, mp_loss); }},
      {5, "every produced solution verifies at 1e-5", [&] { return verification_suite(); }},
      {6, "ramping", [&] { return ramping(); }},
      {7, "bench on 10 synthetic seeds", [&] { return bench(); }},
      {8, "global cuts keep every MP-feasible commitment", [&] { return cut_soundness(cases); }},
  };
  int failed = 0;
  for (const auto& e : entries) {
    const auto t0 = Clock::now();
    Criterion result;
    try {
      result = e.run();
    } catch (const std::exception& ex) {
      result.problems.push_back(std::string("exception: ") + ex.what());
    }
    const double elapsed = seconds_since(t0);
    std::printf("%s criterion %d: %s (%.2f s)\n", result.pass() ? "PASS" : "FAIL", e.id, e.title,
                elapsed);
    for (std::size_t i = 0; i < result.problems.size() && i < 10; ++i) {
      std::printf("  - %s\n", result.problems[i].c_str());
    }
    if (!result.pass()) ++failed;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
