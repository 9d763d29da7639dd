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

#include "mpclear/clearing.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "mpclear/formulation.hpp"

namespace mpclear {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kMPC:
      return "mpc";
    case Method::kMIC:
      return "mic";
    case Method::kUMFS:
      return "umfs";
    case Method::kBendersIterative:
      return "benders-iterative";
    case Method::kBendersCallback:
      return "benders-callback";
  }
  return "?";
}

std::vector<std::string> method_names() {
  return {"mpc", "mic", "umfs", "benders-iterative", "benders-callback"};
}

Method method_from_string(std::string_view text) {
  for (Method m : {Method::kMPC, Method::kMIC, Method::kUMFS, Method::kBendersIterative,
                   Method::kBendersCallback}) {
    if (to_string(m) == text) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(text) + "'");
}

ClearingMode clearing_mode(Method method) {
  switch (method) {
    case Method::kMIC:
      return ClearingMode::kMIC;
    case Method::kUMFS:
      return ClearingMode::kUMFS;
    default:
      return ClearingMode::kMPC;
  }
}

nlohmann::ordered_json ClearResult::to_json() const {
  nlohmann::ordered_json doc;
  doc["method"] = std::string(to_string(method));
  doc["status"] = std::string(to_string(status));
  doc["gap"] = gap;
  doc["nodes"] = nodes;
  doc["runtime_s"] = runtime_s;
  if (benders) doc["benders"] = benders->to_json();
  if (!cuts.empty()) {
    doc["cuts"] = nlohmann::ordered_json::array();
    for (const auto& c : cuts) doc["cuts"].push_back(c.to_json());
  }
  return doc;
}

void fill_reject_duals(const Instance& instance, ClearingSolution& solution) {
  const InstanceIndex idx(instance);
  auto& d = solution.duals;
  const auto& p = solution.primal;
  const std::size_t n_c = instance.mp_bids.size();
  const std::size_t pairs = idx.period_count() > 0 ? idx.period_count() - 1 : 0;
  const bool ramps = instance.has_ramping();
  const bool mic = solution.mode == ClearingMode::kMIC;
  d.du_reject.assign(n_c, 0.0);
  for (std::size_t c = 0; c < n_c; ++c) {
    if (p.u[c] > 0.5) continue;
    const auto& bid = instance.mp_bids[c];
    double lhs = d.s_commit[c] - d.du_accept[c] + (mic ? 0.0 : bid.fixed_cost);
    for (std::size_t k = 0; k < bid.sub_bids.size(); ++k) {
      const std::size_t f = idx.sub_bid_offset(c) + k;
      lhs -= d.s_max[f] - bid.sub_bids[k].min_ratio * d.s_min[f];
    }
    if (ramps && bid.ramp) {
      for (std::size_t t = 0; t < pairs; ++t) {
        lhs -= bid.ramp->up * d.g_up[c * pairs + t] + bid.ramp->down * d.g_down[c * pairs + t];
      }
    }
    d.du_reject[c] = std::max(0.0, -lhs);
  }
}

namespace {

using Clock = std::chrono::steady_clock;

Variant variant_for(Method method) {
  switch (method) {
    case Method::kMIC:
      return Variant::kMIC;
    case Method::kUMFS:
      return Variant::kUMFS;
    default:
      return Variant::kMPC;
  }
}

ClearResult primal_dual(const Instance& instance, const ClearOptions& options) {
  ClearResult out;
  out.method = options.method;
  const auto backend = make_backend(options.backend.empty() ? "highs" : options.backend);
  FormulationConfig config;
  config.variant = variant_for(options.method);
  config.feasibility_tol = options.tol;
  ModelHandle handle = build_marketclearing_mpc(instance, config);
  const auto res = backend->solve(handle.model, options.solve);
  out.status = res.status;
  out.nodes = res.stats.nodes;
  out.gap = res.stats.mip_gap;
  if (!res.optimal()) return out;

  // Polish: fix u and re-solve the remaining LP.
  const PrimalPoint incumbent = extract_primal(instance, handle, res.primal);
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    auto& var = handle.model.variable(handle.registry.at(Sym::kU, static_cast<int>(c)));
    const double v = incumbent.u[c] > 0.5 ? 1.0 : 0.0;
    var.lower = v;
    var.upper = v;
  }
  handle.model.relax_integrality();
  const auto lp = backend->solve(handle.model, options.solve);
  if (!lp.optimal()) {
    throw SolverError("fixed-commitment re-solve ended with status " +
                      std::string(to_string(lp.status)));
  }
  ClearingSolution sol;
  sol.mode = clearing_mode(options.method);
  sol.primal = extract_primal(instance, handle, lp.primal);
  sol.duals = extract_dual_columns(instance, handle, lp.primal);
  if (sol.mode != ClearingMode::kUMFS) fill_reject_duals(instance, sol);
  sol.welfare = welfare(instance, sol.primal, includes_fixed_costs(sol.mode));
  out.solution = std::move(sol);
  return out;
}

}  // namespace

ClearResult clear(const Instance& instance, const ClearOptions& options) {
  require_valid(instance);
  if (options.method == Method::kMIC && !instance.has_mic_data()) {
    throw std::invalid_argument("mic method needs mic data on every MP bid");
  }
  Instance local;
  const Instance* target = &instance;
  if (!options.ramping && instance.has_ramping()) {
    local = instance;
    for (auto& bid : local.mp_bids) bid.ramp.reset();
    target = &local;
  }
  const auto start = Clock::now();
  ClearResult out;
  if (options.method == Method::kBendersIterative || options.method == Method::kBendersCallback) {
    BendersOptions bo;
    bo.mode = options.method == Method::kBendersIterative ? BendersMode::kIterative
                                                          : BendersMode::kCallback;
    bo.policy = options.policy;
    bo.backend = options.backend;
    bo.solve = options.solve;
    bo.tol = options.tol;
    auto br = solve_benders(*target, bo);
    out.method = options.method;
    out.status = br.status;
    out.solution = std::move(br.solution);
    out.nodes = br.stats.master_nodes;
    out.gap = out.status == SolveStatus::kOptimal ? 0.0 : kInf;
    out.benders = std::move(br.stats);
    out.cuts = std::move(br.cuts);
  } else {
    out = primal_dual(*target, options);
  }
  out.runtime_s = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

}  // namespace mpclear
