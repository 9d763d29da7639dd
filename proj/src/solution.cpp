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

#include "mpclear/solution.hpp"

#include <cmath>
#include <stdexcept>

namespace mpclear {

std::string_view to_string(ClearingMode mode) {
  switch (mode) {
    case ClearingMode::kMPC:
      return "MPC";
    case ClearingMode::kMIC:
      return "MIC";
    case ClearingMode::kUMFS:
      return "UMFS";
  }
  return "?";
}

ClearingMode clearing_mode_from_string(std::string_view text) {
  if (text == "MPC") return ClearingMode::kMPC;
  if (text == "MIC") return ClearingMode::kMIC;
  if (text == "UMFS") return ClearingMode::kUMFS;
  throw std::invalid_argument("unknown clearing mode '" + std::string(text) + "'");
}

Commitment PrimalPoint::commitment() const {
  Commitment out;
  out.reserve(u.size());
  for (double v : u) out.push_back(v > 0.5 ? 1 : 0);
  return out;
}

double welfare(const Instance& instance, const PrimalPoint& primal,
               bool include_fixed_costs) {
  double w = 0.0;
  for (std::size_t i = 0; i < instance.hourly_bids.size(); ++i) {
    const auto& b = instance.hourly_bids[i];
    w += b.quantity * b.price * primal.x_hourly[i];
  }
  std::size_t flat = 0;
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    const auto& bid = instance.mp_bids[c];
    for (const auto& sub : bid.sub_bids) {
      w += sub.quantity * sub.price * primal.x_sub[flat++];
    }
    if (include_fixed_costs) w -= bid.fixed_cost * primal.u[c];
  }
  return w;
}

nlohmann::ordered_json solution_to_json(const Instance& instance,
                                        const ClearingSolution& s) {
  (void)instance;
  nlohmann::ordered_json doc;
  doc["mode"] = std::string(to_string(s.mode));
  doc["welfare"] = s.welfare;
  doc["primal"] = {{"x_hourly", s.primal.x_hourly},
                   {"x_sub", s.primal.x_sub},
                   {"u", s.primal.u},
                   {"n", s.primal.n}};
  doc["duals"] = {{"price", s.duals.price},
                  {"v", s.duals.v},
                  {"s_hourly", s.duals.s_hourly},
                  {"s_max", s.duals.s_max},
                  {"s_min", s.duals.s_min},
                  {"s_commit", s.duals.s_commit},
                  {"du_accept", s.duals.du_accept},
                  {"du_reject", s.duals.du_reject},
                  {"g_up", s.duals.g_up},
                  {"g_down", s.duals.g_down}};
  return doc;
}

ClearingSolution solution_from_json(const nlohmann::json& doc) {
  try {
    ClearingSolution s;
    s.mode = clearing_mode_from_string(doc.at("mode").get<std::string>());
    s.welfare = doc.at("welfare").get<double>();
    const auto& p = doc.at("primal");
    p.at("x_hourly").get_to(s.primal.x_hourly);
    p.at("x_sub").get_to(s.primal.x_sub);
    p.at("u").get_to(s.primal.u);
    p.at("n").get_to(s.primal.n);
    const auto& d = doc.at("duals");
    d.at("price").get_to(s.duals.price);
    d.at("v").get_to(s.duals.v);
    d.at("s_hourly").get_to(s.duals.s_hourly);
    d.at("s_max").get_to(s.duals.s_max);
    d.at("s_min").get_to(s.duals.s_min);
    d.at("s_commit").get_to(s.duals.s_commit);
    d.at("du_accept").get_to(s.duals.du_accept);
    d.at("du_reject").get_to(s.duals.du_reject);
    d.at("g_up").get_to(s.duals.g_up);
    d.at("g_down").get_to(s.duals.g_down);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed solution document: ") +
                                e.what());
  }
}

}  // namespace mpclear
