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

#include "mpclear/market.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace mpclear {

bool Instance::has_ramping() const {
  for (const auto& bid : mp_bids) {
    if (bid.ramp) return true;
  }
  return false;
}

bool Instance::has_mic_data() const {
  for (const auto& bid : mp_bids) {
    if (!bid.mic) return false;
  }
  return true;
}

std::size_t Instance::sub_bid_count() const {
  std::size_t n = 0;
  for (const auto& bid : mp_bids) n += bid.sub_bids.size();
  return n;
}

InstanceIndex::InstanceIndex(const Instance& instance)
    : location_count_(instance.network.locations.size()),
      period_count_(instance.network.periods.size()) {
  for (std::size_t l = 0; l < location_count_; ++l) {
    locations_.emplace(instance.network.locations[l], l);
  }
  for (std::size_t t = 0; t < period_count_; ++t) {
    periods_.emplace(instance.network.periods[t], t);
  }
  for (std::size_t k = 0; k < instance.network.export_vars.size(); ++k) {
    export_vars_.emplace(instance.network.export_vars[k].id, k);
  }
  hourly_cell_.reserve(instance.hourly_bids.size());
  for (const auto& bid : instance.hourly_bids) {
    hourly_cell_.push_back(cell(bid.location, bid.period));
  }
  sub_offset_.push_back(0);
  for (std::size_t c = 0; c < instance.mp_bids.size(); ++c) {
    for (const auto& sub : instance.mp_bids[c].sub_bids) {
      sub_cell_.push_back(cell(sub.location, sub.period));
      sub_period_.push_back(period(sub.period));
      sub_owner_.push_back(c);
    }
    sub_offset_.push_back(sub_cell_.size());
  }
}

std::size_t InstanceIndex::location(const Id& id) const {
  auto it = locations_.find(id);
  if (it == locations_.end()) {
    throw std::out_of_range("unknown location '" + id + "'");
  }
  return it->second;
}

std::size_t InstanceIndex::period(const Id& id) const {
  auto it = periods_.find(id);
  if (it == periods_.end()) {
    throw std::out_of_range("unknown period '" + id + "'");
  }
  return it->second;
}

std::size_t InstanceIndex::export_var(const Id& id) const {
  auto it = export_vars_.find(id);
  if (it == export_vars_.end()) {
    throw std::out_of_range("unknown export variable '" + id + "'");
  }
  return it->second;
}

std::size_t InstanceIndex::cell(const Id& location, const Id& period) const {
  return cell(this->location(location), this->period(period));
}

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out << "; ";
    out << violations[i].subject << ": " << violations[i].rule;
  }
  return out.str();
}

InvalidInstance::InvalidInstance(ValidationReport report)
    : std::runtime_error("invalid instance: " + report.to_string()),
      report_(std::move(report)) {}

void require_valid(const Instance& instance) {
  auto report = validate_instance(instance);
  if (!report.ok()) throw InvalidInstance(std::move(report));
}

ValidationReport validate_instance(const Instance& instance) {
  ValidationReport report;
  auto flag = [&](const std::string& subject, const std::string& rule) {
    report.violations.push_back({subject, rule});
  };

  const auto& net = instance.network;
  std::set<Id> locations(net.locations.begin(), net.locations.end());
  std::set<Id> periods(net.periods.begin(), net.periods.end());
  if (locations.size() != net.locations.size()) {
    flag("network", "duplicate location id");
  }
  if (periods.size() != net.periods.size()) {
    flag("network", "duplicate period id");
  }
  if (net.locations.empty()) flag("network", "no locations");
  if (net.periods.empty()) flag("network", "no periods");
  if (!(instance.price_bound > 0.0) || !std::isfinite(instance.price_bound)) {
    flag("price_bound", "price_bound must be positive and finite");
  }

  auto check_cell = [&](const std::string& subject, const Id& l,
                        const Id& t) {
    if (!locations.count(l)) flag(subject, "unknown location '" + l + "'");
    if (!periods.count(t)) flag(subject, "unknown period '" + t + "'");
  };

  std::set<Id> export_ids;
  for (const auto& k : net.export_vars) {
    if (!export_ids.insert(k.id).second) {
      flag(k.id, "duplicate export variable id");
    }
    for (const auto& coef : k.coefficients) {
      check_cell(k.id, coef.location, coef.period);
      if (!std::isfinite(coef.value)) flag(k.id, "non-finite coefficient");
    }
  }
  std::set<Id> resource_ids;
  for (const auto& m : net.resources) {
    if (!resource_ids.insert(m.id).second) flag(m.id, "duplicate resource id");
    if (!std::isfinite(m.capacity)) flag(m.id, "capacity must be finite");
    for (const auto& term : m.coefficients) {
      if (!export_ids.count(term.export_var)) {
        flag(m.id, "unknown export variable '" + term.export_var + "'");
      }
      if (!std::isfinite(term.value)) flag(m.id, "non-finite coefficient");
    }
  }

  std::set<Id> bid_ids;
  for (const auto& bid : instance.hourly_bids) {
    if (!bid_ids.insert(bid.id).second) flag(bid.id, "duplicate bid id");
    if (bid.quantity == 0.0 || !std::isfinite(bid.quantity)) {
      flag(bid.id, "quantity must be nonzero");
    }
    if (!std::isfinite(bid.price)) flag(bid.id, "price must be finite");
    check_cell(bid.id, bid.location, bid.period);
  }

  for (const auto& bid : instance.mp_bids) {
    if (!bid_ids.insert(bid.id).second) flag(bid.id, "duplicate bid id");
    if (bid.sub_bids.empty()) flag(bid.id, "MP bid has no sub-bids");
    if (!(bid.fixed_cost >= 0.0) || !std::isfinite(bid.fixed_cost)) {
      flag(bid.id, "fixed_cost must be nonnegative");
    }
    bool any_buy = false;
    bool any_sell = false;
    for (std::size_t h = 0; h < bid.sub_bids.size(); ++h) {
      const auto& sub = bid.sub_bids[h];
      const std::string subject = bid.id + ".sub_bids[" + std::to_string(h) + "]";
      if (sub.quantity == 0.0 || !std::isfinite(sub.quantity)) {
        flag(subject, "quantity must be nonzero");
      }
      any_buy |= sub.quantity > 0.0;
      any_sell |= sub.quantity < 0.0;
      if (!std::isfinite(sub.price)) flag(subject, "price must be finite");
      if (!(sub.min_ratio >= 0.0 && sub.min_ratio <= 1.0)) {
        flag(bid.id, "min_ratio out of [0,1]");
      }
      check_cell(subject, sub.location, sub.period);
    }
    if (any_buy && any_sell) flag(bid.id, "mixed-sign MP bid");
    if (bid.mic) {
      if (!(bid.mic->startup_cost >= 0.0) ||
          !std::isfinite(bid.mic->startup_cost)) {
        flag(bid.id, "startup_cost must be nonnegative");
      }
      if (!std::isfinite(bid.mic->variable_cost)) {
        flag(bid.id, "variable_cost must be finite");
      }
    }
    if (bid.ramp) {
      if (any_buy) flag(bid.id, "ramp limits on a buy-side MP bid");
      if (!(bid.ramp->up >= 0.0) || !(bid.ramp->down >= 0.0) ||
          !std::isfinite(bid.ramp->up) || !std::isfinite(bid.ramp->down)) {
        flag(bid.id, "ramp limits must be nonnegative and finite");
      }
    }
  }
  return report;
}

namespace {

Network single_cell_network(const Id& location, std::vector<Id> periods) {
  Network net;
  net.locations = {location};
  net.periods = std::move(periods);
  return net;
}

}  // namespace

Instance toy_instance(double price_bound) {
  Instance inst;
  inst.network = single_cell_network("L1", {"1"});
  inst.price_bound = price_bound;
  inst.hourly_bids = {
      {"D1", "L1", "1", 11.0, 50.0},
      {"D2", "L1", "1", 14.0, 10.0},
  };
  inst.mp_bids = {
      {"MP1", {{"L1", "1", -10.0, 10.0, 0.0}}, 100.0, MicData{100.0, 10.0},
       std::nullopt},
      {"MP2", {{"L1", "1", -10.0, 10.0, 0.0}}, 200.0, MicData{200.0, 10.0},
       std::nullopt},
  };
  return inst;
}

Instance mp_loss_instance(double price_bound) {
  Instance inst;
  inst.network = single_cell_network("L1", {"1"});
  inst.price_bound = price_bound;
  inst.hourly_bids = {
      {"D1", "L1", "1", 10.0, 50.0},
      {"S", "L1", "1", -5.0, 10.0},
  };
  inst.mp_bids = {
      {"MP1", {{"L1", "1", -10.0, 10.0, 1.0}}, 100.0, std::nullopt,
       std::nullopt},
  };
  return inst;
}

Instance ramp_instance(double ramp_up, double ramp_down) {
  Instance inst;
  inst.network = single_cell_network("L1", {"1", "2"});
  inst.hourly_bids = {
      {"D1", "L1", "1", 2.0, 50.0},
      {"D2", "L1", "2", 10.0, 50.0},
  };
  inst.mp_bids = {
      {"G1",
       {{"L1", "1", -10.0, 10.0, 0.0}, {"L1", "2", -10.0, 10.0, 0.0}},
       0.0,
       std::nullopt,
       RampLimits{ramp_up, ramp_down}},
  };
  return inst;
}

Instance generate_synthetic(std::uint64_t seed, const SyntheticParams& p) {
  if (p.n_mp < 0 || p.steps_per_curve <= 0 || p.n_periods <= 0 ||
      p.n_locations <= 0 || p.hourly_per_cell < 0 || !(p.cost_scale > 0.0) ||
      !(p.atc_capacity >= 0.0) || !(p.price_bound > 0.0) ||
      p.buy_mp_share < 0.0 || p.buy_mp_share > 1.0) {
    throw std::invalid_argument("synthetic parameters must be positive");
  }
  if (p.hourly_per_cell == 0) {
    throw std::invalid_argument(
        "synthetic parameters leave the demand side empty");
  }

  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  // Two decimals keeps instance files readable and round-trips exactly
  // through the decimal JSON format.
  auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };

  Instance inst;
  inst.price_bound = p.price_bound;
  for (int l = 0; l < p.n_locations; ++l) {
    inst.network.locations.push_back("L" + std::to_string(l + 1));
  }
  for (int t = 0; t < p.n_periods; ++t) {
    inst.network.periods.push_back(std::to_string(t + 1));
  }

  // ATC coupling: one variable per ordered pair and period, bounded by the
  // capacity and kept nonnegative by a second resource.
  if (p.n_locations >= 2) {
    for (int t = 0; t < p.n_periods; ++t) {
      const Id& period = inst.network.periods[t];
      for (int a = 0; a < p.n_locations; ++a) {
        for (int b = 0; b < p.n_locations; ++b) {
          if (a == b) continue;
          const Id& from = inst.network.locations[a];
          const Id& to = inst.network.locations[b];
          ExportVar k{"flow_" + from + "_" + to + "_" + period,
                      {{from, period, -1.0}, {to, period, 1.0}}};
          inst.network.resources.push_back(
              {"cap_" + k.id, {{k.id, 1.0}}, p.atc_capacity});
          inst.network.resources.push_back({"nonneg_" + k.id, {{k.id, -1.0}}, 0.0});
          inst.network.export_vars.push_back(std::move(k));
        }
      }
    }
  }

  int counter = 0;
  for (int l = 0; l < p.n_locations; ++l) {
    for (int t = 0; t < p.n_periods; ++t) {
      for (int j = 0; j < p.hourly_per_cell; ++j) {
        const Id& loc = inst.network.locations[l];
        const Id& per = inst.network.periods[t];
        inst.hourly_bids.push_back({"D" + std::to_string(++counter), loc, per,
                                    round2(uniform(20.0, 60.0)),
                                    round2(uniform(40.0, 100.0))});
        inst.hourly_bids.push_back({"S" + std::to_string(counter), loc, per,
                                    -round2(uniform(10.0, 40.0)),
                                    round2(uniform(5.0, 60.0))});
      }
    }
  }

  for (int c = 0; c < p.n_mp; ++c) {
    const bool buy = uniform(0.0, 1.0) < p.buy_mp_share;
    const Id& loc =
        inst.network.locations[static_cast<std::size_t>(uniform(0.0, 1.0) * p.n_locations) %
                               p.n_locations];
    MPBid bid;
    bid.id = "MP" + std::to_string(c + 1);
    const double base = round2(buy ? uniform(50.0, 90.0) : uniform(10.0, 40.0));
    for (int t = 0; t < p.n_periods; ++t) {
      double price = base;
      for (int s = 0; s < p.steps_per_curve; ++s) {
        MPSubBid sub;
        sub.location = loc;
        sub.period = inst.network.periods[t];
        const double q = round2(uniform(5.0, 20.0));
        sub.quantity = buy ? q : -q;
        sub.price = price;
        sub.min_ratio = s == 0 ? 0.6 : 0.0;
        bid.sub_bids.push_back(sub);
        const double step = round2(uniform(2.0, 10.0));
        price = round2(buy ? price - step : price + step);
      }
    }
    bid.fixed_cost = round2(p.cost_scale * uniform(50.0, 300.0));
    bid.mic = MicData{bid.fixed_cost, base};
    inst.mp_bids.push_back(std::move(bid));
  }
  return inst;
}

}  // namespace mpclear
