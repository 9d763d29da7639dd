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

#ifndef MPCLEAR_MARKET_HPP_
#define MPCLEAR_MARKET_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace mpclear {

using Id = std::string;

// Sign convention throughout: quantity > 0 is a buy, quantity < 0 a sell.
// Quantities in MW, prices in currency/MWh, costs in currency.

struct HourlyBid {
  Id id;
  Id location;
  Id period;
  double quantity = 0.0;
  double price = 0.0;

  bool operator==(const HourlyBid&) const = default;
};

struct MPSubBid {
  Id location;
  Id period;
  double quantity = 0.0;
  double price = 0.0;
  double min_ratio = 0.0;

  bool operator==(const MPSubBid&) const = default;
};

// Income-condition data of an exchange-style complex order.
struct MicData {
  double startup_cost = 0.0;
  double variable_cost = 0.0;

  bool operator==(const MicData&) const = default;
};

// Load-gradient limits, MW per period step.
struct RampLimits {
  double up = 0.0;
  double down = 0.0;

  bool operator==(const RampLimits&) const = default;
};

// Conditionally accepted set of curve steps with a minimum-profit (sell) or
// maximum-payment (buy) condition. A block order is the case
// fixed_cost == 0.
struct MPBid {
  Id id;
  std::vector<MPSubBid> sub_bids;
  double fixed_cost = 0.0;
  std::optional<MicData> mic;
  std::optional<RampLimits> ramp;

  bool is_sell() const {
    return !sub_bids.empty() && sub_bids.front().quantity < 0.0;
  }

  bool operator==(const MPBid&) const = default;
};

struct NetworkCoefficient {
  Id location;
  Id period;
  double value = 0.0;

  bool operator==(const NetworkCoefficient&) const = default;
};

// Abstract network element n_k; its column in the balance of (l, t) is
// coefficients[(l, t)].
struct ExportVar {
  Id id;
  std::vector<NetworkCoefficient> coefficients;

  bool operator==(const ExportVar&) const = default;
};

struct ResourceTerm {
  Id export_var;
  double value = 0.0;

  bool operator==(const ResourceTerm&) const = default;
};

// Linear capacity sum_k a_{m,k} n_k <= capacity.
struct Resource {
  Id id;
  std::vector<ResourceTerm> coefficients;
  double capacity = 0.0;

  bool operator==(const Resource&) const = default;
};

struct Network {
  std::vector<Id> locations;
  std::vector<Id> periods;  // ordered; ramping links consecutive entries
  std::vector<ExportVar> export_vars;
  std::vector<Resource> resources;

  bool operator==(const Network&) const = default;
};

inline constexpr double kDefaultPriceBound = 3000.0;

struct Instance {
  std::vector<HourlyBid> hourly_bids;
  std::vector<MPBid> mp_bids;
  Network network;
  double price_bound = kDefaultPriceBound;

  bool has_ramping() const;
  bool has_mic_data() const;  // every MP bid carries MIC data
  std::size_t sub_bid_count() const;

  bool operator==(const Instance&) const = default;
};

// Dense index over an instance. Cells are (location, period) pairs laid out
// location-major; sub-bids are flattened in (bid, step) order.
class InstanceIndex {
 public:
  explicit InstanceIndex(const Instance& instance);

  std::size_t location_count() const { return location_count_; }
  std::size_t period_count() const { return period_count_; }
  std::size_t cell_count() const { return location_count_ * period_count_; }

  std::size_t location(const Id& id) const;
  std::size_t period(const Id& id) const;
  std::size_t export_var(const Id& id) const;
  std::size_t cell(std::size_t location, std::size_t period) const {
    return location * period_count_ + period;
  }
  std::size_t cell(const Id& location, const Id& period) const;

  std::size_t hourly_cell(std::size_t i) const { return hourly_cell_[i]; }
  std::size_t sub_bid_cell(std::size_t flat) const { return sub_cell_[flat]; }
  std::size_t sub_bid_period(std::size_t flat) const { return sub_period_[flat]; }

  // Flat offset of the first sub-bid of MP bid c; sub_bid_count() at end.
  std::size_t sub_bid_offset(std::size_t c) const { return sub_offset_[c]; }
  std::size_t sub_bid_count() const { return sub_offset_.back(); }
  std::size_t owner(std::size_t flat) const { return sub_owner_[flat]; }

 private:
  std::size_t location_count_ = 0;
  std::size_t period_count_ = 0;
  std::unordered_map<Id, std::size_t> locations_;
  std::unordered_map<Id, std::size_t> periods_;
  std::unordered_map<Id, std::size_t> export_vars_;
  std::vector<std::size_t> hourly_cell_;
  std::vector<std::size_t> sub_cell_;
  std::vector<std::size_t> sub_period_;
  std::vector<std::size_t> sub_offset_;
  std::vector<std::size_t> sub_owner_;
};

struct Violation {
  std::string subject;  // offending bid, resource or field
  std::string rule;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate_instance(const Instance& instance);

class InvalidInstance : public std::runtime_error {
 public:
  explicit InvalidInstance(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

// Throws InvalidInstance when validation fails.
void require_valid(const Instance& instance);

// Two elastic demand steps and two plants with equal marginal cost but
// different start-up costs; single location and period.
Instance toy_instance(double price_bound = kDefaultPriceBound);

// One demand step, one cheap hourly sell step, and an indivisible plant whose
// start-up cost cannot be recovered at any price that keeps the cheap step
// out of the money. Clears with the plant paradoxically rejected.
Instance mp_loss_instance(double price_bound = kDefaultPriceBound);

// One sell MP bid over two periods with a load-gradient limit and demand
// 2 MW then 10 MW.
Instance ramp_instance(double ramp_up, double ramp_down);

struct SyntheticParams {
  int n_mp = 4;
  int steps_per_curve = 1;
  int n_periods = 2;
  int n_locations = 2;
  double atc_capacity = 20.0;
  double cost_scale = 1.0;
  // Hourly demand and supply steps per (location, period) cell.
  int hourly_per_cell = 1;
  // Fraction of MP bids generated as buy-side (maximum payment) orders.
  double buy_mp_share = 0.0;
  double price_bound = kDefaultPriceBound;
};

// Deterministic in (seed, params). Every MP curve has one curve per period;
// its first step carries min_ratio 0.6 at the bid's variable-cost draw.
// Throws std::invalid_argument on non-positive sizes.
Instance generate_synthetic(std::uint64_t seed, const SyntheticParams& params);

}  // namespace mpclear

#endif  // MPCLEAR_MARKET_HPP_
