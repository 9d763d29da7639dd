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

#include <filesystem>
#include <string>

#include "doctest.h"
#include "mpclear/instance_io.hpp"
#include "mpclear/market.hpp"

using namespace mpclear;

namespace {

bool has_violation(const Instance& inst, const std::string& subject, const std::string& rule) {
  for (const auto& v : validate_instance(inst).violations) {
    if (v.subject == subject && v.rule.find(rule) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("toy instance shape") {
  const auto toy = toy_instance();
  CHECK(validate_instance(toy).ok());
  CHECK(toy.hourly_bids.size() == 2);
  REQUIRE(toy.mp_bids.size() == 2);
  CHECK(toy.mp_bids[0].is_sell());
  CHECK(toy.mp_bids[0].fixed_cost == 100.0);
  CHECK(toy.mp_bids[1].fixed_cost == 200.0);
  CHECK(toy.has_mic_data());
  CHECK_FALSE(toy.has_ramping());
  CHECK(ramp_instance(5, 5).has_ramping());
}

TEST_CASE("validation names the offending bid") {
  auto inst = toy_instance();
  inst.mp_bids[0].sub_bids[0].min_ratio = 1.2;
  CHECK(has_violation(inst, "MP1", "min_ratio"));
  CHECK_THROWS_AS(require_valid(inst), InvalidInstance);
  try {
    require_valid(inst);
  } catch (const InvalidInstance& e) {
    CHECK(std::string(e.what()).find("MP1") != std::string::npos);
  }
}

TEST_CASE("mixed-sign MP bids are rejected") {
  auto inst = toy_instance();
  inst.mp_bids[0].sub_bids.push_back({"L1", "1", 5.0, 20.0, 0.0});
  CHECK(has_violation(inst, "MP1", "mixed-sign"));
}

TEST_CASE("ramp limits only on sell bids") {
  auto inst = ramp_instance(5, 5);
  for (auto& s : inst.mp_bids[0].sub_bids) s.quantity = -s.quantity;
  CHECK(has_violation(inst, "G1", "buy-side"));
  auto neg = ramp_instance(-1, 5);
  CHECK(has_violation(neg, "G1", "nonnegative"));
}

TEST_CASE("duplicate ids and unknown cells") {
  auto inst = toy_instance();
  inst.hourly_bids[1].id = "D1";
  CHECK(has_violation(inst, "D1", "duplicate"));
  auto cell = toy_instance();
  cell.hourly_bids[0].location = "L9";
  CHECK(has_violation(cell, "D1", "unknown location"));
  auto zero = toy_instance();
  zero.hourly_bids[0].quantity = 0.0;
  CHECK(has_violation(zero, "D1", "nonzero"));
}

TEST_CASE("json round trip") {
  for (const auto& inst : {toy_instance(), mp_loss_instance(), ramp_instance(5, 3)}) {
    CHECK(instance_from_json(nlohmann::json::parse(instance_to_json(inst).dump())) == inst);
  }
  SyntheticParams p;
  p.buy_mp_share = 0.5;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto inst = generate_synthetic(seed, p);
    CHECK(parse_instance_string(instance_to_json(inst).dump(1)) == inst);
  }
}

TEST_CASE("strict schema rejects unknown fields") {
  auto doc = instance_to_json(toy_instance());
  doc["mp_bids"][0]["curtailment"] = 0.5;
  try {
    (void)instance_from_json(nlohmann::json::parse(doc.dump()));
    FAIL("unknown field accepted");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("unknown field") != std::string::npos);
    CHECK(std::string(e.what()).find("curtailment") != std::string::npos);
  }
  auto missing = instance_to_json(toy_instance());
  missing.erase("hourly_bids");
  CHECK_THROWS_AS(instance_from_json(nlohmann::json::parse(missing.dump())), ParseError);
}

TEST_CASE("syntax errors cite the line") {
  try {
    (void)parse_instance_string("{\n  \"locations\": [\"L1\"],\n  oops\n}");
    FAIL("malformed document accepted");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("shipped toy fixture equals the built-in toy") {
  const std::filesystem::path path = std::filesystem::path(MPCLEAR_SOURCE_DIR) / "data" / "toy.json";
  CHECK(parse_instance_file(path) == toy_instance());
}

TEST_CASE("generator is deterministic and sized by its parameters") {
  SyntheticParams p;
  const auto a = generate_synthetic(7, p);
  CHECK(a == generate_synthetic(7, p));
  CHECK_FALSE(a == generate_synthetic(8, p));
  CHECK(validate_instance(a).ok());
  CHECK(a.mp_bids.size() == 4);
  CHECK(a.sub_bid_count() == 8);
  CHECK(a.hourly_bids.size() <= 8);
  CHECK(a.network.locations.size() == 2);
  CHECK(a.network.periods.size() == 2);
  p.n_periods = 0;
  CHECK_THROWS_AS(generate_synthetic(1, p), std::invalid_argument);
}

TEST_CASE("index maps cells and sub-bids") {
  SyntheticParams p;
  p.steps_per_curve = 2;
  const auto inst = generate_synthetic(3, p);
  const InstanceIndex idx(inst);
  CHECK(idx.cell_count() == 4);
  CHECK(idx.sub_bid_count() == inst.sub_bid_count());
  std::size_t flat = 0;
  for (std::size_t c = 0; c < inst.mp_bids.size(); ++c) {
    CHECK(idx.sub_bid_offset(c) == flat);
    for (const auto& s : inst.mp_bids[c].sub_bids) {
      CHECK(idx.owner(flat) == c);
      CHECK(idx.sub_bid_cell(flat) == idx.cell(s.location, s.period));
      CHECK(idx.sub_bid_period(flat) == idx.period(s.period));
      ++flat;
    }
  }
  for (std::size_t i = 0; i < inst.hourly_bids.size(); ++i) {
    CHECK(idx.hourly_cell(i) ==
          idx.cell(inst.hourly_bids[i].location, inst.hourly_bids[i].period));
  }
}
