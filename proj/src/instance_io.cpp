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

#include "mpclear/instance_io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace mpclear {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Walks a document with a running JSON path for error messages.
class Reader {
 public:
  Reader(const json& node, std::string path)
      : node_(node), path_(std::move(path)) {}

  void expect_object(std::initializer_list<const char*> required,
                     std::initializer_list<const char*> optional = {}) const {
    if (!node_.is_object()) fail("expected an object");
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const auto& key = it.key();
      auto match = [&](const char* k) { return key == k; };
      if (std::none_of(required.begin(), required.end(), match) &&
          std::none_of(optional.begin(), optional.end(), match)) {
        throw ParseError(path_ + "." + key + ": unknown field");
      }
    }
    for (const char* key : required) {
      if (!node_.contains(key)) {
        throw ParseError(path_ + "." + key + ": missing field");
      }
    }
  }

  Reader field(const char* key) const {
    return Reader(node_.at(key), path_ + "." + key);
  }
  bool has(const char* key) const { return node_.contains(key); }

  std::size_t size() const {
    if (!node_.is_array()) fail("expected an array");
    return node_.size();
  }
  Reader at(std::size_t i) const {
    return Reader(node_.at(i), path_ + "[" + std::to_string(i) + "]");
  }

  std::string str() const {
    if (!node_.is_string()) fail("expected a string");
    return node_.get<std::string>();
  }
  double number() const {
    if (!node_.is_number()) fail("expected a number");
    return node_.get<double>();
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(path_ + ": " + what);
  }

 private:
  const json& node_;
  std::string path_;
};

std::vector<Id> read_ids(const Reader& r) {
  std::vector<Id> ids;
  for (std::size_t i = 0; i < r.size(); ++i) ids.push_back(r.at(i).str());
  return ids;
}

}  // namespace

ordered_json instance_to_json(const Instance& inst) {
  ordered_json doc;
  doc["locations"] = inst.network.locations;
  doc["periods"] = inst.network.periods;
  doc["export_vars"] = ordered_json::array();
  for (const auto& k : inst.network.export_vars) {
    ordered_json coefs = ordered_json::array();
    for (const auto& c : k.coefficients) {
      coefs.push_back({c.location, c.period, c.value});
    }
    doc["export_vars"].push_back({{"id", k.id}, {"coefficients", coefs}});
  }
  doc["resources"] = ordered_json::array();
  for (const auto& m : inst.network.resources) {
    ordered_json coefs = ordered_json::array();
    for (const auto& t : m.coefficients) coefs.push_back({t.export_var, t.value});
    doc["resources"].push_back(
        {{"id", m.id}, {"coefficients", coefs}, {"capacity", m.capacity}});
  }
  doc["hourly_bids"] = ordered_json::array();
  for (const auto& b : inst.hourly_bids) {
    doc["hourly_bids"].push_back({{"id", b.id},
                                  {"location", b.location},
                                  {"period", b.period},
                                  {"quantity", b.quantity},
                                  {"price", b.price}});
  }
  doc["mp_bids"] = ordered_json::array();
  for (const auto& c : inst.mp_bids) {
    ordered_json bid;
    bid["id"] = c.id;
    bid["fixed_cost"] = c.fixed_cost;
    bid["sub_bids"] = ordered_json::array();
    for (const auto& s : c.sub_bids) {
      bid["sub_bids"].push_back({{"location", s.location},
                                 {"period", s.period},
                                 {"quantity", s.quantity},
                                 {"price", s.price},
                                 {"min_ratio", s.min_ratio}});
    }
    if (c.mic) {
      bid["mic"] = {{"startup_cost", c.mic->startup_cost},
                    {"variable_cost", c.mic->variable_cost}};
    }
    if (c.ramp) bid["ramp"] = {{"ru", c.ramp->up}, {"rd", c.ramp->down}};
    doc["mp_bids"].push_back(std::move(bid));
  }
  doc["price_bound"] = inst.price_bound;
  return doc;
}

Instance instance_from_json(const json& doc) {
  Reader root(doc, "$");
  root.expect_object({"locations", "periods", "hourly_bids", "mp_bids"},
                     {"export_vars", "resources", "price_bound"});
  Instance inst;
  inst.network.locations = read_ids(root.field("locations"));
  inst.network.periods = read_ids(root.field("periods"));

  if (root.has("export_vars")) {
    auto arr = root.field("export_vars");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      auto r = arr.at(i);
      r.expect_object({"id", "coefficients"});
      ExportVar k;
      k.id = r.field("id").str();
      auto coefs = r.field("coefficients");
      for (std::size_t j = 0; j < coefs.size(); ++j) {
        auto triple = coefs.at(j);
        if (triple.size() != 3) triple.fail("expected [location, period, value]");
        k.coefficients.push_back(
            {triple.at(0).str(), triple.at(1).str(), triple.at(2).number()});
      }
      inst.network.export_vars.push_back(std::move(k));
    }
  }
  if (root.has("resources")) {
    auto arr = root.field("resources");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      auto r = arr.at(i);
      r.expect_object({"id", "coefficients", "capacity"});
      Resource m;
      m.id = r.field("id").str();
      m.capacity = r.field("capacity").number();
      auto coefs = r.field("coefficients");
      for (std::size_t j = 0; j < coefs.size(); ++j) {
        auto pair = coefs.at(j);
        if (pair.size() != 2) pair.fail("expected [export_var, value]");
        m.coefficients.push_back({pair.at(0).str(), pair.at(1).number()});
      }
      inst.network.resources.push_back(std::move(m));
    }
  }

  auto hourly = root.field("hourly_bids");
  for (std::size_t i = 0; i < hourly.size(); ++i) {
    auto r = hourly.at(i);
    r.expect_object({"id", "location", "period", "quantity", "price"});
    inst.hourly_bids.push_back({r.field("id").str(), r.field("location").str(),
                                r.field("period").str(),
                                r.field("quantity").number(),
                                r.field("price").number()});
  }

  auto mp = root.field("mp_bids");
  for (std::size_t i = 0; i < mp.size(); ++i) {
    auto r = mp.at(i);
    r.expect_object({"id", "sub_bids"}, {"fixed_cost", "mic", "ramp"});
    MPBid bid;
    bid.id = r.field("id").str();
    if (r.has("fixed_cost")) bid.fixed_cost = r.field("fixed_cost").number();
    auto subs = r.field("sub_bids");
    for (std::size_t j = 0; j < subs.size(); ++j) {
      auto s = subs.at(j);
      s.expect_object({"location", "period", "quantity", "price"},
                      {"min_ratio"});
      MPSubBid sub{s.field("location").str(), s.field("period").str(),
                   s.field("quantity").number(), s.field("price").number(),
                   0.0};
      if (s.has("min_ratio")) sub.min_ratio = s.field("min_ratio").number();
      bid.sub_bids.push_back(std::move(sub));
    }
    if (r.has("mic")) {
      auto m = r.field("mic");
      m.expect_object({"startup_cost", "variable_cost"});
      bid.mic = MicData{m.field("startup_cost").number(),
                        m.field("variable_cost").number()};
    }
    if (r.has("ramp")) {
      auto m = r.field("ramp");
      m.expect_object({"ru", "rd"});
      bid.ramp = RampLimits{m.field("ru").number(), m.field("rd").number()};
    }
    inst.mp_bids.push_back(std::move(bid));
  }
  if (root.has("price_bound")) {
    inst.price_bound = root.field("price_bound").number();
  }
  return inst;
}

Instance parse_instance_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number.
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
    throw ParseError("line " + std::to_string(line) +
                     ": malformed JSON: " + e.what());
  }
  return instance_from_json(doc);
}

Instance parse_instance_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  Instance inst = parse_instance_string(buffer.str());
  auto report = validate_instance(inst);
  if (!report.ok()) {
    throw ParseError(path.string() + ": " + report.to_string());
  }
  return inst;
}

void write_instance_file(const Instance& instance,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << instance_to_json(instance).dump(2) << '\n';
}

}  // namespace mpclear
