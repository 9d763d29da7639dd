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
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mpclear/cli.hpp"
#include "mpclear/instance_io.hpp"

using namespace mpclear;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string toy_path() { return (fs::path(MPCLEAR_SOURCE_DIR) / "data" / "toy.json").string(); }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mpclear_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string write_instance(const std::string& name, const nlohmann::ordered_json& doc) {
  const auto path = scratch(name);
  std::ofstream(path) << doc.dump(2);
  return path.string();
}

std::string read(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  for (std::string line; std::getline(s, line);) out.push_back(line);
  return out;
}

// Drops the timing fields, which are the only nondeterministic output.
void strip_timing(nlohmann::json& doc) {
  if (doc.is_object()) {
    doc.erase("runtime_s");
    doc.erase("wall_time_s");
    for (auto& [k, v] : doc.items()) strip_timing(v);
  } else if (doc.is_array()) {
    for (auto& v : doc) strip_timing(v);
  }
}

}  // namespace

TEST_CASE("clear toy with MPC") {
  const auto r = cli({"clear", toy_path(), "--method", "mpc"});
  CHECK(r.code == kExitOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["welfare_label"] == "welfare");
  CHECK(doc["welfare"].get<double>() == doctest::Approx(300.0));
  CHECK(doc["prices"][0]["price"].get<double>() == doctest::Approx(50.0));
  CHECK(doc["acceptance"][0]["accepted"] == true);
  CHECK(doc["acceptance"][1]["accepted"] == false);
  CHECK(doc["verification"]["ok"] == true);
  CHECK(doc["profit"][0]["profit"].get<double>() == doctest::Approx(300.0));
}

TEST_CASE("clear toy with Benders and MIC") {
  for (const char* m : {"benders-iterative", "benders-callback"}) {
    const auto r = cli({"clear", toy_path(), "-m", m});
    CHECK(r.code == kExitOk);
    CHECK(nlohmann::json::parse(r.out)["welfare"].get<double>() == doctest::Approx(300.0));
  }
  const auto mic = cli({"clear", toy_path(), "-m", "mic"});
  CHECK(mic.code == kExitOk);
  const auto doc = nlohmann::json::parse(mic.out);
  CHECK(doc["welfare_label"] == "welfare_without_fixed_costs");
  CHECK(doc["welfare_without_fixed_costs"].get<double>() == doctest::Approx(400.0));
  CHECK_FALSE(doc.contains("welfare"));
}

TEST_CASE("clear writes report and CSV summary atomically") {
  const auto out = scratch("toy_report.json");
  fs::remove(out);
  const auto r = cli({"clear", toy_path(), "-m", "mpc", "-o", out.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.empty());
  const auto csv = lines(read(fs::path(out).replace_extension(".csv")));
  REQUIRE(csv.size() == 2);
  CHECK(csv[0] == kCsvHeader);
  CHECK(csv[1].rfind("toy,mpc,300.000000,0.00,0,0,0,", 0) == 0);
  CHECK_FALSE(fs::exists(out.string() + ".tmp"));

  const auto v = cli({"verify", toy_path(), out.string()});
  CHECK(v.code == kExitOk);
  CHECK(nlohmann::json::parse(v.out)["ok"] == true);

  auto doc = nlohmann::json::parse(read(out));
  doc["solution"]["duals"]["price"][0] = 45.0;
  std::ofstream(scratch("tampered.json")) << doc.dump();
  const auto bad = cli({"verify", toy_path(), scratch("tampered.json").string()});
  CHECK(bad.code == kExitError);
  CHECK(bad.err.find("verification failed") != std::string::npos);
}

TEST_CASE("reports are stable apart from timing") {
  auto a = nlohmann::json::parse(cli({"clear", toy_path(), "-m", "benders-iterative"}).out);
  auto b = nlohmann::json::parse(cli({"clear", toy_path(), "-m", "benders-iterative"}).out);
  strip_timing(a);
  strip_timing(b);
  CHECK(a.dump() == b.dump());
}

TEST_CASE("compare flags different welfare definitions") {
  const auto same = cli({"compare", toy_path(), "-m", "mpc", "-m", "benders-iterative"});
  CHECK(same.code == kExitOk);
  const auto doc = nlohmann::json::parse(same.out);
  CHECK(doc["rows"].size() == 2);
  CHECK(doc["agree"] == true);
  CHECK(doc["agreements"].size() == 1);

  const auto mixed = cli({"compare", toy_path(), "-m", "mpc", "-m", "mic"});
  CHECK(mixed.code == kExitOk);
  const auto m = nlohmann::json::parse(mixed.out);
  CHECK(m["non_comparable"].size() == 1);
  CHECK(m["agreements"].empty());
  CHECK(m["rows"][0]["welfare"].get<double>() == doctest::Approx(300.0));
  CHECK(m["rows"][1]["welfare"].get<double>() == doctest::Approx(400.0));
}

TEST_CASE("compare exits 3 on disagreement") {
  const auto path = write_instance("mp_loss.json", instance_to_json(mp_loss_instance()));
  // UMFS may accept the loss-making plant; MPC may not.
  const auto r = cli({"compare", path, "-m", "mpc", "-m", "umfs"});
  CHECK(r.code == kExitDisagreement);
  CHECK(r.err.find("mpc vs umfs") != std::string::npos);
}

TEST_CASE("bench over seeds") {
  const auto r = cli({"bench", "--seeds", "1-3", "-m", "mpc", "-m", "benders-iterative"});
  CHECK(r.code == kExitOk);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == kCsvHeader);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].find(",0.00,") != std::string::npos);
  const auto par = cli({"bench", "--seeds", "1-3", "-m", "mpc", "-m", "benders-iterative", "-j", "3"});
  const auto prow = lines(par.out);
  REQUIRE(prow.size() == rows.size());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    // Everything before the runtime column matches.
    CHECK(prow[i].substr(0, prow[i].rfind(',')) == rows[i].substr(0, rows[i].rfind(',')));
  }
}

TEST_CASE("gen writes a parseable instance") {
  const auto out = scratch("gen5.json");
  CHECK(cli({"gen", "--seed", "5", "--n-mp", "3", "-o", out.string()}).code == kExitOk);
  SyntheticParams p;
  p.n_mp = 3;
  CHECK(parse_instance_file(out) == generate_synthetic(5, p));
  CHECK(cli({"gen"}).code == kExitError);
}

TEST_CASE("oracle command") {
  const auto r = cli({"oracle", toy_path()});
  CHECK(r.code == kExitOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["best_welfare"].get<double>() == doctest::Approx(300.0));
}

TEST_CASE("bad input maps to exit codes") {
  auto unknown = instance_to_json(toy_instance());
  unknown["curtailment"] = 1;
  const auto u = cli({"clear", write_instance("unknown.json", unknown), "-m", "mpc"});
  CHECK(u.code == kExitError);
  CHECK(u.err.find("unknown field") != std::string::npos);

  auto ratio = instance_to_json(toy_instance());
  ratio["mp_bids"][0]["sub_bids"][0]["min_ratio"] = 1.2;
  const auto rr = cli({"clear", write_instance("ratio.json", ratio), "-m", "mpc"});
  CHECK(rr.code == kExitError);
  CHECK(rr.err.find("MP1") != std::string::npos);

  // A resource forcing net exports out of a cell with no sellers.
  const auto inf = nlohmann::json::parse(R"({
    "locations": ["L1"], "periods": ["1"],
    "export_vars": [{"id": "E", "coefficients": [["L1", "1", 1.0]]}],
    "resources": [{"id": "R", "coefficients": [["E", 1.0]], "capacity": -5.0}],
    "hourly_bids": [{"id": "D1", "location": "L1", "period": "1", "quantity": 5.0, "price": 50.0}],
    "mp_bids": []})");
  const auto ir = cli({"clear", write_instance("infeasible.json", inf), "-m", "mpc"});
  CHECK(ir.code == kExitInfeasible);

  CHECK(cli({"clear", toy_path()}).code == kExitError);
  CHECK(cli({"clear", toy_path(), "-m", "simplex"}).code == kExitError);
  CHECK(cli({"--help"}).code == kExitOk);
  CHECK(cli({}).code == kExitError);
}
