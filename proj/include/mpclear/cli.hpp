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

#ifndef MPCLEAR_CLI_HPP_
#define MPCLEAR_CLI_HPP_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mpclear/clearing.hpp"
#include "mpclear/market.hpp"
#include "mpclear/verification.hpp"

namespace mpclear {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitInfeasible = 2,
  kExitDisagreement = 3,
};

inline constexpr const char* kCsvHeader =
    "instance,method,welfare,gap,cuts_classical,cuts_nogood,cuts_strengthened,nodes,runtime_s";

struct SummaryRow {
  std::string instance;
  std::string method;
  std::optional<double> welfare;  // unset when no solution was found
  double gap = 0.0;               // relative, printed in percent
  int cuts_classical = 0;
  int cuts_nogood = 0;
  int cuts_strengthened = 0;
  long long nodes = 0;
  double runtime_s = 0.0;
};

SummaryRow summary_row(const std::string& instance, const ClearResult& result);
std::string to_csv_line(const SummaryRow& row);

// "welfare" for methods that charge fixed costs, otherwise
// "welfare_without_fixed_costs".
std::string welfare_label(Method method);

nlohmann::ordered_json clear_report(const Instance& instance, const std::string& name,
                                    const ClearResult& result,
                                    const VerificationReport* verification);

struct CompareOutcome {
  std::vector<SummaryRow> rows;
  nlohmann::ordered_json report;
  bool agree = true;
  std::optional<std::string> offending;  // "a vs b: ..." on disagreement
};

// Methods whose welfare definitions differ are listed as non-comparable and
// never enter the agreement test.
CompareOutcome compare_methods(const Instance& instance, const std::string& name,
                               const std::vector<Method>& methods,
                               const ClearOptions& base, double rel_tol = 1e-5);

// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

// Entry point of the mpclear tool; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpclear

#endif  // MPCLEAR_CLI_HPP_
