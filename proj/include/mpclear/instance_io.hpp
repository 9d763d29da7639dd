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

#ifndef MPCLEAR_INSTANCE_IO_HPP_
#define MPCLEAR_INSTANCE_IO_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "mpclear/market.hpp"

namespace mpclear {

// Malformed document or schema violation. The message names the line (for
// syntax errors) or the JSON path of the offending field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::ordered_json instance_to_json(const Instance& instance);

// Strict: unknown keys are rejected, not ignored. Does not validate.
Instance instance_from_json(const nlohmann::json& doc);

Instance parse_instance_string(const std::string& text);

// Parses and validates; validation failures surface as ParseError naming
// the offending bid.
Instance parse_instance_file(const std::filesystem::path& path);

void write_instance_file(const Instance& instance,
                         const std::filesystem::path& path);

}  // namespace mpclear

#endif  // MPCLEAR_INSTANCE_IO_HPP_
