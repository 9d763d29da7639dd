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

#ifndef MPCLEAR_MODEL_HPP_
#define MPCLEAR_MODEL_HPP_

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace mpclear {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { kMinimize, kMaximize };
enum class VarType { kContinuous, kInteger };

struct Term {
  int var = -1;
  double coef = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double objective = 0.0;
  VarType type = VarType::kContinuous;
};

// lower <= sum(terms) <= upper; equalities have lower == upper.
struct Row {
  std::string name;
  std::vector<Term> terms;
  double lower = -kInf;
  double upper = kInf;
};

// Backend-neutral LP/MIP. Solvers translate it; formulations build it.
class Model {
 public:
  explicit Model(Sense sense = Sense::kMaximize) : sense_(sense) {}

  int add_variable(std::string name, double lower, double upper,
                   double objective = 0.0,
                   VarType type = VarType::kContinuous);
  int add_row(std::string name, std::vector<Term> terms, double lower,
              double upper);
  int add_le(std::string name, std::vector<Term> terms, double rhs) {
    return add_row(std::move(name), std::move(terms), -kInf, rhs);
  }
  int add_ge(std::string name, std::vector<Term> terms, double rhs) {
    return add_row(std::move(name), std::move(terms), rhs, kInf);
  }
  int add_eq(std::string name, std::vector<Term> terms, double rhs) {
    return add_row(std::move(name), std::move(terms), rhs, rhs);
  }

  // Adds coef to an existing coefficient, or appends the term.
  void add_to_row(int row, int var, double coef);
  void add_objective(int var, double coef) { vars_[var].objective += coef; }

  Sense sense() const { return sense_; }
  double objective_offset() const { return offset_; }
  void set_objective_offset(double offset) { offset_ = offset; }

  const std::vector<Variable>& variables() const { return vars_; }
  std::vector<Variable>& variables() { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::vector<Row>& rows() { return rows_; }
  const Variable& variable(int j) const { return vars_[j]; }
  Variable& variable(int j) { return vars_[j]; }
  const Row& row(int i) const { return rows_[i]; }

  std::size_t integer_count() const;
  bool is_mip() const { return integer_count() > 0; }
  void relax_integrality();

  double objective_value(std::span<const double> x) const;
  double row_activity(int row, std::span<const double> x) const;
  // Largest bound or row violation of x.
  double max_violation(std::span<const double> x) const;

  // CPLEX-style LP text; integer columns go to a Generals section.
  std::string to_lp_text() const;

 private:
  Sense sense_;
  double offset_ = 0.0;
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
};

}  // namespace mpclear

#endif  // MPCLEAR_MODEL_HPP_
