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

#include "mpclear/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mpclear {

int Model::add_variable(std::string name, double lower, double upper,
                        double objective, VarType type) {
  vars_.push_back({std::move(name), lower, upper, objective, type});
  return static_cast<int>(vars_.size()) - 1;
}

int Model::add_row(std::string name, std::vector<Term> terms, double lower,
                   double upper) {
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= static_cast<int>(vars_.size())) {
      throw std::out_of_range("row '" + name + "' references unknown column");
    }
  }
  // Merge duplicate columns so backends see one coefficient per column.
  std::vector<Term> merged;
  for (const auto& t : terms) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const Term& m) { return m.var == t.var; });
    if (it == merged.end()) {
      merged.push_back(t);
    } else {
      it->coef += t.coef;
    }
  }
  rows_.push_back({std::move(name), std::move(merged), lower, upper});
  return static_cast<int>(rows_.size()) - 1;
}

void Model::add_to_row(int row, int var, double coef) {
  auto& terms = rows_.at(row).terms;
  for (auto& t : terms) {
    if (t.var == var) {
      t.coef += coef;
      return;
    }
  }
  terms.push_back({var, coef});
}

std::size_t Model::integer_count() const {
  return static_cast<std::size_t>(
      std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) {
        return v.type == VarType::kInteger;
      }));
}

void Model::relax_integrality() {
  for (auto& v : vars_) v.type = VarType::kContinuous;
}

double Model::objective_value(std::span<const double> x) const {
  double obj = offset_;
  for (std::size_t j = 0; j < vars_.size(); ++j) obj += vars_[j].objective * x[j];
  return obj;
}

double Model::row_activity(int row, std::span<const double> x) const {
  double a = 0.0;
  for (const auto& t : rows_[row].terms) a += t.coef * x[t.var];
  return a;
}

double Model::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max({worst, vars_[j].lower - x[j], x[j] - vars_[j].upper});
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const double a = row_activity(static_cast<int>(i), x);
    worst = std::max({worst, rows_[i].lower - a, a - rows_[i].upper});
  }
  return worst;
}

namespace {

std::string lp_number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void write_terms(std::ostringstream& out, const std::vector<Term>& terms,
                 const std::vector<Variable>& vars) {
  if (terms.empty()) {
    out << " 0 " << vars.front().name;
    return;
  }
  for (const auto& t : terms) {
    out << (t.coef < 0 ? " - " : " + ") << lp_number(std::fabs(t.coef)) << ' '
        << vars[t.var].name;
  }
}

}  // namespace

std::string Model::to_lp_text() const {
  std::ostringstream out;
  out << (sense_ == Sense::kMaximize ? "Maximize\n" : "Minimize\n") << " obj:";
  std::vector<Term> obj;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    if (vars_[j].objective != 0.0) obj.push_back({static_cast<int>(j), vars_[j].objective});
  }
  if (!vars_.empty()) write_terms(out, obj, vars_);
  out << "\nSubject To\n";
  for (const auto& r : rows_) {
    if (vars_.empty()) break;
    const bool finite_lo = std::isfinite(r.lower);
    const bool finite_up = std::isfinite(r.upper);
    if (finite_lo && finite_up && r.lower == r.upper) {
      out << ' ' << r.name << ':';
      write_terms(out, r.terms, vars_);
      out << " = " << lp_number(r.upper) << '\n';
      continue;
    }
    if (finite_lo) {
      out << ' ' << r.name << (finite_up ? "_lo" : "") << ':';
      write_terms(out, r.terms, vars_);
      out << " >= " << lp_number(r.lower) << '\n';
    }
    if (finite_up) {
      out << ' ' << r.name << (finite_lo ? "_up" : "") << ':';
      write_terms(out, r.terms, vars_);
      out << " <= " << lp_number(r.upper) << '\n';
    }
  }
  out << "Bounds\n";
  for (const auto& v : vars_) {
    const bool lo = std::isfinite(v.lower);
    const bool up = std::isfinite(v.upper);
    if (!lo && !up) {
      out << ' ' << v.name << " free\n";
    } else {
      out << ' ' << (lo ? lp_number(v.lower) : "-inf") << " <= " << v.name
          << " <= " << (up ? lp_number(v.upper) : "+inf") << '\n';
    }
  }
  if (is_mip()) {
    out << "Generals\n";
    for (const auto& v : vars_) {
      if (v.type == VarType::kInteger) out << ' ' << v.name << '\n';
    }
  }
  out << "End\n";
  return out.str();
}

}  // namespace mpclear
