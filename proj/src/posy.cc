#include "asr/posy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "asr/error.h"

namespace asr {

double EvalMonomial(const Monomial& m, const VariableValues& values) {
  double out = m.coefficient;
  for (const auto& [name, exponent] : m.exponents) {
    auto it = values.find(name);
    if (it == values.end()) {
      throw Error(ErrorCode::kMissingVariable, "no value for '" + name + "'");
    }
    if (!(it->second > 0)) {
      throw Error(ErrorCode::kNonPositiveValue,
                  "'" + name + "' = " + std::to_string(it->second));
    }
    if (exponent != 0) out *= std::pow(it->second, exponent);
  }
  return out;
}

double EvalPosynomial(const Posynomial& p, const VariableValues& values) {
  double sum = 0;
  for (const Monomial& term : p.terms) sum += EvalMonomial(term, values);
  return sum;
}

double LogEvalPosynomial(const Posynomial& p,
                         const VariableValues& log_values) {
  std::vector<double> exps;
  exps.reserve(p.terms.size());
  for (const Monomial& term : p.terms) {
    double e = std::log(term.coefficient);
    for (const auto& [name, exponent] : term.exponents) {
      auto it = log_values.find(name);
      if (it == log_values.end()) {
        throw Error(ErrorCode::kMissingVariable, "no value for '" + name + "'");
      }
      e += exponent * it->second;
    }
    exps.push_back(e);
  }
  if (exps.empty()) return -std::numeric_limits<double>::infinity();
  double top = *std::max_element(exps.begin(), exps.end());
  double acc = 0;
  for (double e : exps) acc += std::exp(e - top);
  return top + std::log(acc);
}

bool ConstraintHolds(double lhs, double bound, Relation relation,
                     double epsilon) {
  if (relation == Relation::kLess) return lhs < bound - epsilon;
  return lhs <= bound;
}

namespace {

void CheckTerms(const Posynomial& p, const std::string& what,
                ValidationReport* report) {
  if (p.terms.empty()) {
    report->violations.push_back(what + " has no terms");
  }
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    const Monomial& term = p.terms[i];
    if (!(term.coefficient > 0) || !std::isfinite(term.coefficient)) {
      report->violations.push_back(what + " term " + std::to_string(i) +
                                   " has non-positive coefficient " +
                                   std::to_string(term.coefficient));
    }
    for (const auto& [name, exponent] : term.exponents) {
      if (!std::isfinite(exponent)) {
        report->violations.push_back(what + " term " + std::to_string(i) +
                                     " has non-finite exponent on " + name);
      }
    }
  }
}

}  // namespace

ValidationReport ValidateStandardForm(const GpInstance& g) {
  ValidationReport report;
  CheckTerms(g.objective, "objective", &report);

  std::set<std::string> labels;
  for (const Constraint& c : g.constraints) {
    CheckTerms(c.lhs, "constraint '" + c.label + "'", &report);
    if (!labels.insert(c.label).second) {
      report.violations.push_back("duplicate constraint label '" + c.label +
                                  "'");
    }
  }
  if (g.constraints.empty()) {
    report.warnings.push_back("instance has no constraints");
  }
  if (g.u.size() != g.constraints.size()) {
    report.violations.push_back(
        "perturbation has " + std::to_string(g.u.size()) + " entries for " +
        std::to_string(g.constraints.size()) + " constraints");
  }
  for (std::size_t i = 0; i < g.u.size(); ++i) {
    if (!(g.u[i] > 0)) {
      report.violations.push_back("perturbation entry " + std::to_string(i) +
                                  " is not positive");
    }
  }

  const GpParameters& p = g.params;
  if (!(p.alpha > 0)) report.violations.push_back("alpha must be positive");
  if (!(p.c_total > 0)) report.violations.push_back("c_total must be positive");
  if (!(p.epsilon >= 0)) {
    report.violations.push_back("epsilon must be non-negative");
  }
  for (const UserBounds& user : p.users) {
    if (!(user.d_max_ms > 0)) {
      report.violations.push_back("user " + user.user +
                                  ": d_max must be positive");
    }
    if (!(user.b_min_mbps > 0) || !(user.b_min_mbps <= user.b_max_mbps)) {
      report.violations.push_back("user " + user.user +
                                  ": need 0 < b_min <= b_max");
    }
  }
  for (const auto& [server, capacity] : p.server_capacity) {
    if (!(capacity > 0)) {
      report.violations.push_back("server " + server +
                                  ": capacity must be positive");
    }
  }
  return report;
}

GpInstance Perturb(const GpInstance& g, std::vector<double> u) {
  if (u.size() != g.constraints.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "perturbation has " + std::to_string(u.size()) +
                    " entries for " + std::to_string(g.constraints.size()) +
                    " constraints");
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0) || !std::isfinite(u[i])) {
      throw Error(ErrorCode::kNonPositivePerturbation,
                  "entry for '" + g.constraints[i].label +
                      "' must be positive, got " + std::to_string(u[i]));
    }
  }
  GpInstance out = g;
  for (std::size_t i = 0; i < u.size(); ++i) out.u[i] = g.u[i] * u[i];
  return out;
}

std::vector<double> ResolvePerturbation(
    const GpInstance& g,
    const std::vector<std::pair<std::string, double>>& settings) {
  std::vector<double> u(g.constraints.size(), 1.0);
  for (const auto& [selector, value] : settings) {
    bool matched = false;
    for (std::size_t i = 0; i < g.constraints.size(); ++i) {
      const Constraint& c = g.constraints[i];
      if (selector == "*" || selector == c.family || selector == c.label) {
        u[i] = value;
        matched = true;
      }
    }
    if (!matched && !g.constraints.empty()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "perturbation selector '" + selector +
                      "' matches no constraint");
    }
  }
  return u;
}

}  // namespace asr
