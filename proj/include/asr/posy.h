#ifndef ASR_POSY_H
#define ASR_POSY_H

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "asr/netmodel.h"

namespace asr {

using VariableValues = std::map<std::string, double>;

// coefficient * prod(x_k ^ exponent_k).
struct Monomial {
  double coefficient = 1.0;
  std::map<std::string, double> exponents;
};

struct Posynomial {
  std::vector<Monomial> terms;
};

// Throws kMissingVariable / kNonPositiveValue.
double EvalMonomial(const Monomial& m, const VariableValues& values);
double EvalPosynomial(const Posynomial& p, const VariableValues& values);

// log f(exp(y)) via log-sum-exp, where log_values holds y = log x. Requires
// positive coefficients.
double LogEvalPosynomial(const Posynomial& p, const VariableValues& log_values);

// "<" constraints of the formulation are kept distinct from "<=" ones so that
// strictness can be enforced at the boundary.
enum class Relation { kLessEqual, kLess };

struct Constraint {
  std::string label;   // unique, e.g. "delay[u1]"
  std::string family;  // load, energy, delay, bw_min, bw_max
  Posynomial lhs;
  Relation relation = Relation::kLessEqual;
};

struct UserBounds {
  std::string user;
  double d_max_ms = 0;
  double b_min_mbps = 0;
  double b_max_mbps = 0;
};

struct GpParameters {
  double alpha = 1.0;
  double c_total = 0;
  // Strict constraints pass when lhs < u - epsilon.
  double epsilon = 0;
  std::vector<UserBounds> users;
  std::vector<NodeId> servers;
  std::map<NodeId, double> server_capacity;

  std::size_t num_users() const { return users.size(); }
  std::size_t num_servers() const { return servers.size(); }
};

// Objective plus constraints f_i(x) <= u_i; u == 1 is the unperturbed problem.
struct GpInstance {
  Posynomial objective;
  std::vector<Constraint> constraints;
  std::vector<double> u;
  GpParameters params;
};

bool ConstraintHolds(double lhs, double bound, Relation relation,
                     double epsilon);

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;

  bool valid() const { return violations.empty(); }
};

ValidationReport ValidateStandardForm(const GpInstance& g);

// Copy of g with each right-hand side scaled by u_i, so perturbing the
// unperturbed instance yields right-hand sides u and perturbations compose.
// Throws kDimensionMismatch / kNonPositivePerturbation.
GpInstance Perturb(const GpInstance& g, std::vector<double> u);

// Builds a u vector for g starting from all ones and applying each
// (selector, value) in order. A selector is "*", a family name or an exact
// constraint label. Throws kInvalidConfig for a selector matching nothing.
std::vector<double> ResolvePerturbation(
    const GpInstance& g,
    const std::vector<std::pair<std::string, double>>& settings);

}  // namespace asr

#endif
