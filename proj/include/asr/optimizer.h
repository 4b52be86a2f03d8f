#ifndef ASR_OPTIMIZER_H
#define ASR_OPTIMIZER_H

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asr/netmodel.h"
#include "asr/posy.h"
#include "asr/telemetry.h"

namespace asr {

struct UserDemand {
  std::string id;
  NodeId client;
  double d_max_ms = 0;
  double b_min_mbps = 0;
  double b_max_mbps = 0;
  double weight = 1.0;
};

struct ProblemParams {
  double alpha = 1.0;
  double c_total = 0;
  double epsilon = 0;
  // Servers missing from the map get capacity 1.
  std::map<NodeId, double> server_capacity;
};

// Floor applied to an idle server's load so the objective monomial and the
// load posynomial stay defined.
inline constexpr double kMinServerLoad = 1e-9;

// Variable names used by the anycast instance.
std::string DelayVar(const std::string& user);
std::string EnergyVar(const std::string& user);
std::string LoadVar(const std::string& user);
std::string BandwidthVar(const std::string& user);
std::string ServerLoadVar(const NodeId& server);

// Objective sum_i alpha d_i c_i s_i / b_i with the families
//   load:   (1/r) sum_k load_k        <  u
//   energy: (1/C_total) sum_i c_i     <= u
//   delay:  d_i / d_max_i             <  u   (one per user)
//   bw_min: b_min_i / b_i             <= u   (one per user)
//   bw_max: b_i / b_max_i             <= u   (one per user)
// and u = 1.
GpInstance MakeAnycastInstance(const ProblemParams& params,
                               const std::vector<UserDemand>& users,
                               const NetworkGraph& graph);

// alpha * d * c * s / b. Throws kNonPositiveMetric.
double UserObjectiveTerm(const PathMetrics& metrics, double alpha);

struct ConstraintCheck {
  std::string label;
  std::string family;
  double lhs = 0;
  double bound = 1;
  Relation relation = Relation::kLessEqual;
  bool pass = false;
};

struct ConstraintReport {
  std::vector<ConstraintCheck> checks;  // in instance constraint order

  bool feasible() const;
  bool FamilyPasses(const std::string& family) const;
  std::vector<std::string> Violated() const;
  const ConstraintCheck* Find(const std::string& label) const;

  double load_average() const;
  double energy_ratio() const;
};

struct UserChoice {
  std::string user;
  Path path;
  NodeId server;
  PathMetrics metrics;
  double objective_term = 0;
};

struct Assignment {
  std::vector<UserChoice> choices;      // same order as the instance users
  std::map<NodeId, double> server_load;  // projected, every server present
  double total_objective = 0;
  ConstraintReport report;

  const UserChoice* Find(const std::string& user) const;
};

struct SolveOptions {
  // Measured load per server added to the projected load.
  std::map<NodeId, double> base_load;
  // Maximum number of joint assignments solve_exact may enumerate.
  std::size_t budget = 4096;
  EnumerateOptions enumerate;
};

// Builds the assignment for fixed per-user paths: metrics, projected loads
// (base + sum of weights / capacity), objective terms and constraint report.
Assignment EvaluateAssignment(const GpInstance& g, const NetworkGraph& graph,
                              const std::vector<UserDemand>& users,
                              const std::map<std::string, Path>& paths,
                              const SolveOptions& options = {});

// Re-evaluates every constraint of g at the assignment's paths and loads.
// Throws kIncompleteAssignment when a user of g has no choice.
ConstraintReport CheckFeasible(const Assignment& a, const GpInstance& g,
                               const NetworkGraph& graph);

// Global minimum over the cross product of per-user candidate paths. Ties go
// to the lexicographically smallest path-index vector. Throws
// InfeasibleError or Error(kBudgetExceeded).
Assignment SolveExact(const GpInstance& g, const NetworkGraph& graph,
                      const std::vector<UserDemand>& users,
                      const SolveOptions& options = {});

// Users in id order each take the feasible path with the smallest own term
// given loads from earlier picks. Throws InfeasibleError.
Assignment SolveGreedy(const GpInstance& g, const NetworkGraph& graph,
                       const std::vector<UserDemand>& users,
                       const SolveOptions& options = {});

// Exact when the joint assignment count fits the budget, else greedy.
Assignment Solve(const GpInstance& g, const NetworkGraph& graph,
                 const std::vector<UserDemand>& users,
                 const SolveOptions& options = {}, std::string* solver = nullptr);

std::size_t CountJointAssignments(const NetworkGraph& graph,
                                  const std::vector<UserDemand>& users,
                                  const EnumerateOptions& enumerate);

struct SweepRow {
  std::vector<double> u;
  bool feasible = false;
  std::string solver;
  std::string error;
  double objective = 0;
  std::map<NodeId, double> selection_fraction;  // every server present
  std::map<NodeId, double> router_energy;       // every router present
  std::optional<Assignment> assignment;
};

struct SweepReport {
  std::vector<std::string> labels;
  std::vector<NodeId> servers;
  std::vector<NodeId> routers;
  std::vector<SweepRow> rows;  // grid order
};

// Solves g perturbed by each u of the grid. Row failures are recorded in the
// row, never thrown. Rows run concurrently.
SweepReport SensitivitySweep(const GpInstance& g, const NetworkGraph& graph,
                             const std::vector<UserDemand>& users,
                             const std::vector<std::vector<double>>& u_grid,
                             const SolveOptions& options = {});

}  // namespace asr

#endif
