#include "asr/optimizer.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <set>

#include "asr/error.h"

namespace asr {

std::string DelayVar(const std::string& user) { return "d[" + user + "]"; }
std::string EnergyVar(const std::string& user) { return "c[" + user + "]"; }
std::string LoadVar(const std::string& user) { return "s[" + user + "]"; }
std::string BandwidthVar(const std::string& user) { return "b[" + user + "]"; }
std::string ServerLoadVar(const NodeId& server) {
  return "load[" + server + "]";
}

namespace {

Monomial Mono(double coefficient, std::map<std::string, double> exponents) {
  return Monomial{coefficient, std::move(exponents)};
}

}  // namespace

GpInstance MakeAnycastInstance(const ProblemParams& params,
                               const std::vector<UserDemand>& users,
                               const NetworkGraph& graph) {
  GpInstance g;
  GpParameters& p = g.params;
  p.alpha = params.alpha;
  p.c_total = params.c_total;
  p.epsilon = params.epsilon;
  p.servers = graph.NodesWithRole(NodeRole::kServer);
  for (const auto& [server, capacity] : params.server_capacity) {
    if (!graph.HasNode(server) || graph.Role(server) != NodeRole::kServer) {
      throw Error(ErrorCode::kInvalidConfig,
                  "capacity given for unknown server '" + server + "'");
    }
  }
  for (const NodeId& server : p.servers) {
    auto it = params.server_capacity.find(server);
    p.server_capacity[server] =
        it == params.server_capacity.end() ? 1.0 : it->second;
  }

  std::set<std::string> ids;
  for (const UserDemand& user : users) {
    if (!ids.insert(user.id).second) {
      throw Error(ErrorCode::kInvalidConfig,
                  "duplicate user id '" + user.id + "'");
    }
    if (!graph.HasNode(user.client) ||
        graph.Role(user.client) != NodeRole::kClient) {
      throw Error(ErrorCode::kInvalidConfig, "user " + user.id +
                                                 ": '" + user.client +
                                                 "' is not a client node");
    }
    p.users.push_back(
        UserBounds{user.id, user.d_max_ms, user.b_min_mbps, user.b_max_mbps});
    g.objective.terms.push_back(Mono(p.alpha, {{DelayVar(user.id), 1},
                                               {EnergyVar(user.id), 1},
                                               {LoadVar(user.id), 1},
                                               {BandwidthVar(user.id), -1}}));
  }

  const double r = static_cast<double>(p.servers.size());
  Constraint load{"load", "load", {}, Relation::kLess};
  for (const NodeId& server : p.servers) {
    load.lhs.terms.push_back(Mono(1.0 / r, {{ServerLoadVar(server), 1}}));
  }
  g.constraints.push_back(std::move(load));

  Constraint energy{"energy", "energy", {}, Relation::kLessEqual};
  for (const UserDemand& user : users) {
    energy.lhs.terms.push_back(
        Mono(1.0 / params.c_total, {{EnergyVar(user.id), 1}}));
  }
  if (!energy.lhs.terms.empty()) g.constraints.push_back(std::move(energy));

  for (const UserDemand& user : users) {
    g.constraints.push_back(
        {"delay[" + user.id + "]", "delay",
         Posynomial{{Mono(1.0 / user.d_max_ms, {{DelayVar(user.id), 1}})}},
         Relation::kLess});
    g.constraints.push_back(
        {"bw_min[" + user.id + "]", "bw_min",
         Posynomial{{Mono(user.b_min_mbps, {{BandwidthVar(user.id), -1}})}},
         Relation::kLessEqual});
    g.constraints.push_back(
        {"bw_max[" + user.id + "]", "bw_max",
         Posynomial{{Mono(1.0 / user.b_max_mbps, {{BandwidthVar(user.id), 1}})}},
         Relation::kLessEqual});
  }
  g.u.assign(g.constraints.size(), 1.0);
  return g;
}

double UserObjectiveTerm(const PathMetrics& m, double alpha) {
  if (!(m.delay_ms > 0) || !(m.energy > 0) || !(m.server_load > 0) ||
      !(m.bandwidth_mbps > 0)) {
    throw Error(ErrorCode::kNonPositiveMetric,
                "objective term needs positive delay, energy, load and "
                "bandwidth");
  }
  if (!(alpha > 0)) {
    throw Error(ErrorCode::kNonPositiveMetric, "alpha must be positive");
  }
  return alpha * (m.delay_ms * m.energy * m.server_load / m.bandwidth_mbps);
}

bool ConstraintReport::feasible() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ConstraintCheck& c) { return c.pass; });
}

bool ConstraintReport::FamilyPasses(const std::string& family) const {
  return std::all_of(checks.begin(), checks.end(),
                     [&](const ConstraintCheck& c) {
                       return c.family != family || c.pass;
                     });
}

std::vector<std::string> ConstraintReport::Violated() const {
  std::vector<std::string> out;
  for (const ConstraintCheck& c : checks) {
    if (!c.pass) out.push_back(c.label);
  }
  return out;
}

const ConstraintCheck* ConstraintReport::Find(const std::string& label) const {
  for (const ConstraintCheck& c : checks) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

double ConstraintReport::load_average() const {
  const ConstraintCheck* c = Find("load");
  return c == nullptr ? 0.0 : c->lhs;
}

double ConstraintReport::energy_ratio() const {
  const ConstraintCheck* c = Find("energy");
  return c == nullptr ? 0.0 : c->lhs;
}

const UserChoice* Assignment::Find(const std::string& user) const {
  for (const UserChoice& c : choices) {
    if (c.user == user) return &c;
  }
  return nullptr;
}

namespace {

struct Candidate {
  Path path;
  std::size_t server = 0;  // index into the instance server list
  double delay_ms = 0;
  double bandwidth_mbps = 0;
  double energy = 0;
};

// Sum of the terms whose variables are all bound. Equals EvalPosynomial when
// every variable is present.
double PartialEval(const Posynomial& p, const VariableValues& values) {
  double sum = 0;
  for (const Monomial& term : p.terms) {
    bool bound = std::all_of(
        term.exponents.begin(), term.exponents.end(),
        [&](const auto& entry) { return values.count(entry.first) != 0; });
    if (bound) sum += EvalMonomial(term, values);
  }
  return sum;
}

// Per-solve view of an instance: users, their candidates and the coupling
// through server load.
class Problem {
 public:
  Problem(const GpInstance& g, const NetworkGraph& graph,
          const std::vector<UserDemand>& users, const SolveOptions& options)
      : g_(g), graph_(graph), users_(users) {
    if (users.size() != g.params.users.size()) {
      throw Error(ErrorCode::kIncompleteAssignment,
                  "instance has " + std::to_string(g.params.users.size()) +
                      " users, got " + std::to_string(users.size()));
    }
    for (std::size_t i = 0; i < users.size(); ++i) {
      if (users[i].id != g.params.users[i].user) {
        throw Error(ErrorCode::kIncompleteAssignment,
                    "user '" + users[i].id + "' does not match instance user '" +
                        g.params.users[i].user + "'");
      }
    }
    for (std::size_t k = 0; k < g.params.servers.size(); ++k) {
      const NodeId& server = g.params.servers[k];
      server_index_[server] = k;
      auto cap = g.params.server_capacity.find(server);
      capacity_.push_back(cap == g.params.server_capacity.end() ? 1.0
                                                                : cap->second);
      auto base = options.base_load.find(server);
      base_load_.push_back(base == options.base_load.end() ? 0.0
                                                           : base->second);
    }
  }

  std::size_t num_users() const { return users_.size(); }
  const UserDemand& user(std::size_t i) const { return users_[i]; }

  Candidate MakeCandidate(const Path& path) const {
    ValidatePath(path, graph_);
    auto it = server_index_.find(path.back());
    if (it == server_index_.end()) {
      throw Error(ErrorCode::kInvalidPath,
                  "'" + path.back() + "' is not a server of the instance");
    }
    Candidate c;
    c.path = path;
    c.server = it->second;
    c.delay_ms = PathDelay(path, graph_);
    c.bandwidth_mbps = PathBandwidth(path, graph_);
    c.energy = PathEnergy(path, graph_);
    return c;
  }

  std::vector<Candidate> Candidates(std::size_t i,
                                    const EnumerateOptions& enumerate) const {
    std::vector<Candidate> out;
    for (const Path& path : EnumeratePaths(graph_, users_[i].client, enumerate)) {
      out.push_back(MakeCandidate(path));
    }
    return out;
  }

  // Loads with only the non-null picks applied.
  std::vector<double> Loads(const std::vector<const Candidate*>& picks) const {
    std::vector<double> loads = base_load_;
    for (std::size_t i = 0; i < picks.size(); ++i) {
      if (picks[i] == nullptr) continue;
      loads[picks[i]->server] += users_[i].weight / capacity_[picks[i]->server];
    }
    for (double& load : loads) load = std::max(load, kMinServerLoad);
    return loads;
  }

  PathMetrics Metrics(const Candidate& c,
                      const std::vector<double>& loads) const {
    return PathMetrics{c.delay_ms, c.bandwidth_mbps, c.energy, loads[c.server]};
  }

  VariableValues Values(const std::vector<const Candidate*>& picks,
                        const std::vector<double>& loads) const {
    VariableValues values;
    for (std::size_t k = 0; k < loads.size(); ++k) {
      values[ServerLoadVar(g_.params.servers[k])] = loads[k];
    }
    for (std::size_t i = 0; i < picks.size(); ++i) {
      if (picks[i] == nullptr) continue;
      const std::string& id = users_[i].id;
      values[DelayVar(id)] = picks[i]->delay_ms;
      values[EnergyVar(id)] = picks[i]->energy;
      values[LoadVar(id)] = loads[picks[i]->server];
      values[BandwidthVar(id)] = picks[i]->bandwidth_mbps;
    }
    return values;
  }

  ConstraintReport Report(const VariableValues& values, bool partial) const {
    ConstraintReport report;
    report.checks.reserve(g_.constraints.size());
    for (std::size_t j = 0; j < g_.constraints.size(); ++j) {
      const Constraint& c = g_.constraints[j];
      ConstraintCheck check;
      check.label = c.label;
      check.family = c.family;
      check.lhs = partial ? PartialEval(c.lhs, values)
                          : EvalPosynomial(c.lhs, values);
      check.bound = g_.u[j];
      check.relation = c.relation;
      check.pass =
          ConstraintHolds(check.lhs, check.bound, c.relation, g_.params.epsilon);
      report.checks.push_back(std::move(check));
    }
    return report;
  }

  Assignment Build(const std::vector<const Candidate*>& picks) const {
    Assignment a;
    std::vector<double> loads = Loads(picks);
    for (std::size_t k = 0; k < loads.size(); ++k) {
      a.server_load[g_.params.servers[k]] = loads[k];
    }
    for (std::size_t i = 0; i < picks.size(); ++i) {
      UserChoice choice;
      choice.user = users_[i].id;
      choice.path = picks[i]->path;
      choice.server = picks[i]->path.back();
      choice.metrics = Metrics(*picks[i], loads);
      choice.objective_term = UserObjectiveTerm(choice.metrics, g_.params.alpha);
      a.total_objective += choice.objective_term;
      a.choices.push_back(std::move(choice));
    }
    a.report = Report(Values(picks, loads), false);
    return a;
  }

 private:
  const GpInstance& g_;
  const NetworkGraph& graph_;
  const std::vector<UserDemand>& users_;
  std::map<NodeId, std::size_t> server_index_;
  std::vector<double> capacity_;
  std::vector<double> base_load_;
};

// Tracks the infeasible candidate closest to feasibility.
struct NearestMiss {
  std::size_t violations = std::numeric_limits<std::size_t>::max();
  std::vector<std::string> labels;

  void Offer(const ConstraintReport& report) {
    std::vector<std::string> violated = report.Violated();
    if (violated.size() < violations) {
      violations = violated.size();
      labels = std::move(violated);
    }
  }
};

std::string JoinLabels(const std::vector<std::string>& labels) {
  std::string out;
  for (const std::string& label : labels) {
    if (!out.empty()) out += ", ";
    out += label;
  }
  return out;
}

}  // namespace

Assignment EvaluateAssignment(const GpInstance& g, const NetworkGraph& graph,
                              const std::vector<UserDemand>& users,
                              const std::map<std::string, Path>& paths,
                              const SolveOptions& options) {
  Problem problem(g, graph, users, options);
  std::vector<Candidate> chosen;
  chosen.reserve(users.size());
  for (const UserDemand& user : users) {
    auto it = paths.find(user.id);
    if (it == paths.end()) {
      throw Error(ErrorCode::kIncompleteAssignment,
                  "no path for user '" + user.id + "'");
    }
    chosen.push_back(problem.MakeCandidate(it->second));
  }
  std::vector<const Candidate*> picks;
  for (const Candidate& c : chosen) picks.push_back(&c);
  return problem.Build(picks);
}

ConstraintReport CheckFeasible(const Assignment& a, const GpInstance& g,
                               const NetworkGraph& graph) {
  VariableValues values;
  for (const NodeId& server : g.params.servers) {
    auto it = a.server_load.find(server);
    double load = it == a.server_load.end() ? 0.0 : it->second;
    values[ServerLoadVar(server)] = std::max(load, kMinServerLoad);
  }
  for (const UserBounds& user : g.params.users) {
    const UserChoice* choice = a.Find(user.user);
    if (choice == nullptr) {
      throw Error(ErrorCode::kIncompleteAssignment,
                  "assignment has no choice for user '" + user.user + "'");
    }
    if (choice->path.empty() || choice->path.back() != choice->server) {
      throw Error(ErrorCode::kInvalidPath, "path of user '" + user.user +
                                               "' does not end at its server");
    }
    auto load = values.find(ServerLoadVar(choice->server));
    if (load == values.end()) {
      throw Error(ErrorCode::kInvalidPath,
                  "'" + choice->server + "' is not a server of the instance");
    }
    values[DelayVar(user.user)] = PathDelay(choice->path, graph);
    values[EnergyVar(user.user)] = PathEnergy(choice->path, graph);
    values[LoadVar(user.user)] = load->second;
    values[BandwidthVar(user.user)] = PathBandwidth(choice->path, graph);
  }

  ConstraintReport report;
  for (std::size_t j = 0; j < g.constraints.size(); ++j) {
    const Constraint& c = g.constraints[j];
    ConstraintCheck check{c.label, c.family, EvalPosynomial(c.lhs, values),
                          g.u[j], c.relation, false};
    check.pass =
        ConstraintHolds(check.lhs, check.bound, c.relation, g.params.epsilon);
    report.checks.push_back(std::move(check));
  }
  return report;
}

std::size_t CountJointAssignments(const NetworkGraph& graph,
                                  const std::vector<UserDemand>& users,
                                  const EnumerateOptions& enumerate) {
  std::size_t total = 1;
  for (const UserDemand& user : users) {
    std::size_t n = EnumeratePaths(graph, user.client, enumerate).size();
    if (total > std::numeric_limits<std::size_t>::max() / n) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= n;
  }
  return total;
}

Assignment SolveExact(const GpInstance& g, const NetworkGraph& graph,
                      const std::vector<UserDemand>& users,
                      const SolveOptions& options) {
  Problem problem(g, graph, users, options);
  const std::size_t n = problem.num_users();
  std::vector<std::vector<Candidate>> candidates;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    candidates.push_back(problem.Candidates(i, options.enumerate));
    if (total > options.budget / candidates.back().size()) {
      throw Error(ErrorCode::kBudgetExceeded,
                  "joint assignments exceed budget of " +
                      std::to_string(options.budget));
    }
    total *= candidates.back().size();
  }
  if (total > options.budget) {
    throw Error(ErrorCode::kBudgetExceeded,
                "joint assignments exceed budget of " +
                    std::to_string(options.budget));
  }

  // Odometer over index vectors with the first user most significant, so the
  // visiting order is lexicographic and strict improvement keeps the smallest
  // index vector among ties.
  std::vector<std::size_t> index(n, 0);
  std::vector<const Candidate*> picks(n);
  std::optional<std::vector<std::size_t>> best;
  double best_value = std::numeric_limits<double>::infinity();
  NearestMiss miss;
  for (std::size_t count = 0; count < total; ++count) {
    for (std::size_t i = 0; i < n; ++i) picks[i] = &candidates[i][index[i]];
    std::vector<double> loads = problem.Loads(picks);
    ConstraintReport report =
        problem.Report(problem.Values(picks, loads), false);
    if (report.feasible()) {
      // alpha only scales the objective, so the argmin is taken on the
      // alpha-free sum.
      double value = 0;
      for (std::size_t i = 0; i < n; ++i) {
        value += UserObjectiveTerm(problem.Metrics(*picks[i], loads), 1.0);
      }
      if (value < best_value) {
        best_value = value;
        best = index;
      }
    } else {
      miss.Offer(report);
    }
    for (std::size_t i = n; i-- > 0;) {
      if (++index[i] < candidates[i].size()) break;
      index[i] = 0;
    }
  }

  if (!best) {
    throw InfeasibleError("no assignment satisfies the constraints; closest "
                          "candidate violates " +
                              JoinLabels(miss.labels),
                          miss.labels);
  }
  for (std::size_t i = 0; i < n; ++i) picks[i] = &candidates[i][(*best)[i]];
  return problem.Build(picks);
}

Assignment SolveGreedy(const GpInstance& g, const NetworkGraph& graph,
                       const std::vector<UserDemand>& users,
                       const SolveOptions& options) {
  Problem problem(g, graph, users, options);
  const std::size_t n = problem.num_users();
  std::vector<std::vector<Candidate>> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    candidates.push_back(problem.Candidates(i, options.enumerate));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return problem.user(a).id < problem.user(b).id;
  });

  std::vector<const Candidate*> picks(n, nullptr);
  for (std::size_t i : order) {
    const Candidate* best = nullptr;
    double best_value = std::numeric_limits<double>::infinity();
    NearestMiss miss;
    for (const Candidate& candidate : candidates[i]) {
      picks[i] = &candidate;
      std::vector<double> loads = problem.Loads(picks);
      ConstraintReport report =
          problem.Report(problem.Values(picks, loads), true);
      if (!report.feasible()) {
        miss.Offer(report);
        continue;
      }
      double value = UserObjectiveTerm(problem.Metrics(candidate, loads), 1.0);
      if (value < best_value) {
        best_value = value;
        best = &candidate;
      }
    }
    if (best == nullptr) {
      throw InfeasibleError("user '" + problem.user(i).id +
                                "' has no feasible path given earlier picks; "
                                "closest candidate violates " +
                                JoinLabels(miss.labels),
                            miss.labels);
    }
    picks[i] = best;
  }

  Assignment a = problem.Build(picks);
  if (!a.report.feasible()) {
    std::vector<std::string> violated = a.report.Violated();
    throw InfeasibleError("greedy assignment violates " + JoinLabels(violated),
                          violated);
  }
  return a;
}

Assignment Solve(const GpInstance& g, const NetworkGraph& graph,
                 const std::vector<UserDemand>& users,
                 const SolveOptions& options, std::string* solver) {
  if (CountJointAssignments(graph, users, options.enumerate) <= options.budget) {
    if (solver != nullptr) *solver = "exact";
    return SolveExact(g, graph, users, options);
  }
  if (solver != nullptr) *solver = "greedy";
  return SolveGreedy(g, graph, users, options);
}

namespace {

SweepRow SweepOne(const GpInstance& g, const NetworkGraph& graph,
                  const std::vector<UserDemand>& users,
                  const std::vector<double>& u, const SolveOptions& options,
                  const std::vector<NodeId>& servers,
                  const std::vector<NodeId>& routers) {
  SweepRow row;
  row.u = u;
  for (const NodeId& server : servers) row.selection_fraction[server] = 0;
  for (const NodeId& router : routers) row.router_energy[router] = 0;
  try {
    GpInstance perturbed = Perturb(g, u);
    Assignment a = Solve(perturbed, graph, users, options, &row.solver);
    EnergyLedger ledger(graph);
    for (const UserChoice& choice : a.choices) {
      row.selection_fraction[choice.server] += 1.0;
      ledger.Record(choice.path, graph);
    }
    if (!a.choices.empty()) {
      for (auto& [server, fraction] : row.selection_fraction) {
        fraction /= static_cast<double>(a.choices.size());
      }
    }
    for (const NodeId& router : routers) {
      row.router_energy[router] = ledger.Energy(router);
    }
    row.feasible = true;
    row.objective = a.total_objective;
    row.assignment = std::move(a);
  } catch (const Error& e) {
    row.feasible = false;
    row.error = e.what();
  }
  return row;
}

}  // namespace

SweepReport SensitivitySweep(const GpInstance& g, const NetworkGraph& graph,
                             const std::vector<UserDemand>& users,
                             const std::vector<std::vector<double>>& u_grid,
                             const SolveOptions& options) {
  SweepReport report;
  for (const Constraint& c : g.constraints) report.labels.push_back(c.label);
  report.servers = g.params.servers;
  report.routers = graph.NodesWithRole(NodeRole::kRouter);

  std::vector<std::future<SweepRow>> pending;
  pending.reserve(u_grid.size());
  for (const std::vector<double>& u : u_grid) {
    pending.push_back(std::async(std::launch::async, [&, u] {
      return SweepOne(g, graph, users, u, options, report.servers,
                      report.routers);
    }));
  }
  for (auto& row : pending) report.rows.push_back(row.get());
  return report;
}

}  // namespace asr
