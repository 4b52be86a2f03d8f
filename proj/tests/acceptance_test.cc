// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "asr/cli.h"
#include "asr/config.h"
#include "asr/error.h"
#include "asr/netmodel.h"
#include "asr/optimizer.h"
#include "asr/posy.h"
#include "asr/sim.h"
#include "asr/telemetry.h"
#include "random_instances.h"

namespace {

using namespace asr;
using asr::testing::BruteForceOptimum;
using asr::testing::MakeRandomInstance;
using asr::testing::RandomInstance;
using asr::testing::RelativelyEqual;

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const std::string kConfigs = std::string(ASR_SOURCE_DIR) + "/configs/";

struct Outcome {
  bool pass = true;
  std::string detail;

  void Fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

// Random instances shared by criteria 1 and 2.
struct Case {
  RandomInstance inst;
  NetworkGraph graph;
  GpInstance g;
};

std::vector<Case> MakeCases(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::vector<Case> cases;
  for (std::size_t i = 0; i < n; ++i) {
    RandomInstance inst = MakeRandomInstance(rng, 3, 4);
    NetworkGraph graph = inst.Graph();
    GpInstance g = MakeAnycastInstance(inst.params, inst.users, graph);
    cases.push_back({std::move(inst), std::move(graph), std::move(g)});
  }
  return cases;
}

Outcome OracleEquivalence(const std::vector<Case>& cases) {
  Outcome o;
  std::size_t feasible = 0;
  auto start = Clock::now();
  for (const Case& c : cases) {
    testing::OracleResult oracle = BruteForceOptimum(c.inst, c.g.u);
    try {
      Assignment a = SolveExact(c.g, c.graph, c.inst.users, c.inst.Options());
      ++feasible;
      if (!oracle.feasible) {
        o.Fail("solver found an assignment the oracle rejects");
      } else if (!RelativelyEqual(oracle.objective, a.total_objective, 1e-12)) {
        o.Fail(Fmt("objective %.17g vs oracle %.17g", a.total_objective,
                   oracle.objective));
      }
    } catch (const InfeasibleError&) {
      if (oracle.feasible) o.Fail("solver reported infeasible, oracle did not");
    }
  }
  double elapsed = Seconds(start);
  if (elapsed >= 1.0) o.Fail(Fmt("took %.3f s", elapsed));
  if (o.pass) {
    o.detail = std::to_string(cases.size()) + " instances (" +
               std::to_string(feasible) + " feasible), " +
               Fmt("%.3f s", elapsed);
  }
  return o;
}

Outcome GreedyBound(const std::vector<Case>& cases) {
  Outcome o;
  std::size_t compared = 0;
  std::size_t single = 0;
  for (const Case& c : cases) {
    double exact = 0;
    try {
      exact = SolveExact(c.g, c.graph, c.inst.users, c.inst.Options())
                  .total_objective;
    } catch (const InfeasibleError&) {
      continue;
    }
    try {
      double greedy = SolveGreedy(c.g, c.graph, c.inst.users, c.inst.Options())
                          .total_objective;
      ++compared;
      if (greedy < exact) o.Fail(Fmt("greedy %.17g < exact %.17g", greedy, exact));
      if (c.inst.users.size() == 1) {
        ++single;
        if (greedy != exact) {
          o.Fail(Fmt("1-user greedy %.17g != exact %.17g", greedy, exact));
        }
      }
    } catch (const InfeasibleError&) {
      // Greedy may miss a feasible joint assignment; only one user is exact.
      ++compared;
      if (c.inst.users.size() == 1) o.Fail("1-user greedy infeasible");
    }
  }
  if (single == 0) o.Fail("no feasible 1-user instance sampled");
  if (o.pass) {
    o.detail = std::to_string(compared) + " feasible instances, " +
               std::to_string(single) + " single-user";
  }
  return o;
}

Outcome PerturbationIdentity() {
  Outcome o;
  std::mt19937_64 rng(303);
  std::size_t feasible = 0;
  const std::size_t n = 200;
  for (std::size_t i = 0; i < n; ++i) {
    RandomInstance inst = MakeRandomInstance(rng);
    NetworkGraph graph = inst.Graph();
    GpInstance g = MakeAnycastInstance(inst.params, inst.users, graph);
    GpInstance p = Perturb(g, std::vector<double>(g.u.size(), 1.0));
    bool base_ok = true;
    bool pert_ok = true;
    Assignment a, b;
    try {
      a = SolveExact(g, graph, inst.users, inst.Options());
    } catch (const InfeasibleError&) {
      base_ok = false;
    }
    try {
      b = SolveExact(p, graph, inst.users, inst.Options());
    } catch (const InfeasibleError&) {
      pert_ok = false;
    }
    if (base_ok != pert_ok) {
      o.Fail("feasibility differs under p(1)");
      continue;
    }
    if (!base_ok) continue;
    ++feasible;
    if (a.total_objective != b.total_objective) o.Fail("objective differs");
    for (std::size_t k = 0; k < a.choices.size(); ++k) {
      if (a.choices[k].path != b.choices[k].path) o.Fail("assignment differs");
    }
  }
  if (o.pass) {
    o.detail = std::to_string(n) + " instances, " + std::to_string(feasible) +
               " feasible, bit-identical";
  }
  return o;
}

Outcome PerturbationMonotonicity() {
  Outcome o;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> base(0.7, 1.3);
  std::uniform_real_distribution<double> grow(1.0, 1.5);
  std::size_t both = 0;
  std::size_t samples = 0;
  for (int trial = 0; trial < 300; ++trial) {
    RandomInstance inst = MakeRandomInstance(rng);
    NetworkGraph graph = inst.Graph();
    GpInstance g = MakeAnycastInstance(inst.params, inst.users, graph);
    std::vector<double> u, up;
    for (std::size_t i = 0; i < g.u.size(); ++i) {
      u.push_back(base(rng));
      up.push_back(u.back() * grow(rng));
    }
    GpInstance gu = Perturb(g, u);
    GpInstance gup = Perturb(g, up);

    // Sampled inclusion of feasible sets.
    std::vector<std::vector<Path>> candidates;
    for (const UserDemand& user : inst.users) {
      candidates.push_back(EnumeratePaths(graph, user.client));
    }
    for (int s = 0; s < 20; ++s) {
      std::map<std::string, Path> paths;
      for (std::size_t i = 0; i < inst.users.size(); ++i) {
        paths[inst.users[i].id] = candidates[i][rng() % candidates[i].size()];
      }
      ++samples;
      bool in_u = EvaluateAssignment(gu, graph, inst.users, paths,
                                     inst.Options())
                      .report.feasible();
      bool in_up = EvaluateAssignment(gup, graph, inst.users, paths,
                                      inst.Options())
                       .report.feasible();
      if (in_u && !in_up) o.Fail("point feasible at u but not at u'");
    }

    double obj_u = 0, obj_up = 0;
    bool ok_u = true, ok_up = true;
    try {
      obj_u = SolveExact(gu, graph, inst.users, inst.Options()).total_objective;
    } catch (const InfeasibleError&) {
      ok_u = false;
    }
    try {
      obj_up = SolveExact(gup, graph, inst.users, inst.Options()).total_objective;
    } catch (const InfeasibleError&) {
      ok_up = false;
    }
    if (ok_u && !ok_up) o.Fail("optimum lost when loosening");
    if (ok_u && ok_up) {
      ++both;
      if (obj_up > obj_u) o.Fail(Fmt("objective rose %.17g -> %.17g", obj_u, obj_up));
    }
  }
  if (o.pass) {
    o.detail = std::to_string(samples) + " sampled points, " +
               std::to_string(both) + " instance pairs both feasible";
  }
  return o;
}

Scenario Load(const std::string& name) {
  return BuildScenario(LoadConfigFile(kConfigs + name));
}

SimStats Simulate(const Scenario& s, const std::string& perturbation) {
  GpInstance g = Perturb(s.instance, s.Perturbation(perturbation));
  return RunSimulation(s.graph, g, s.users, s.sim);
}

Outcome SymmetricSplit() {
  Outcome o;
  auto start = Clock::now();
  Scenario s = Load("symmetric.conf");
  SimStats stats = Simulate(s, "baseline");
  double elapsed = Seconds(start);
  std::map<NodeId, double> f = stats.SelectionFractions();
  if (stats.served_requests < 1000) o.Fail("fewer than 1000 requests served");
  for (const auto& [server, fraction] : f) {
    if (std::fabs(fraction - 0.5) > 0.1) {
      o.Fail(server + Fmt(" fraction %.4f", fraction));
    }
  }
  if (elapsed >= 10.0) o.Fail(Fmt("took %.3f s", elapsed));
  if (o.pass) {
    o.detail = Fmt("S_A %.4f, S_B %.4f", f.at("S_A"), f.at("S_B")) + " over " +
               std::to_string(stats.served_requests) + " requests, " +
               Fmt("%.2f s", elapsed);
  }
  return o;
}

double MaxFraction(const SimStats& stats) {
  double m = 0;
  for (const auto& [server, f] : stats.SelectionFractions()) m = std::max(m, f);
  return m;
}

Outcome SkewUnderTightening(const SimStats& base, const SimStats& tight) {
  Outcome o;
  double b = MaxFraction(base);
  double t = MaxFraction(tight);
  if (!(t > b)) o.Fail(Fmt("max fraction %.4f -> %.4f", b, t));
  if (o.pass) o.detail = Fmt("max selection fraction %.4f -> %.4f", b, t);
  return o;
}

Outcome EnergyShift(const SimStats& base, const SimStats& tight) {
  Outcome o;
  auto sum = [](const SimStats& s, const char* x, const char* y) {
    return s.ledger.Energy(x) + s.ledger.Energy(y);
  };
  double b14 = sum(base, "R1", "R4"), t14 = sum(tight, "R1", "R4");
  double b23 = sum(base, "R2", "R3"), t23 = sum(tight, "R2", "R3");
  if (!(t14 > b14)) o.Fail(Fmt("R1+R4 %.0f -> %.0f", b14, t14));
  if (t23 > b23) o.Fail(Fmt("R2+R3 %.0f -> %.0f", b23, t23));
  if (o.pass) {
    o.detail = Fmt("R1+R4 %.0f -> %.0f, ", b14, t14) +
               Fmt("R2+R3 %.0f -> %.0f", b23, t23);
  }
  return o;
}

Outcome MetricProperties() {
  Outcome o;
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> value(0.1, 100);
  const int kPaths = 10000;
  for (int trial = 0; trial < kPaths; ++trial) {
    const std::size_t hops = 1 + rng() % 8;
    std::vector<Node> nodes{{"C", NodeRole::kClient}};
    for (std::size_t h = 1; h < hops; ++h) {
      nodes.push_back({"R" + std::to_string(h), NodeRole::kRouter});
    }
    nodes.push_back({"S", NodeRole::kServer});
    std::vector<Link> links;
    Path path;
    for (const Node& n : nodes) path.push_back(n.id);
    double delay = 0, energy = 0, bw = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h + 1 < path.size(); ++h) {
      Link link{path[h], path[h + 1], value(rng), value(rng), value(rng)};
      delay += link.delay_ms;
      energy += link.energy;
      bw = std::min(bw, link.bandwidth_mbps);
      links.push_back(link);
    }
    NetworkGraph graph(nodes, links);
    if (!RelativelyEqual(delay, PathDelay(path, graph), 1e-12)) o.Fail("delay");
    if (!RelativelyEqual(energy, PathEnergy(path, graph), 1e-12)) o.Fail("energy");
    if (PathBandwidth(path, graph) != bw) o.Fail("bandwidth min");

    // Same hop attributes in shuffled order along the chain.
    std::vector<Link> shuffled = links;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (std::size_t h = 0; h < shuffled.size(); ++h) {
      shuffled[h].src = path[h];
      shuffled[h].dst = path[h + 1];
    }
    NetworkGraph permuted(nodes, shuffled);
    if (PathBandwidth(path, permuted) != bw) o.Fail("bandwidth permutation");
    if (!RelativelyEqual(delay, PathDelay(path, permuted), 1e-12)) {
      o.Fail("delay permutation");
    }

    // Split additivity at a random interior node.
    if (path.size() > 2) {
      std::size_t cut = 1 + rng() % (path.size() - 2);
      Path head(path.begin(), path.begin() + cut + 1);
      Path tail(path.begin() + cut, path.end());
      if (!RelativelyEqual(PathDelay(head, graph) + PathDelay(tail, graph),
                           PathDelay(path, graph), 1e-12)) {
        o.Fail("delay split additivity");
      }
      if (std::min(PathBandwidth(head, graph), PathBandwidth(tail, graph)) != bw) {
        o.Fail("bandwidth split composition");
      }
    }
  }

  std::uniform_real_distribution<double> coef(0.01, 100);
  std::uniform_real_distribution<double> expo(-3, 3);
  std::uniform_real_distribution<double> logx(-3, 3);
  double worst = 0;
  for (int trial = 0; trial < kPaths; ++trial) {
    Posynomial p;
    const std::size_t terms = 1 + rng() % 5;
    VariableValues x, y;
    for (const char* v : {"a", "b", "c"}) {
      y[v] = logx(rng);
      x[v] = std::exp(y[v]);
    }
    for (std::size_t t = 0; t < terms; ++t) {
      Monomial m;
      m.coefficient = coef(rng);
      for (const char* v : {"a", "b", "c"}) {
        if (rng() % 2) m.exponents[v] = expo(rng);
      }
      p.terms.push_back(m);
    }
    double direct = std::log(EvalPosynomial(p, x));
    double via_lse = LogEvalPosynomial(p, y);
    double rel = std::fabs(direct - via_lse) /
                 std::max(std::fabs(direct), std::numeric_limits<double>::min());
    if (direct != via_lse) worst = std::max(worst, rel);
    if (!RelativelyEqual(std::exp(direct), std::exp(via_lse), 1e-9)) {
      o.Fail(Fmt("log-space mismatch %.17g vs %.17g", direct, via_lse));
    }
  }
  if (o.pass) {
    o.detail = "10000 paths, 10000 posynomials; worst log-space relative gap " +
               Fmt("%.2e", worst);
  }
  return o;
}

Outcome EwmaAndClassification() {
  Outcome o;
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> level(0, 100);
  std::uniform_real_distribution<double> gap(-1, 1);
  const double beta = 0.9;
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = level(rng);
    const double init = std::max(0.0, x + gap(rng));
    // A far start is checked against the geometric envelope instead.
    const double far = level(rng);
    DelayEstimator near_est = DelayEstimator::Seeded(init, init, beta);
    DelayEstimator far_est = DelayEstimator::Seeded(far, far, beta);
    for (int k = 1; k <= 200; ++k) {
      near_est = EwmaUpdate(near_est, x);
      far_est = EwmaUpdate(far_est, x);
      if (std::fabs(far_est.long_term_ms - x) >
          std::pow(beta, k) * std::fabs(far - x) + 1e-9) {
        o.Fail("geometric envelope exceeded");
      }
    }
    worst = std::max(worst, std::fabs(near_est.long_term_ms - x));
  }
  if (worst > 1e-9) o.Fail(Fmt("|long_term - x| = %.3e after 200 steps", worst));

  std::uniform_int_distribution<int> coarse(0, 20);
  for (int trial = 0; trial < 10000; ++trial) {
    // Coarse grid half the time so equal pairs are exercised.
    double a = trial % 2 ? level(rng) : coarse(rng);
    double b = trial % 2 ? level(rng) : coarse(rng);
    QueueClass ab = ClassifyPacket(DelayEstimator::Seeded(a, b));
    QueueClass ba = ClassifyPacket(DelayEstimator::Seeded(b, a));
    bool ok = (ab == QueueClass::kExpedited && ba == QueueClass::kDeferred) ||
              (ab == QueueClass::kDeferred && ba == QueueClass::kExpedited) ||
              (ab == QueueClass::kNormal && ba == QueueClass::kNormal);
    if (!ok) o.Fail(Fmt("classification not antisymmetric at (%g, %g)", a, b));
    if ((ab == QueueClass::kNormal) != (a == b)) o.Fail("normal iff equal");
  }
  if (o.pass) {
    o.detail = Fmt("worst |long_term - x| %.2e after 200 steps; 10000 pairs",
                   worst);
  }
  return o;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome Determinism() {
  Outcome o;
  fs::path root = fs::temp_directory_path() / "asr_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  std::string trace = (root / "trace.csv").string();
  std::ofstream(trace) << "time_ms,target,field,value\n"
                          "20000,R1->R4,delay,1.4\n"
                          "40000,S_A,processing_delay,3\n";
  std::ostringstream out, err;
  for (const char* run : {"run1", "run2"}) {
    cli::SimulateArgs args{kConfigs + "asymmetric.conf", {trace}, 7, "tight",
                           (root / run).string()};
    if (cli::RunSimulate(args, out, err) != cli::kExitOk) {
      o.Fail("simulate failed: " + err.str());
      return o;
    }
  }
  std::size_t files = 0;
  std::size_t bytes = 0;
  for (const auto& entry : fs::directory_iterator(root / "run1")) {
    std::string a = Slurp(entry.path());
    std::string b = Slurp(root / "run2" / entry.path().filename());
    if (a != b) o.Fail(entry.path().filename().string() + " differs");
    ++files;
    bytes += a.size();
  }
  fs::remove_all(root);
  if (files < 5) o.Fail("missing output files");
  if (o.pass) {
    o.detail = std::to_string(files) + " files, " + std::to_string(bytes) +
               " bytes identical";
  }
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.Fail(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::printf("%s [%2d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str());
    std::fflush(stdout);
  };

  std::vector<Case> cases = MakeCases(101, 200);
  report(1, "exact solver matches brute-force oracle",
         [&] { return OracleEquivalence(cases); });
  report(2, "greedy objective bounds exact from above",
         [&] { return GreedyBound(cases); });
  report(3, "unit perturbation reproduces the unperturbed solve",
         PerturbationIdentity);
  report(4, "loosening grows the feasible set and lowers the optimum",
         PerturbationMonotonicity);
  report(5, "symmetric routes split selection evenly", SymmetricSplit);

  SimStats base, tight;
  bool sims_ok = true;
  try {
    Scenario s = Load("asymmetric.conf");
    base = Simulate(s, "baseline");
    tight = Simulate(s, "tight");
  } catch (const std::exception& e) {
    std::printf("asymmetric scenario failed: %s\n", e.what());
    sims_ok = false;
  }
  report(6, "tightening load and delay skews server selection", [&] {
    Outcome o;
    if (!sims_ok) o.Fail("simulation error");
    return sims_ok ? SkewUnderTightening(base, tight) : o;
  });
  report(7, "tightening shifts router energy toward the short route", [&] {
    Outcome o;
    if (!sims_ok) o.Fail("simulation error");
    return sims_ok ? EnergyShift(base, tight) : o;
  });
  report(8, "path metric composition and log-space evaluation",
         MetricProperties);
  report(9, "EWMA convergence and classification antisymmetry",
         EwmaAndClassification);
  report(10, "simulation output is byte-reproducible", Determinism);

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
