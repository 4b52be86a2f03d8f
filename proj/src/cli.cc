#include "asr/cli.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "asr/config.h"
#include "asr/error.h"
#include "asr/sim.h"

namespace asr::cli {

namespace {

std::string Num(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

class Logger {
 public:
  explicit Logger(std::ostream& err) : err_(err), level_(LogLevelFromEnv()) {}

  void Info(const std::string& msg) const {
    if (level_ != LogLevel::kError) err_ << "[info] " << msg << "\n";
  }
  void Debug(const std::string& msg) const {
    if (level_ == LogLevel::kDebug) err_ << "[debug] " << msg << "\n";
  }
  void Error(const std::string& msg) const { err_ << "error: " << msg << "\n"; }

 private:
  std::ostream& err_;
  LogLevel level_;
};

int ExitFor(const asr::Error& e) {
  switch (e.code()) {
    case ErrorCode::kIo:
    case ErrorCode::kParse:
      return kExitIo;
    case ErrorCode::kInfeasible:
      return kExitInfeasible;
    default:
      return kExitInvalid;
  }
}

Scenario LoadScenario(const std::string& path, const Logger& log) {
  ConfigDocument doc = LoadConfigFile(path);
  log.Debug("parsed " + path + ": " + std::to_string(doc.nodes.size()) +
            " nodes, " + std::to_string(doc.links.size()) + " links, " +
            std::to_string(doc.users.size()) + " users");
  return BuildScenario(doc);
}

// Resolves a perturbation name; an unknown name is a usage error.
std::vector<double> NamedPerturbation(const Scenario& scenario,
                                      const std::string& name) {
  try {
    return scenario.Perturbation(name);
  } catch (const asr::Error& e) {
    throw asr::Error(ErrorCode::kParse, e.what());
  }
}

std::string CsvSafe(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n') ch = ';';
  }
  return s;
}

}  // namespace

LogLevel LogLevelFromEnv() {
  const char* env = std::getenv("ASR_LOG");
  if (env == nullptr) return LogLevel::kError;
  std::string value(env);
  if (value == "debug") return LogLevel::kDebug;
  if (value == "info") return LogLevel::kInfo;
  return LogLevel::kError;
}

std::string FormatConstraintReport(const ConstraintReport& report) {
  std::ostringstream out;
  char line[256];
  for (const ConstraintCheck& c : report.checks) {
    std::snprintf(line, sizeof(line), "  %-16s %14s %-2s %-10s %s\n",
                  c.label.c_str(), Num(c.lhs).c_str(),
                  c.relation == Relation::kLess ? "<" : "<=",
                  Num(c.bound).c_str(), c.pass ? "ok" : "VIOLATED");
    out << line;
  }
  return out.str();
}

std::string AssignmentCsv(const Assignment& a) {
  std::ostringstream out;
  out << "user,server,path,delay_ms,energy,bandwidth_mbps,server_load,"
         "objective_term\n";
  for (const UserChoice& c : a.choices) {
    out << c.user << "," << c.server << "," << PathToString(c.path) << ","
        << Num(c.metrics.delay_ms) << "," << Num(c.metrics.energy) << ","
        << Num(c.metrics.bandwidth_mbps) << "," << Num(c.metrics.server_load)
        << "," << Num(c.objective_term) << "\n";
  }
  return out.str();
}

std::map<std::string, Path> ReadAssignmentCsv(std::istream& in) {
  std::map<std::string, Path> paths;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 3) {
      throw asr::Error(ErrorCode::kParse,
                       "assignment csv line " + std::to_string(line_no));
    }
    Path path;
    std::istringstream nodes(cells[2]);
    std::string node;
    while (nodes >> node) path.push_back(node);
    paths[cells[0]] = std::move(path);
  }
  return paths;
}

int RunValidate(const std::string& config_path, std::ostream& out,
                std::ostream& err) {
  Logger log(err);
  try {
    ConfigDocument doc = LoadConfigFile(config_path);
    std::vector<std::string> issues = CheckConfig(doc);
    if (!issues.empty()) {
      out << "invalid: " << issues.size() << " problem(s)\n";
      for (const std::string& issue : issues) out << "  " << issue << "\n";
      return kExitInvalid;
    }
    Scenario scenario = BuildScenario(doc);
    ValidationReport report = ValidateStandardForm(scenario.instance);
    out << "valid: " << scenario.graph.nodes().size() << " nodes, "
        << scenario.graph.links().size() << " links, "
        << scenario.users.size() << " users, "
        << scenario.instance.constraints.size() << " constraints, "
        << scenario.perturbations.size() << " perturbations\n";
    for (const std::string& w : report.warnings) out << "  warning: " << w << "\n";
    return kExitOk;
  } catch (const asr::Error& e) {
    log.Error(e.what());
    return ExitFor(e);
  }
}

int RunSolve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  Logger log(err);
  try {
    Scenario scenario = LoadScenario(args.config_path, log);
    GpInstance g = Perturb(scenario.instance,
                           NamedPerturbation(scenario, args.perturbation));
    out << "instance: " << scenario.users.size() << " users, "
        << g.params.num_servers() << " servers, " << g.constraints.size()
        << " constraints, perturbation " << args.perturbation << "\n";

    std::string solver;
    Assignment a;
    try {
      a = Solve(g, scenario.graph, scenario.users, scenario.solve_options,
                &solver);
    } catch (const InfeasibleError& e) {
      out << "infeasible\nbinding constraints:\n";
      for (const std::string& label : e.binding_constraints()) {
        const Constraint* c = nullptr;
        std::size_t j = 0;
        for (; j < g.constraints.size(); ++j) {
          if (g.constraints[j].label == label) {
            c = &g.constraints[j];
            break;
          }
        }
        out << "  " << label;
        if (c != nullptr) out << " (bound " << Num(g.u[j]) << ")";
        out << "\n";
      }
      log.Info(e.what());
      return kExitInfeasible;
    }

    out << "solver: " << solver << "\n";
    for (const UserChoice& c : a.choices) {
      out << "user " << c.user << ": " << PathToString(c.path) << " (server "
          << c.server << ") delay=" << Num(c.metrics.delay_ms)
          << " energy=" << Num(c.metrics.energy)
          << " bandwidth=" << Num(c.metrics.bandwidth_mbps)
          << " load=" << Num(c.metrics.server_load)
          << " term=" << Num(c.objective_term) << "\n";
    }
    out << "objective: " << Num(a.total_objective) << "\n";
    out << "constraints:\n" << FormatConstraintReport(a.report);

    if (args.out_csv) {
      std::ofstream file(*args.out_csv, std::ios::binary);
      file << AssignmentCsv(a);
      if (!file) {
        throw asr::Error(ErrorCode::kIo, "cannot write '" + *args.out_csv + "'");
      }
      log.Info("wrote " + *args.out_csv);
    }
    return kExitOk;
  } catch (const asr::Error& e) {
    log.Error(e.what());
    return ExitFor(e);
  }
}

int RunSimulate(const SimulateArgs& args, std::ostream& out,
                std::ostream& err) {
  Logger log(err);
  try {
    Scenario scenario = LoadScenario(args.config_path, log);
    std::vector<TraceEvent> traces;
    for (const std::string& path : args.traces) {
      std::vector<TraceEvent> events = LoadTraceFile(path);
      log.Info("loaded " + std::to_string(events.size()) + " events from " +
               path);
      traces.insert(traces.end(), events.begin(), events.end());
    }
    std::stable_sort(traces.begin(), traces.end(),
                     [](const TraceEvent& a, const TraceEvent& b) {
                       return a.time_ms < b.time_ms;
                     });
    SimConfig config = scenario.sim;
    if (args.seed) config.seed = *args.seed;
    GpInstance g = Perturb(scenario.instance,
                           NamedPerturbation(scenario, args.perturbation));

    SimStats stats =
        RunSimulation(scenario.graph, g, scenario.users, config, traces);
    WriteStatsFiles(stats, args.out_dir);
    log.Info("wrote stats to " + args.out_dir);
    out << RenderReport(Summarize(stats));
    return kExitOk;
  } catch (const asr::Error& e) {
    log.Error(e.what());
    return ExitFor(e);
  }
}

int RunSensitivity(const SensitivityArgs& args, std::ostream& out,
                   std::ostream& err) {
  Logger log(err);
  try {
    Scenario scenario = LoadScenario(args.config_path, log);
    std::vector<std::pair<std::string, std::vector<double>>> grid;
    try {
      grid = ParseGrid(scenario, args.grid);
    } catch (const asr::Error& e) {
      // A bad --grid is an argument error, whatever the cause.
      throw asr::Error(ErrorCode::kParse, std::string("grid: ") + e.what());
    }
    std::vector<std::vector<double>> u_grid;
    for (const auto& [name, u] : grid) u_grid.push_back(u);
    SweepReport report =
        SensitivitySweep(scenario.instance, scenario.graph, scenario.users,
                         u_grid, scenario.solve_options);

    std::ostringstream csv;
    csv << "name";
    for (const std::string& label : report.labels) csv << ",u_" << label;
    csv << ",feasible,solver,objective";
    for (const NodeId& server : report.servers) csv << ",frac_" << server;
    for (const NodeId& router : report.routers) csv << ",energy_" << router;
    csv << ",error\n";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const SweepRow& row = report.rows[i];
      csv << CsvSafe(grid[i].first);
      for (double u : row.u) csv << "," << Num(u);
      csv << "," << (row.feasible ? 1 : 0) << "," << row.solver << ","
          << (row.feasible ? Num(row.objective) : "nan");
      for (const NodeId& server : report.servers) {
        csv << "," << Num(row.selection_fraction.at(server));
      }
      for (const NodeId& router : report.routers) {
        csv << "," << Num(row.router_energy.at(router));
      }
      csv << "," << CsvSafe(row.error) << "\n";
      log.Debug("row " + grid[i].first + ": " +
                (row.feasible ? "feasible" : row.error));
    }

    if (args.out_csv) {
      std::ofstream file(*args.out_csv, std::ios::binary);
      file << csv.str();
      if (!file) {
        throw asr::Error(ErrorCode::kIo, "cannot write '" + *args.out_csv + "'");
      }
      out << "wrote " << report.rows.size() << " rows to " << *args.out_csv
          << "\n";
    } else {
      out << csv.str();
    }
    return kExitOk;
  } catch (const asr::Error& e) {
    log.Error(e.what());
    return ExitFor(e);
  }
}

}  // namespace asr::cli
