#ifndef ASR_CONFIG_H
#define ASR_CONFIG_H

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "asr/netmodel.h"
#include "asr/optimizer.h"
#include "asr/posy.h"
#include "asr/sim.h"

namespace asr {

// Ordered (selector, value) pairs, e.g. "load:0.9, delay:0.9".
using PerturbationSpec = std::vector<std::pair<std::string, double>>;

// Throws Error(kParse).
PerturbationSpec ParsePerturbationSpec(const std::string& text);

// Sectioned plain-text configuration, parsed but not yet validated. Line
// numbers are kept so validation messages can point into the file.
struct ConfigDocument {
  std::string source;

  struct NodeEntry {
    Node node;
    std::size_t line = 0;
  };
  struct LinkEntry {
    Link link;
    std::size_t line = 0;
  };
  struct UserEntry {
    UserDemand user;
    std::size_t line = 0;
  };
  struct PerturbationEntry {
    std::string name;
    PerturbationSpec spec;
    std::size_t line = 0;
  };

  std::vector<NodeEntry> nodes;
  std::vector<LinkEntry> links;
  std::vector<UserEntry> users;
  ProblemParams problem;
  bool has_c_total = false;
  std::size_t budget = 4096;
  std::size_t max_hops = 0;
  std::vector<PerturbationEntry> perturbations;
  SimConfig sim;
};

// Throws Error(kParse) with "source:line: message".
ConfigDocument ParseConfig(std::istream& in, const std::string& source);
// Throws Error(kIo) when the file cannot be read.
ConfigDocument LoadConfigFile(const std::string& path);

// Everything needed to solve, sweep or simulate one configured instance.
struct Scenario {
  NetworkGraph graph;
  std::vector<UserDemand> users;
  ProblemParams problem;
  GpInstance instance;  // unperturbed
  std::map<std::string, std::vector<double>> perturbations;
  SolveOptions solve_options;
  SimConfig sim;

  // Named perturbation, "baseline" for all ones. Throws kInvalidConfig.
  std::vector<double> Perturbation(const std::string& name) const;
};

// Every invariant violation, with line references where available.
std::vector<std::string> CheckConfig(const ConfigDocument& doc);

// Throws Error(kInvalidConfig) listing CheckConfig's findings.
Scenario BuildScenario(const ConfigDocument& doc);

// ';'-separated grid items, each a perturbation name, "baseline" or an inline
// spec. Returns (display name, u). Throws kParse / kInvalidConfig.
std::vector<std::pair<std::string, std::vector<double>>> ParseGrid(
    const Scenario& scenario, const std::string& text);

}  // namespace asr

#endif
