#include "asr/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "asr/error.h"

namespace asr {

namespace {

std::string Trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitWords(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

std::optional<double> ToDouble(const std::string& s) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::uint64_t> ToUnsigned(const std::string& s) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// "name[key]" -> key.
std::optional<std::string> Indexed(const std::string& key,
                                   const std::string& name) {
  if (key.size() > name.size() + 2 && key.compare(0, name.size(), name) == 0 &&
      key[name.size()] == '[' && key.back() == ']') {
    return key.substr(name.size() + 1, key.size() - name.size() - 2);
  }
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(std::string source) { doc_.source = std::move(source); }

  ConfigDocument Run(std::istream& in) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      std::string text = raw;
      std::size_t hash = text.find('#');
      if (hash != std::string::npos) text.resize(hash);
      text = Trim(text);
      if (text.empty()) continue;
      if (text.front() == '[') {
        if (text.back() != ']') Fail("unterminated section header");
        section_ = Trim(text.substr(1, text.size() - 2));
        static const std::set<std::string> kSections = {
            "network", "users", "problem", "perturbation", "sim"};
        if (!kSections.count(section_)) Fail("unknown section '" + section_ + "'");
        continue;
      }
      if (section_.empty()) Fail("entry outside of a section");
      if (section_ == "network") {
        Network(text);
      } else if (section_ == "users") {
        User(text);
      } else if (section_ == "problem") {
        Problem(text);
      } else if (section_ == "perturbation") {
        Perturbation(text);
      } else {
        Sim(text);
      }
    }
    return std::move(doc_);
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    throw Error(ErrorCode::kParse,
                doc_.source + ":" + std::to_string(line_) + ": " + what);
  }

  double Number(const std::string& key, const std::string& value) const {
    auto v = ToDouble(value);
    if (!v) Fail("'" + key + "' expects a number, got '" + value + "'");
    return *v;
  }

  std::uint64_t Count(const std::string& key, const std::string& value) const {
    auto v = ToUnsigned(value);
    if (!v) Fail("'" + key + "' expects a non-negative integer, got '" +
                 value + "'");
    return *v;
  }

  // key=value words after the positional ones.
  std::map<std::string, std::string> Attributes(
      const std::vector<std::string>& words, std::size_t first) const {
    std::map<std::string, std::string> out;
    for (std::size_t i = first; i < words.size(); ++i) {
      std::size_t eq = words[i].find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == words[i].size()) {
        Fail("expected key=value, got '" + words[i] + "'");
      }
      if (!out.emplace(words[i].substr(0, eq), words[i].substr(eq + 1)).second) {
        Fail("repeated attribute '" + words[i].substr(0, eq) + "'");
      }
    }
    return out;
  }

  std::pair<std::string, std::string> KeyValue(const std::string& text) const {
    std::size_t eq = text.find('=');
    if (eq == std::string::npos) Fail("expected 'key = value'");
    std::string key = Trim(text.substr(0, eq));
    std::string value = Trim(text.substr(eq + 1));
    if (key.empty() || value.empty()) Fail("expected 'key = value'");
    return {key, value};
  }

  void Network(const std::string& text) {
    std::vector<std::string> words = SplitWords(text);
    if (words[0] == "node") {
      if (words.size() != 3) Fail("expected 'node <id> <client|router|server>'");
      Node node{words[1], NodeRole::kRouter};
      if (words[2] == "client") {
        node.role = NodeRole::kClient;
      } else if (words[2] == "router") {
        node.role = NodeRole::kRouter;
      } else if (words[2] == "server") {
        node.role = NodeRole::kServer;
      } else {
        Fail("unknown role '" + words[2] + "'");
      }
      doc_.nodes.push_back({node, line_});
    } else if (words[0] == "link") {
      if (words.size() < 3) Fail("expected 'link <src> <dst> key=value...'");
      Link link{words[1], words[2], 0, 0, 1.0};
      bool has_bw = false;
      bool has_delay = false;
      for (const auto& [key, value] : Attributes(words, 3)) {
        if (key == "bandwidth") {
          link.bandwidth_mbps = Number(key, value);
          has_bw = true;
        } else if (key == "delay") {
          link.delay_ms = Number(key, value);
          has_delay = true;
        } else if (key == "energy") {
          link.energy = Number(key, value);
        } else {
          Fail("unknown link attribute '" + key + "'");
        }
      }
      if (!has_bw) Fail("link " + LinkName(link.src, link.dst) + " needs bandwidth=");
      if (!has_delay) Fail("link " + LinkName(link.src, link.dst) + " needs delay=");
      doc_.links.push_back({link, line_});
    } else {
      Fail("expected 'node' or 'link', got '" + words[0] + "'");
    }
  }

  void User(const std::string& text) {
    std::vector<std::string> words = SplitWords(text);
    if (words[0] != "user" || words.size() < 2) {
      Fail("expected 'user <id> key=value...'");
    }
    UserDemand user;
    user.id = words[1];
    std::set<std::string> required = {"client", "d_max", "b_min", "b_max"};
    for (const auto& [key, value] : Attributes(words, 2)) {
      required.erase(key);
      if (key == "client") {
        user.client = value;
      } else if (key == "d_max") {
        user.d_max_ms = Number(key, value);
      } else if (key == "b_min") {
        user.b_min_mbps = Number(key, value);
      } else if (key == "b_max") {
        user.b_max_mbps = Number(key, value);
      } else if (key == "weight") {
        user.weight = Number(key, value);
      } else {
        Fail("unknown user attribute '" + key + "'");
      }
    }
    if (!required.empty()) {
      Fail("user " + user.id + " needs " + *required.begin() + "=");
    }
    doc_.users.push_back({user, line_});
  }

  void Problem(const std::string& text) {
    auto [key, value] = KeyValue(text);
    if (key == "alpha") {
      doc_.problem.alpha = Number(key, value);
    } else if (key == "c_total") {
      doc_.problem.c_total = Number(key, value);
      doc_.has_c_total = true;
    } else if (key == "epsilon") {
      doc_.problem.epsilon = Number(key, value);
    } else if (key == "budget") {
      doc_.budget = Count(key, value);
    } else if (key == "max_hops") {
      doc_.max_hops = Count(key, value);
    } else if (auto server = Indexed(key, "capacity")) {
      doc_.problem.server_capacity[*server] = Number(key, value);
    } else {
      Fail("unknown problem key '" + key + "'");
    }
  }

  void Perturbation(const std::string& text) {
    auto [key, value] = KeyValue(text);
    try {
      doc_.perturbations.push_back({key, ParsePerturbationSpec(value), line_});
    } catch (const Error& e) {
      Fail(e.what());
    }
  }

  void Sim(const std::string& text) {
    auto [key, value] = KeyValue(text);
    SimConfig& s = doc_.sim;
    if (key == "duration_ms") {
      s.duration_ms = Number(key, value);
    } else if (key == "tick_ms") {
      s.tick_ms = Number(key, value);
    } else if (key == "interarrival_ms") {
      s.interarrival_ms = Number(key, value);
    } else if (key == "reoptimize_period_ms") {
      s.reoptimize_period_ms = Number(key, value);
    } else if (key == "seed") {
      s.seed = Count(key, value);
    } else if (key == "delay_walk_step_ms") {
      s.delay_walk_step_ms = Number(key, value);
    } else if (key == "delay_walk_spread_ms") {
      s.delay_walk_spread_ms = Number(key, value);
    } else if (key == "processing_walk_step_ms") {
      s.processing_walk_step_ms = Number(key, value);
    } else if (key == "processing_walk_spread_ms") {
      s.processing_walk_spread_ms = Number(key, value);
    } else if (key == "load_window_ms") {
      s.load_window_ms = Number(key, value);
    } else if (key == "ewma_beta") {
      s.ewma_beta = Number(key, value);
    } else if (auto server = Indexed(key, "processing_ms")) {
      s.processing_ms[*server] = Number(key, value);
    } else {
      Fail("unknown sim key '" + key + "'");
    }
  }

  ConfigDocument doc_;
  std::size_t line_ = 0;
  std::string section_;
};

std::string At(const ConfigDocument& doc, std::size_t line) {
  return doc.source + ":" + std::to_string(line) + ": ";
}

}  // namespace

PerturbationSpec ParsePerturbationSpec(const std::string& text) {
  PerturbationSpec spec;
  std::string normalized = text;
  for (char& ch : normalized) {
    if (ch == ',') ch = ' ';
  }
  for (const std::string& token : SplitWords(normalized)) {
    std::size_t colon = token.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) {
      throw Error(ErrorCode::kParse,
                  "perturbation entry '" + token + "' is not selector:value");
    }
    auto value = ToDouble(token.substr(colon + 1));
    if (!value) {
      throw Error(ErrorCode::kParse,
                  "perturbation entry '" + token + "' has a bad value");
    }
    spec.emplace_back(token.substr(0, colon), *value);
  }
  if (spec.empty()) throw Error(ErrorCode::kParse, "empty perturbation");
  return spec;
}

ConfigDocument ParseConfig(std::istream& in, const std::string& source) {
  return Parser(source).Run(in);
}

ConfigDocument LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config file '" + path + "'");
  return ParseConfig(in, path);
}

std::vector<double> Scenario::Perturbation(const std::string& name) const {
  if (name == "baseline") return std::vector<double>(instance.u.size(), 1.0);
  auto it = perturbations.find(name);
  if (it == perturbations.end()) {
    throw Error(ErrorCode::kInvalidConfig, "no perturbation named '" + name + "'");
  }
  return it->second;
}

std::vector<std::string> CheckConfig(const ConfigDocument& doc) {
  std::vector<std::string> issues;
  std::vector<Node> nodes;
  std::vector<Link> links;
  for (const auto& entry : doc.nodes) nodes.push_back(entry.node);
  for (const auto& entry : doc.links) links.push_back(entry.link);

  // Attribute link-level problems to their lines.
  for (const auto& entry : doc.links) {
    const Link& link = entry.link;
    std::string name = LinkName(link.src, link.dst);
    if (!(link.bandwidth_mbps > 0)) {
      issues.push_back(At(doc, entry.line) + "link " + name +
                       " has non-positive bandwidth");
    }
    if (!(link.delay_ms >= 0)) {
      issues.push_back(At(doc, entry.line) + "link " + name +
                       " has negative delay");
    }
    if (!(link.energy > 0)) {
      issues.push_back(At(doc, entry.line) + "link " + name +
                       " has non-positive energy");
    }
  }
  std::size_t link_issues = issues.size();
  for (const std::string& issue : NetworkGraph::Check(nodes, links)) {
    if (issue.find("non-positive") != std::string::npos ||
        issue.find("negative delay") != std::string::npos) {
      continue;  // already reported with a line number
    }
    issues.push_back(doc.source + ": " + issue);
  }
  if (issues.size() != link_issues || link_issues != 0) return issues;

  NetworkGraph graph(nodes, links);
  if (doc.users.empty()) issues.push_back(doc.source + ": no users defined");
  std::set<std::string> ids;
  EnumerateOptions enumerate;
  enumerate.max_hops = doc.max_hops;
  for (const auto& entry : doc.users) {
    const UserDemand& u = entry.user;
    std::string at = At(doc, entry.line) + "user " + u.id + ": ";
    if (!ids.insert(u.id).second) issues.push_back(at + "duplicate id");
    if (!graph.HasNode(u.client) || graph.Role(u.client) != NodeRole::kClient) {
      issues.push_back(at + "'" + u.client + "' is not a client node");
    } else {
      try {
        EnumeratePaths(graph, u.client, enumerate);
      } catch (const Error& e) {
        issues.push_back(at + e.what());
      }
    }
    if (!(u.d_max_ms > 0)) issues.push_back(at + "d_max must be positive");
    if (!(u.b_min_mbps > 0) || !(u.b_min_mbps <= u.b_max_mbps)) {
      issues.push_back(at + "need 0 < b_min <= b_max");
    }
    if (!(u.weight >= 0)) issues.push_back(at + "weight must be non-negative");
  }

  if (!doc.has_c_total) issues.push_back(doc.source + ": problem.c_total is required");
  if (!(doc.problem.alpha > 0)) issues.push_back(doc.source + ": alpha must be positive");
  if (doc.has_c_total && !(doc.problem.c_total > 0)) {
    issues.push_back(doc.source + ": c_total must be positive");
  }
  if (!(doc.problem.epsilon >= 0)) {
    issues.push_back(doc.source + ": epsilon must be non-negative");
  }
  if (doc.budget == 0) issues.push_back(doc.source + ": budget must be positive");
  for (const auto& [server, capacity] : doc.problem.server_capacity) {
    if (!graph.HasNode(server) || graph.Role(server) != NodeRole::kServer) {
      issues.push_back(doc.source + ": capacity for unknown server '" + server +
                       "'");
    } else if (!(capacity > 0)) {
      issues.push_back(doc.source + ": capacity of " + server +
                       " must be positive");
    }
  }
  try {
    ValidateSimConfig(doc.sim);
  } catch (const Error& e) {
    issues.push_back(doc.source + ": " + e.what());
  }
  for (const auto& [server, ms] : doc.sim.processing_ms) {
    if (!graph.HasNode(server) || graph.Role(server) != NodeRole::kServer) {
      issues.push_back(doc.source + ": processing delay for unknown server '" +
                       server + "'");
    }
  }
  if (!issues.empty()) return issues;

  std::vector<UserDemand> users;
  for (const auto& entry : doc.users) users.push_back(entry.user);
  GpInstance g = MakeAnycastInstance(doc.problem, users, graph);
  for (const std::string& v : ValidateStandardForm(g).violations) {
    issues.push_back(doc.source + ": " + v);
  }
  std::set<std::string> names;
  for (const auto& entry : doc.perturbations) {
    std::string at = At(doc, entry.line) + "perturbation " + entry.name + ": ";
    if (entry.name == "baseline") issues.push_back(at + "name is reserved");
    if (!names.insert(entry.name).second) issues.push_back(at + "duplicate name");
    try {
      Perturb(g, ResolvePerturbation(g, entry.spec));
    } catch (const Error& e) {
      issues.push_back(at + e.what());
    }
  }
  return issues;
}

Scenario BuildScenario(const ConfigDocument& doc) {
  std::vector<std::string> issues = CheckConfig(doc);
  if (!issues.empty()) {
    std::string message;
    for (const std::string& issue : issues) message += "\n  " + issue;
    throw Error(ErrorCode::kInvalidConfig, "invalid configuration:" + message);
  }
  std::vector<Node> nodes;
  std::vector<Link> links;
  for (const auto& entry : doc.nodes) nodes.push_back(entry.node);
  for (const auto& entry : doc.links) links.push_back(entry.link);
  NetworkGraph graph(std::move(nodes), std::move(links));

  std::vector<UserDemand> users;
  for (const auto& entry : doc.users) users.push_back(entry.user);
  GpInstance instance = MakeAnycastInstance(doc.problem, users, graph);

  std::map<std::string, std::vector<double>> perturbations;
  for (const auto& entry : doc.perturbations) {
    perturbations[entry.name] = ResolvePerturbation(instance, entry.spec);
  }

  SolveOptions options;
  options.budget = doc.budget;
  options.enumerate.max_hops = doc.max_hops;
  SimConfig sim = doc.sim;
  sim.budget = doc.budget;
  sim.enumerate = options.enumerate;

  return Scenario{std::move(graph),    std::move(users),
                  doc.problem,         std::move(instance),
                  std::move(perturbations), std::move(options),
                  std::move(sim)};
}

std::vector<std::pair<std::string, std::vector<double>>> ParseGrid(
    const Scenario& scenario, const std::string& text) {
  std::vector<std::pair<std::string, std::vector<double>>> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    item = Trim(item);
    if (item.empty()) continue;
    if (item == "baseline" || scenario.perturbations.count(item)) {
      grid.emplace_back(item, scenario.Perturbation(item));
      continue;
    }
    std::vector<double> u =
        ResolvePerturbation(scenario.instance, ParsePerturbationSpec(item));
    Perturb(scenario.instance, u);  // validates positivity
    grid.emplace_back(item, std::move(u));
  }
  if (grid.empty()) throw Error(ErrorCode::kParse, "empty grid");
  return grid;
}

}  // namespace asr
