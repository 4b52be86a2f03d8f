#include "asr/sim.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "asr/error.h"

namespace asr {

namespace {

std::string Num(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

std::string Trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> ParseDouble(const std::string& s) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Independent per-stream engine seeds derived from the run seed.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// Uniform in [0, 1) from the top 53 bits; identical on every platform.
double Unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

const char* TraceFieldName(TraceField field) {
  switch (field) {
    case TraceField::kDelay:
      return "delay";
    case TraceField::kBandwidth:
      return "bandwidth";
    case TraceField::kProcessingDelay:
      return "processing_delay";
  }
  return "unknown";
}

std::vector<TraceEvent> ParseTrace(std::istream& in, const std::string& source) {
  std::vector<TraceEvent> events;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kParse,
                source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    if (!header_seen) {
      if (trimmed != "time_ms,target,field,value") {
        fail("expected header 'time_ms,target,field,value'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(trimmed);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(Trim(cell));
    if (cells.size() != 4) fail("expected 4 columns, got " +
                                std::to_string(cells.size()));
    TraceEvent event;
    auto time = ParseDouble(cells[0]);
    if (!time || !(*time >= 0)) fail("bad time '" + cells[0] + "'");
    event.time_ms = *time;
    if (cells[1].empty()) fail("empty target");
    event.target = cells[1];
    if (cells[2] == "delay") {
      event.field = TraceField::kDelay;
    } else if (cells[2] == "bandwidth") {
      event.field = TraceField::kBandwidth;
    } else if (cells[2] == "processing_delay") {
      event.field = TraceField::kProcessingDelay;
    } else {
      fail("unknown field '" + cells[2] + "'");
    }
    auto value = ParseDouble(cells[3]);
    if (!value || !std::isfinite(*value)) fail("bad value '" + cells[3] + "'");
    event.value = *value;
    if (event.field == TraceField::kBandwidth ? !(event.value > 0)
                                              : !(event.value >= 0)) {
      fail(std::string(TraceFieldName(event.field)) + " value out of range");
    }
    if (!events.empty() && event.time_ms < events.back().time_ms) {
      fail("time goes backwards");
    }
    events.push_back(std::move(event));
  }
  if (!header_seen) {
    line_no = 0;
    fail("missing header");
  }
  return events;
}

std::vector<TraceEvent> LoadTraceFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read trace file '" + path + "'");
  return ParseTrace(in, path);
}

void ValidateSimConfig(const SimConfig& c) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidConfig, "sim: " + what);
  };
  if (!(c.tick_ms > 0)) fail("tick_ms must be positive");
  if (!(c.duration_ms >= 0)) fail("duration_ms must be non-negative");
  if (c.duration_ms > 0 && c.duration_ms < c.tick_ms) {
    fail("duration_ms must be at least one tick");
  }
  if (!(c.interarrival_ms > 0)) fail("interarrival_ms must be positive");
  if (!(c.reoptimize_period_ms > 0)) {
    fail("reoptimize_period_ms must be positive");
  }
  double ratio = c.reoptimize_period_ms / c.tick_ms;
  if (std::fabs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) ||
      std::round(ratio) < 1) {
    fail("reoptimize_period_ms must be a multiple of tick_ms");
  }
  if (!(c.delay_walk_step_ms >= 0) || !(c.delay_walk_spread_ms >= 0) ||
      !(c.processing_walk_step_ms >= 0) || !(c.processing_walk_spread_ms >= 0)) {
    fail("walk step and spread must be non-negative");
  }
  for (const auto& [server, ms] : c.processing_ms) {
    if (!(ms >= 0)) fail("processing delay of " + server + " is negative");
  }
  if (!(c.load_window_ms > 0)) fail("load_window_ms must be positive");
  if (!(c.ewma_beta >= 0 && c.ewma_beta <= 1)) {
    fail("ewma_beta must be in [0, 1]");
  }
}

std::vector<double> GenerateDelayWalk(std::uint64_t seed, double step,
                                      double min, double max,
                                      std::size_t n_ticks, double initial) {
  if (!(min >= 0) || !(min <= max) || !std::isfinite(max)) {
    throw Error(ErrorCode::kInvalidBounds,
                "walk bounds [" + Num(min) + ", " + Num(max) + "]");
  }
  if (!(step >= 0)) {
    throw Error(ErrorCode::kInvalidBounds, "walk step must be non-negative");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  out.reserve(n_ticks);
  double value = std::clamp(initial, min, max);
  for (std::size_t t = 0; t < n_ticks; ++t) {
    if (t != 0 && step > 0) {
      value += step * (2 * Unit(rng) - 1);
      if (value > max) value = 2 * max - value;
      if (value < min) value = 2 * min - value;
      value = std::clamp(value, min, max);
    }
    out.push_back(value);
  }
  return out;
}

std::vector<double> GenerateDelayWalk(std::uint64_t seed, double step,
                                      double min, double max,
                                      std::size_t n_ticks) {
  return GenerateDelayWalk(seed, step, min, max, n_ticks, min + (max - min) / 2);
}

std::map<NodeId, double> SimStats::SelectionFractions() const {
  std::map<NodeId, double> out;
  std::size_t total = 0;
  for (const auto& [server, count] : selection_counts) total += count;
  for (const auto& [server, count] : selection_counts) {
    out[server] = total == 0 ? 0.0
                             : static_cast<double>(count) /
                                   static_cast<double>(total);
  }
  return out;
}

SimStats RunSimulation(const NetworkGraph& graph, const GpInstance& g,
                       const std::vector<UserDemand>& users,
                       const SimConfig& config,
                       const std::vector<TraceEvent>& traces) {
  ValidateSimConfig(config);
  if (users.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "sim: no users to route");
  }

  const std::size_t n_ticks =
      config.duration_ms == 0
          ? 0
          : static_cast<std::size_t>(
                std::floor(config.duration_ms / config.tick_ms + 1e-9));
  const std::size_t reopt_ticks = static_cast<std::size_t>(
      std::llround(config.reoptimize_period_ms / config.tick_ms));

  SimStats stats;
  stats.ticks = n_ticks;
  stats.tick_ms = config.tick_ms;
  stats.servers = g.params.servers;
  stats.routers = graph.NodesWithRole(NodeRole::kRouter);
  stats.ledger = EnergyLedger(graph);
  for (const NodeId& server : stats.servers) {
    stats.selection_counts[server] = 0;
    stats.load_series[server].reserve(n_ticks);
  }
  for (const NodeId& router : stats.routers) {
    stats.router_delay_series[router].reserve(n_ticks);
    stats.router_long_term_series[router].reserve(n_ticks);
  }
  for (QueueClass c :
       {QueueClass::kExpedited, QueueClass::kDeferred, QueueClass::kNormal}) {
    stats.queue_counts[c] = 0;
  }
  stats.objective_series.reserve(n_ticks);

  std::vector<Link> links = graph.links();
  std::map<std::string, std::size_t> link_by_name;
  for (std::size_t i = 0; i < links.size(); ++i) {
    link_by_name[LinkName(links[i].src, links[i].dst)] = i;
  }
  std::map<NodeId, std::size_t> server_by_id;
  std::vector<double> processing;
  for (std::size_t k = 0; k < stats.servers.size(); ++k) {
    server_by_id[stats.servers[k]] = k;
    auto it = config.processing_ms.find(stats.servers[k]);
    processing.push_back(it == config.processing_ms.end() ? 1.0 : it->second);
  }
  for (const auto& [server, ms] : config.processing_ms) {
    if (!server_by_id.count(server)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "sim: processing delay for unknown server '" + server + "'");
    }
  }

  std::set<std::pair<std::string, TraceField>> overridden;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const TraceEvent& e = traces[i];
    bool ok = e.field == TraceField::kProcessingDelay
                  ? server_by_id.count(e.target) != 0
                  : link_by_name.count(e.target) != 0;
    if (!ok) {
      throw Error(ErrorCode::kInvalidConfig,
                  "trace event " + std::to_string(i) + ": unknown " +
                      TraceFieldName(e.field) + " target '" + e.target + "'");
    }
    if (i > 0 && e.time_ms < traces[i - 1].time_ms) {
      throw Error(ErrorCode::kInvalidConfig, "trace events are not sorted");
    }
    overridden.insert({e.target, e.field});
  }

  // Streams 0..L-1 drive links, L..L+S-1 drive servers.
  std::vector<std::vector<double>> link_walks(links.size());
  if (config.delay_walk_step_ms > 0) {
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (overridden.count({LinkName(links[i].src, links[i].dst),
                            TraceField::kDelay})) {
        continue;
      }
      double d0 = links[i].delay_ms;
      link_walks[i] = GenerateDelayWalk(
          DeriveSeed(config.seed, i), config.delay_walk_step_ms,
          std::max(0.0, d0 - config.delay_walk_spread_ms),
          d0 + config.delay_walk_spread_ms, n_ticks, d0);
    }
  }
  std::vector<std::vector<double>> server_walks(stats.servers.size());
  if (config.processing_walk_step_ms > 0) {
    for (std::size_t k = 0; k < stats.servers.size(); ++k) {
      if (overridden.count({stats.servers[k], TraceField::kProcessingDelay})) {
        continue;
      }
      double p0 = processing[k];
      server_walks[k] = GenerateDelayWalk(
          DeriveSeed(config.seed, links.size() + k),
          config.processing_walk_step_ms,
          std::max(0.0, p0 - config.processing_walk_spread_ms),
          p0 + config.processing_walk_spread_ms, n_ticks, p0);
    }
  }

  std::vector<ServerLoadModel> load_models;
  for (double p : processing) {
    load_models.emplace_back(config.load_window_ms, p);
  }
  std::vector<DelayEstimator> estimators(
      links.size(), DelayEstimator::Empty(config.ewma_beta));

  std::map<NodeId, std::vector<std::size_t>> out_links;
  for (std::size_t i = 0; i < links.size(); ++i) {
    out_links[links[i].src].push_back(i);
  }

  SolveOptions options;
  options.budget = config.budget;
  options.enumerate = config.enumerate;

  NetworkGraph current_graph = graph;
  std::optional<Assignment> current;
  std::size_t trace_cursor = 0;
  std::size_t request_index = 0;
  double next_request_ms = 0;

  for (std::size_t t = 0; t < n_ticks; ++t) {
    const double now = static_cast<double>(t) * config.tick_ms;
    const double tick_end = static_cast<double>(t + 1) * config.tick_ms;

    bool links_changed = false;
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (!link_walks[i].empty() && links[i].delay_ms != link_walks[i][t]) {
        links[i].delay_ms = link_walks[i][t];
        links_changed = true;
      }
    }
    for (std::size_t k = 0; k < server_walks.size(); ++k) {
      if (!server_walks[k].empty()) processing[k] = server_walks[k][t];
    }
    for (; trace_cursor < traces.size() && traces[trace_cursor].time_ms <= now;
         ++trace_cursor) {
      const TraceEvent& e = traces[trace_cursor];
      if (e.field == TraceField::kProcessingDelay) {
        processing[server_by_id.at(e.target)] = e.value;
      } else {
        Link& link = links[link_by_name.at(e.target)];
        if (e.field == TraceField::kDelay) {
          link.delay_ms = e.value;
        } else {
          link.bandwidth_mbps = e.value;
        }
        links_changed = true;
      }
    }
    for (std::size_t k = 0; k < load_models.size(); ++k) {
      load_models[k].set_processing_delay_ms(processing[k]);
    }
    if (links_changed) current_graph = NetworkGraph(graph.nodes(), links);
    for (std::size_t i = 0; i < links.size(); ++i) {
      estimators[i] = EwmaUpdate(estimators[i], links[i].delay_ms);
    }

    if (t % reopt_ticks == 0) {
      ++stats.epochs;
      for (std::size_t k = 0; k < stats.servers.size(); ++k) {
        options.base_load[stats.servers[k]] = load_models[k].Sample(now);
      }
      try {
        current = Solve(g, current_graph, users, options);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInfeasible &&
            e.code() != ErrorCode::kNonPositiveMetric) {
          throw;
        }
        current.reset();
        ++stats.infeasible_epochs;
      }
    }

    while (next_request_ms < tick_end && next_request_ms < config.duration_ms) {
      ++stats.total_requests;
      if (current) {
        const UserChoice& choice =
            current->choices[request_index % current->choices.size()];
        ++stats.served_requests;
        ++stats.selection_counts[choice.server];
        stats.ledger.Record(choice.path, current_graph);
        stats.served_path_energy += PathEnergy(choice.path, current_graph);
        load_models[server_by_id.at(choice.server)].AddRequest(next_request_ms);

        DelayEstimator path_est = DelayEstimator::Seeded(0, 0, config.ewma_beta);
        for (std::size_t h = 0; h + 1 < choice.path.size(); ++h) {
          const DelayEstimator& link_est = estimators[link_by_name.at(
              LinkName(choice.path[h], choice.path[h + 1]))];
          path_est.long_term_ms += link_est.long_term_ms;
          path_est.current_ms += link_est.current_ms;
        }
        ++stats.queue_counts[ClassifyPacket(path_est)];
      } else {
        ++stats.dropped_requests;
      }
      ++request_index;
      next_request_ms = static_cast<double>(request_index) * config.interarrival_ms;
    }

    for (std::size_t k = 0; k < stats.servers.size(); ++k) {
      stats.load_series[stats.servers[k]].push_back(
          load_models[k].Sample(tick_end));
    }
    for (const NodeId& router : stats.routers) {
      double current_sum = 0;
      double long_sum = 0;
      const auto& outs = out_links[router];
      for (std::size_t i : outs) {
        current_sum += estimators[i].current_ms;
        long_sum += estimators[i].long_term_ms;
      }
      double n = outs.empty() ? 1.0 : static_cast<double>(outs.size());
      stats.router_delay_series[router].push_back(current_sum / n);
      stats.router_long_term_series[router].push_back(long_sum / n);
    }
    stats.objective_series.push_back(
        current ? current->total_objective
                : std::numeric_limits<double>::quiet_NaN());
  }
  return stats;
}

namespace {

double Mean(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double sum = 0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

ReportTables Summarize(const SimStats& stats) {
  ReportTables tables;
  tables.total_requests = stats.total_requests;
  tables.dropped_requests = stats.dropped_requests;
  tables.queue_counts = stats.queue_counts;
  for (const NodeId& router : stats.routers) {
    tables.energy.push_back({router, stats.ledger.Energy(router)});
  }
  std::map<NodeId, double> fractions = stats.SelectionFractions();
  for (const auto& [server, count] : stats.selection_counts) {
    tables.selection.push_back({server, count, fractions[server]});
  }
  for (const auto& [server, series] : stats.load_series) {
    LoadRow row{server, Mean(series), 0, 0};
    if (!series.empty()) {
      auto [lo, hi] = std::minmax_element(series.begin(), series.end());
      row.min = *lo;
      row.max = *hi;
    }
    tables.load.push_back(row);
  }
  for (const NodeId& router : stats.routers) {
    DelayRow row{router, 0, 0, 0};
    auto cur = stats.router_delay_series.find(router);
    auto lt = stats.router_long_term_series.find(router);
    if (cur != stats.router_delay_series.end()) {
      row.mean_current_ms = Mean(cur->second);
    }
    if (lt != stats.router_long_term_series.end() && !lt->second.empty()) {
      row.mean_long_term_ms = Mean(lt->second);
      row.final_long_term_ms = lt->second.back();
    }
    tables.delay.push_back(row);
  }
  return tables;
}

std::string RenderReport(const ReportTables& tables) {
  std::ostringstream out;
  char line[256];
  out << "Total energy consumed (units)\n";
  std::snprintf(line, sizeof(line), "  %-10s %12s\n", "router", "energy");
  out << line;
  for (const EnergyRow& row : tables.energy) {
    std::snprintf(line, sizeof(line), "  %-10s %12s\n", row.router.c_str(),
                  Num(row.energy).c_str());
    out << line;
  }
  out << "\nServer selection\n";
  std::snprintf(line, sizeof(line), "  %-10s %10s %10s\n", "server",
                "requests", "fraction");
  out << line;
  for (const SelectionRow& row : tables.selection) {
    std::snprintf(line, sizeof(line), "  %-10s %10zu %10.4f\n",
                  row.server.c_str(), row.count, row.fraction);
    out << line;
  }
  out << "\nServer load\n";
  std::snprintf(line, sizeof(line), "  %-10s %10s %10s %10s\n", "server",
                "mean", "min", "max");
  out << line;
  for (const LoadRow& row : tables.load) {
    std::snprintf(line, sizeof(line), "  %-10s %10.4f %10.4f %10.4f\n",
                  row.server.c_str(), row.mean, row.min, row.max);
    out << line;
  }
  out << "\nRouter delay (ms)\n";
  std::snprintf(line, sizeof(line), "  %-10s %12s %12s %12s\n", "router",
                "mean_cur", "mean_long", "final_long");
  out << line;
  for (const DelayRow& row : tables.delay) {
    std::snprintf(line, sizeof(line), "  %-10s %12.4f %12.4f %12.4f\n",
                  row.router.c_str(), row.mean_current_ms,
                  row.mean_long_term_ms, row.final_long_term_ms);
    out << line;
  }
  out << "\nPacket classes\n";
  for (const auto& [c, count] : tables.queue_counts) {
    std::snprintf(line, sizeof(line), "  %-10s %10zu\n", QueueClassName(c),
                  count);
    out << line;
  }
  out << "\nRequests: " << tables.total_requests
      << " total, " << tables.dropped_requests << " dropped\n";
  return out.str();
}

std::map<std::string, std::string> StatsFiles(const SimStats& stats) {
  std::map<std::string, std::string> files;

  std::ostringstream selection;
  selection << "server,count,fraction\n";
  std::map<NodeId, double> fractions = stats.SelectionFractions();
  for (const auto& [server, count] : stats.selection_counts) {
    selection << server << "," << count << "," << Num(fractions[server])
              << "\n";
  }
  files["selection.csv"] = selection.str();

  std::ostringstream energy;
  energy << "node,energy\n";
  for (const auto& [node, value] : stats.ledger.entries()) {
    energy << node << "," << Num(value) << "\n";
  }
  files["energy.csv"] = energy.str();

  // Series are sampled at the end of each tick.
  auto time_of = [&](std::size_t t) {
    return Num(static_cast<double>(t + 1) * stats.tick_ms);
  };

  std::ostringstream load;
  load << "tick,time_ms";
  for (const NodeId& server : stats.servers) load << "," << server;
  load << "\n";
  for (std::size_t t = 0; t < stats.ticks; ++t) {
    load << t << "," << time_of(t);
    for (const NodeId& server : stats.servers) {
      load << "," << Num(stats.load_series.at(server)[t]);
    }
    load << "\n";
  }
  files["load_series.csv"] = load.str();

  std::ostringstream delay;
  delay << "tick,time_ms";
  for (const NodeId& router : stats.routers) {
    delay << "," << router << "_current," << router << "_long_term";
  }
  delay << "\n";
  for (std::size_t t = 0; t < stats.ticks; ++t) {
    delay << t << "," << time_of(t);
    for (const NodeId& router : stats.routers) {
      delay << "," << Num(stats.router_delay_series.at(router)[t]) << ","
            << Num(stats.router_long_term_series.at(router)[t]);
    }
    delay << "\n";
  }
  files["delay_series.csv"] = delay.str();

  std::ostringstream objective;
  objective << "tick,time_ms,objective\n";
  for (std::size_t t = 0; t < stats.ticks; ++t) {
    objective << t << "," << time_of(t) << ","
              << Num(stats.objective_series[t]) << "\n";
  }
  files["objective_series.csv"] = objective.str();

  files["summary.txt"] = RenderReport(Summarize(stats));
  return files;
}

void WriteStatsFiles(const SimStats& stats, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + dir + "'");
  for (const auto& [name, content] : StatsFiles(stats)) {
    std::filesystem::path path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  }
}

}  // namespace asr
