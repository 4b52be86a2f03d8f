#ifndef ASR_SIM_H
#define ASR_SIM_H

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "asr/netmodel.h"
#include "asr/optimizer.h"
#include "asr/posy.h"
#include "asr/telemetry.h"

namespace asr {

enum class TraceField { kDelay, kBandwidth, kProcessingDelay };

const char* TraceFieldName(TraceField field);

// A step change: from time_ms on, target.field holds value. Targets are link
// names ("R1->R2") for delay/bandwidth and server ids for processing_delay.
struct TraceEvent {
  double time_ms = 0;
  std::string target;
  TraceField field = TraceField::kDelay;
  double value = 0;
};

// CSV with header time_ms,target,field,value. Throws Error(kParse) naming the
// source and row number.
std::vector<TraceEvent> ParseTrace(std::istream& in,
                                   const std::string& source = "trace");
std::vector<TraceEvent> LoadTraceFile(const std::string& path);

struct SimConfig {
  double duration_ms = 60000;
  double tick_ms = 1;
  double interarrival_ms = 10;
  double reoptimize_period_ms = 10;
  std::uint64_t seed = 1;

  // Link delays random-walk within [initial - spread, initial + spread]
  // (floored at 0) by at most `step` per tick. A zero step keeps them static.
  double delay_walk_step_ms = 0;
  double delay_walk_spread_ms = 0;
  // Same for per-server processing delays.
  double processing_walk_step_ms = 0;
  double processing_walk_spread_ms = 0;

  // Initial per-server processing delay; servers not listed use 1 ms.
  std::map<NodeId, double> processing_ms;

  double load_window_ms = 100;
  double ewma_beta = 0.9;
  std::size_t budget = 4096;
  EnumerateOptions enumerate;
};

// Throws Error(kInvalidConfig) on the first violated invariant.
void ValidateSimConfig(const SimConfig& config);

// Reflecting bounded random walk starting at `initial` (clamped to the
// bounds); each step adds a uniform draw from [-step, step]. Returns n_ticks
// values, the first being the start value. Throws kInvalidBounds.
std::vector<double> GenerateDelayWalk(std::uint64_t seed, double step,
                                      double min, double max,
                                      std::size_t n_ticks, double initial);
// Starts at the midpoint of the bounds.
std::vector<double> GenerateDelayWalk(std::uint64_t seed, double step,
                                      double min, double max,
                                      std::size_t n_ticks);

struct SimStats {
  std::size_t ticks = 0;
  double tick_ms = 0;
  std::vector<NodeId> servers;
  std::vector<NodeId> routers;

  std::size_t total_requests = 0;
  std::size_t served_requests = 0;
  std::size_t dropped_requests = 0;
  std::size_t epochs = 0;
  std::size_t infeasible_epochs = 0;

  std::map<NodeId, std::size_t> selection_counts;
  EnergyLedger ledger;
  // Sum of path_energy over served requests; equals ledger.Total().
  double served_path_energy = 0;
  std::map<QueueClass, std::size_t> queue_counts;

  // One entry per tick.
  std::map<NodeId, std::vector<double>> load_series;
  std::map<NodeId, std::vector<double>> router_delay_series;
  std::map<NodeId, std::vector<double>> router_long_term_series;
  // NaN while no feasible assignment is in force.
  std::vector<double> objective_series;

  std::map<NodeId, double> SelectionFractions() const;
};

// Tick loop: apply trace/generator updates, re-solve every reoptimize period
// on the current link metrics and measured loads, route arrivals with the
// assignment in force. Deterministic in (config, traces).
SimStats RunSimulation(const NetworkGraph& graph, const GpInstance& g,
                       const std::vector<UserDemand>& users,
                       const SimConfig& config,
                       const std::vector<TraceEvent>& traces = {});

struct EnergyRow {
  NodeId router;
  double energy = 0;
};

struct SelectionRow {
  NodeId server;
  std::size_t count = 0;
  double fraction = 0;
};

struct LoadRow {
  NodeId server;
  double mean = 0;
  double min = 0;
  double max = 0;
};

struct DelayRow {
  NodeId router;
  double mean_current_ms = 0;
  double mean_long_term_ms = 0;
  double final_long_term_ms = 0;
};

struct ReportTables {
  std::vector<EnergyRow> energy;
  std::vector<SelectionRow> selection;
  std::vector<LoadRow> load;
  std::vector<DelayRow> delay;
  std::map<QueueClass, std::size_t> queue_counts;
  std::size_t total_requests = 0;
  std::size_t dropped_requests = 0;
};

ReportTables Summarize(const SimStats& stats);
std::string RenderReport(const ReportTables& tables);

// File name -> contents for the CSV exports and summary.txt.
std::map<std::string, std::string> StatsFiles(const SimStats& stats);
// Writes StatsFiles into `dir`, creating it if needed. Throws kIo.
void WriteStatsFiles(const SimStats& stats, const std::string& dir);

}  // namespace asr

#endif
