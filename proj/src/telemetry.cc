#include "asr/telemetry.h"

#include <algorithm>
#include <cmath>

#include "asr/error.h"

namespace asr {

DelayEstimator DelayEstimator::Empty(double beta) {
  DelayEstimator est;
  est.beta = beta;
  return est;
}

DelayEstimator DelayEstimator::Seeded(double long_term_ms, double current_ms,
                                      double beta) {
  DelayEstimator est;
  est.long_term_ms = long_term_ms;
  est.current_ms = current_ms;
  est.beta = beta;
  est.initialized = true;
  return est;
}

DelayEstimator EwmaUpdate(const DelayEstimator& est, double sample_ms) {
  if (!(sample_ms >= 0)) {
    throw Error(ErrorCode::kNegativeSample,
                "delay sample " + std::to_string(sample_ms));
  }
  DelayEstimator out = est;
  if (!est.initialized) {
    out.long_term_ms = sample_ms;
    out.initialized = true;
  } else {
    // beta * long_term + (1 - beta) * sample, written so that a sample equal
    // to the estimate leaves it bit-identical.
    out.long_term_ms =
        est.long_term_ms + (1 - est.beta) * (sample_ms - est.long_term_ms);
  }
  out.current_ms = sample_ms;
  return out;
}

const char* QueueClassName(QueueClass c) {
  switch (c) {
    case QueueClass::kExpedited:
      return "expedited";
    case QueueClass::kDeferred:
      return "deferred";
    case QueueClass::kNormal:
      return "normal";
  }
  return "unknown";
}

QueueClass ClassifyPacket(const DelayEstimator& est) {
  if (!est.initialized) {
    throw Error(ErrorCode::kUninitialized, "estimator has no samples");
  }
  if (est.long_term_ms > est.current_ms) return QueueClass::kExpedited;
  if (est.current_ms > est.long_term_ms) return QueueClass::kDeferred;
  return QueueClass::kNormal;
}

EnergyLedger::EnergyLedger(const NetworkGraph& graph) {
  for (const Node& node : graph.nodes()) {
    if (node.role != NodeRole::kServer) entries_[node.id] = 0;
  }
}

void EnergyLedger::Record(const Path& path, const NetworkGraph& graph) {
  if (path.size() < 2) {
    throw Error(ErrorCode::kEmptyPath,
                "path '" + PathToString(path) + "' has no links");
  }
  std::vector<double> increments;
  increments.reserve(path.size() - 1);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    increments.push_back(graph.GetLink(path[i], path[i + 1]).energy);
  }
  for (std::size_t i = 0; i < increments.size(); ++i) {
    entries_[path[i]] += increments[i];
  }
}

double EnergyLedger::Energy(const NodeId& node) const {
  auto it = entries_.find(node);
  return it == entries_.end() ? 0.0 : it->second;
}

double EnergyLedger::Total() const {
  double total = 0;
  for (const auto& [node, energy] : entries_) total += energy;
  return total;
}

EnergyLedger RecordTraversal(EnergyLedger ledger, const Path& path,
                             const NetworkGraph& graph) {
  ledger.Record(path, graph);
  return ledger;
}

ServerLoadModel::ServerLoadModel(double window_ms, double processing_delay_ms)
    : window_ms_(window_ms), processing_delay_ms_(processing_delay_ms) {
  if (!(window_ms > 0)) {
    throw Error(ErrorCode::kInvalidConfig, "load window must be positive");
  }
  set_processing_delay_ms(processing_delay_ms);
}

void ServerLoadModel::set_processing_delay_ms(double ms) {
  if (!(ms >= 0)) {
    throw Error(ErrorCode::kInvalidConfig,
                "processing delay must be non-negative");
  }
  processing_delay_ms_ = ms;
}

void ServerLoadModel::AddRequest(double now_ms) {
  double start = std::max(now_ms, busy_until_ms_);
  AddBusy(start, processing_delay_ms_);
  Prune(now_ms);
}

void ServerLoadModel::AddBusy(double start_ms, double duration_ms) {
  if (duration_ms <= 0) return;
  jobs_.emplace_back(start_ms, start_ms + duration_ms);
  busy_until_ms_ = std::max(busy_until_ms_, start_ms + duration_ms);
}

void ServerLoadModel::Prune(double now_ms) {
  while (!jobs_.empty() && jobs_.front().second < now_ms - window_ms_) {
    jobs_.pop_front();
  }
}

double ServerLoadModel::Sample(double now_ms) const {
  const double lo = now_ms - window_ms_;
  double busy = 0;
  for (const auto& [start, end] : jobs_) {
    double overlap = std::min(end, now_ms) - std::max(start, lo);
    if (overlap > 0) busy += overlap;
  }
  return std::max(0.0, busy / window_ms_);
}

}  // namespace asr
