#ifndef ASR_TELEMETRY_H
#define ASR_TELEMETRY_H

#include <cstddef>
#include <deque>
#include <map>

#include "asr/netmodel.h"

namespace asr {

// Long-term (EWMA) and current delay of a link or path.
struct DelayEstimator {
  double long_term_ms = 0;
  double current_ms = 0;
  // Weight kept on the previous long-term value, in [0, 1].
  double beta = 0.9;
  bool initialized = false;

  static DelayEstimator Empty(double beta = 0.9);
  static DelayEstimator Seeded(double long_term_ms, double current_ms,
                               double beta = 0.9);
};

// long_term' = beta * long_term + (1 - beta) * sample; current' = sample.
// The first sample of an empty estimator seeds both values. Throws
// kNegativeSample.
DelayEstimator EwmaUpdate(const DelayEstimator& est, double sample_ms);

enum class QueueClass { kExpedited, kDeferred, kNormal };

const char* QueueClassName(QueueClass c);

// Path slower than usual -> deferred, faster -> expedited. Throws
// kUninitialized before the first sample.
QueueClass ClassifyPacket(const DelayEstimator& est);

// Energy spent per transmitting node. Each traversal charges a hop's link
// energy to the hop's source node, so the client carries its access link and
// routers carry their outbound links.
class EnergyLedger {
 public:
  EnergyLedger() = default;
  // Starts every client and router of the graph at zero.
  explicit EnergyLedger(const NetworkGraph& graph);

  // Throws kUnknownLink / kEmptyPath; the ledger is unchanged on error.
  void Record(const Path& path, const NetworkGraph& graph);

  double Energy(const NodeId& node) const;
  double Total() const;
  const std::map<NodeId, double>& entries() const { return entries_; }

  bool operator==(const EnergyLedger&) const = default;

 private:
  std::map<NodeId, double> entries_;
};

EnergyLedger RecordTraversal(EnergyLedger ledger, const Path& path,
                             const NetworkGraph& graph);

// Emulated server load: each request occupies the server for the current
// processing delay, served FIFO. Load is the busy fraction of a trailing
// window.
class ServerLoadModel {
 public:
  explicit ServerLoadModel(double window_ms = 100.0,
                           double processing_delay_ms = 1.0);

  double window_ms() const { return window_ms_; }
  double processing_delay_ms() const { return processing_delay_ms_; }
  void set_processing_delay_ms(double ms);

  // Queues one request arriving at `now_ms`.
  void AddRequest(double now_ms);
  // Records an explicit busy interval.
  void AddBusy(double start_ms, double duration_ms);

  // Busy time within [now - window, now] divided by the window.
  double Sample(double now_ms) const;

 private:
  void Prune(double now_ms);

  double window_ms_;
  double processing_delay_ms_;
  double busy_until_ms_ = 0;
  std::deque<std::pair<double, double>> jobs_;  // [start, end)
};

inline double SampleServerLoad(const ServerLoadModel& model, double now_ms) {
  return model.Sample(now_ms);
}

}  // namespace asr

#endif
