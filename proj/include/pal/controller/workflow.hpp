#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "pal/controller/exchange.hpp"
#include "pal/controller/manager.hpp"
#include "pal/io/report.hpp"
#include "pal/kernels/interfaces.hpp"
#include "pal/kernels/runtime.hpp"
#include "pal/transport/transport.hpp"

namespace pal {

/// One instance per worker rank, built up front so construction errors
/// surface before any thread starts.
struct KernelSet {
  std::vector<std::unique_ptr<Predictor>> predictors;
  std::vector<std::unique_ptr<Generator>> generators;
  std::vector<std::unique_ptr<Oracle>> oracles;
  std::vector<std::unique_ptr<Trainer>> trainers;

  static KernelSet build(const KernelFactory& f, const Roster& roster);
};

/// Throws ConfigError when the selection or adjustment hooks need a
/// committee of two and the run has fewer predictors or trainers.
void check_committee(const WorkflowConfig& cfg, const KernelFactory& f);

struct TallyCounts {
  int saves = 0;
  int stop_runs = 0;
  bool failed = false;
};

struct WorkflowOptions {
  /// Exchange rounds before a clean stop; unbounded when empty.
  std::optional<std::uint64_t> rounds;
  bool sockets = false;
  bool trace = false;
  /// Checked by the manager; setting it starts the normal shutdown.
  const std::atomic<bool>* abort = nullptr;
  bool write_report = true;
};

struct WorkflowResult {
  RunReport report;
  ManagerCounters counters;
  ExchangeStats exchange;
  std::map<WorkerId, TallyCounts> tallies;
  /// From the start of shutdown to the last worker's exit.
  std::optional<double> shutdown_latency;
  std::vector<TraceEntry> trace;
  bool failed = false;

  /// Exchange rounds per second between the first and last completed round.
  double exchange_throughput() const;
};

/// Concurrent run: one thread per worker over the chosen transport.
WorkflowResult run_workflow(const WorkflowConfig& cfg, const KernelFactory& f, const WorkflowOptions& opt = {});

/// Sequential baseline. Each round labels every pending selection (oracles
/// in parallel), hands all new labels to the trainers and retrains them
/// (in parallel), syncs weights, then runs one generation/prediction step
/// (generators and predictors each in parallel).
RunReport serial_run(const WorkflowConfig& cfg, const KernelFactory& f, std::uint64_t rounds, bool write_report = true);

struct DeterministicResult {
  RunReport report;
  ManagerCounters counters;
  /// Every input sent to the oracle buffer, in order.
  std::vector<Sample> selections;
  std::vector<WeightVector> final_weights;
};

/// Single-threaded replay mode. Per round, in rank order: generators,
/// predictors, selection, then each idle oracle labels one buffered input,
/// full training batches go to the trainers, trainers with new data retrain
/// uninterrupted, weights sync and the buffer is adjusted. Kernels should
/// run on a virtual clock.
DeterministicResult run_deterministic(const WorkflowConfig& cfg, const KernelFactory& f, std::uint64_t rounds,
                                      bool write_report = true);

}  // namespace pal
