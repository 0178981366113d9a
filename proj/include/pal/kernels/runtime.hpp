#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/logger.h>

#include "pal/core/types.hpp"
#include "pal/kernels/interfaces.hpp"
#include "pal/kernels/protocol.hpp"
#include "pal/transport/endpoint.hpp"

namespace pal {

/// The workers of one run, by kernel.
struct Roster {
  std::vector<WorkerId> predictors;
  std::vector<WorkerId> generators;
  std::vector<WorkerId> oracles;
  std::vector<WorkerId> trainers;

  /// Oracles and trainers are left out of prediction-only runs.
  static Roster from_config(const WorkflowConfig& cfg);

  /// Every worker including manager and exchange.
  std::vector<WorkerId> all() const;
};

/// What the framework did to one worker, for shutdown and snapshot checks.
struct WorkerTally {
  std::atomic<int> saves{0};
  std::atomic<int> stop_runs{0};
  std::atomic<bool> finished{false};
  std::atomic<bool> failed{false};
  Clock::time_point finished_at{};
};

/// State shared by every worker thread of one run.
class RunControl {
 public:
  explicit RunControl(const std::vector<WorkerId>& workers);

  WorkerTally& tally(const WorkerId& w) { return *tallies_.at(w); }
  const std::map<WorkerId, std::unique_ptr<WorkerTally>>& tallies() const { return tallies_; }

  /// Set from a signal handler or another thread to request shutdown.
  void request_abort() noexcept { abort_.store(true); }
  bool abort_requested() const noexcept { return abort_.load(); }
  /// Optional external flag checked alongside request_abort().
  void watch(const std::atomic<bool>* flag) noexcept { external_ = flag; }
  bool should_abort() const noexcept { return abort_requested() || (external_ && external_->load()); }

  /// First call wins; returns whether this call did it.
  bool mark_shutdown(std::string reason);
  std::optional<Clock::time_point> shutdown_started() const;
  std::string stop_reason() const;

 private:
  std::map<WorkerId, std::unique_ptr<WorkerTally>> tallies_;
  std::atomic<bool> abort_{false};
  const std::atomic<bool>* external_ = nullptr;
  mutable std::mutex m_;
  std::optional<Clock::time_point> shutdown_at_;
  std::string reason_;
};

/// Calls save_progress whenever the interval elapses.
class SnapshotTimer {
 public:
  explicit SnapshotTimer(double interval_seconds);

  Deadline deadline() const noexcept { return next_; }
  /// Snapshots `k` when due; I/O errors are logged and swallowed.
  void poll(KernelBase& k, WorkerTally& tally, spdlog::logger& log);

 private:
  Clock::duration interval_;
  Deadline next_;
};

/// Everything a worker loop needs besides its kernel.
struct WorkerEnv {
  Endpoint ep;
  const WorkflowConfig& cfg;
  const Roster& roster;
  RunControl& control;
  std::shared_ptr<spdlog::logger> log;

  WorkerId self() const noexcept { return ep.self(); }
  WorkerTally& tally() { return control.tally(self()); }
  SizeMode mode() const noexcept { return ep.size_mode(); }

  void send_message(const WorkerId& dst, const Message& m) { ep.send(dst, Tag::Data, encode_message(m, mode())); }
  void send_signal(const WorkerId& dst, const ControlSignal& s) { ep.send(dst, Tag::Signal, encode_signal(s)); }
};

/// Final snapshot, then stop_run, each exactly once, then closes the
/// endpoint. Kernel errors here are logged; shutdown carries on.
void finish_worker(WorkerEnv& env, KernelBase& k);

/// Tells the manager this worker wants the run to stop (voluntarily or
/// because of a failure). A manager that is already gone is ignored.
void report_stop(WorkerEnv& env, bool failure);

/// Blocks until the manager's StopRun arrives or the manager is gone,
/// snapshotting `k` on schedule meanwhile.
void wait_for_stop(WorkerEnv& env, KernelBase& k, SnapshotTimer& timer);

bool is_stop(const Envelope& e);

}  // namespace pal
