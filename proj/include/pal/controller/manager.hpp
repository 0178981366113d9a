#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "pal/controller/buffers.hpp"
#include "pal/kernels/interfaces.hpp"
#include "pal/kernels/runtime.hpp"

namespace pal {

struct ManagerCounters {
  std::uint64_t selected = 0;      // inputs accepted into the oracle buffer
  std::uint64_t dispatched = 0;
  std::uint64_t labeled = 0;
  std::uint64_t pruned = 0;
  std::uint64_t flushes = 0;
  std::uint64_t flushed_samples = 0;
  std::uint64_t weight_syncs = 0;
  std::uint64_t adjustments = 0;
};

struct Dispatch {
  std::uint32_t oracle = 0;
  OracleTask task;
};

struct AdjustSnapshot {
  std::vector<std::uint64_t> ids;
  std::vector<Sample> inputs;
};

/// The manager's bookkeeping without any messaging, shared by the concurrent
/// manager loop and the deterministic runner.
class ManagerState {
 public:
  ManagerState(const WorkflowConfig& cfg, AdjustHook adjust);

  /// Room for `n` more oracle inputs.
  bool can_accept(std::size_t n) const noexcept { return oracle_buffer_.free() >= n; }
  void enqueue(const std::vector<Sample>& inputs);

  /// Pairs buffered inputs with idle oracles, longest-idle oracle first.
  std::vector<Dispatch> dispatch();

  /// Records a label from `oracle`; returns a batch for the trainers when the
  /// training buffer reaches retrain_size.
  std::optional<std::vector<LabeledSample>> on_label(std::uint32_t oracle, std::uint64_t id, LabeledSample ls);

  /// Records a finished retrain round. Returns a buffer snapshot to send to
  /// every trainer when dynamic adjustment is due: all trainers have finished
  /// a round since the last adjustment and none is outstanding.
  std::optional<AdjustSnapshot> on_retrain_done(std::uint32_t trainer);
  void on_weight_sync() noexcept { ++counters_.weight_syncs; }

  /// Collects one trainer's predictions on the snapshot; applies the
  /// adjustment once every trainer has answered. Returns true when applied.
  bool on_adjust_response(std::uint32_t trainer, std::vector<Sample> predictions);

  const OracleInputBuffer& oracle_buffer() const noexcept { return oracle_buffer_; }
  const TrainingDataBuffer& training_buffer() const noexcept { return training_buffer_; }
  const ManagerCounters& counters() const noexcept { return counters_; }
  std::size_t in_flight() const noexcept { return busy_.size(); }
  bool adjust_outstanding() const noexcept { return snapshot_.has_value(); }

 private:
  std::size_t trainers_;
  bool dynamic_;
  AdjustHook adjust_;
  OracleInputBuffer oracle_buffer_;
  TrainingDataBuffer training_buffer_;
  std::deque<std::uint32_t> idle_;
  std::map<std::uint32_t, std::uint64_t> busy_;
  std::set<std::uint32_t> done_since_adjust_;
  std::optional<AdjustSnapshot> snapshot_;
  std::map<std::uint32_t, std::vector<Sample>> responses_;
  ManagerCounters counters_;
};

/// Manager loop: owns both buffers, dispatches oracle work, broadcasts
/// training batches, forwards weights, runs dynamic adjustment, and drives
/// shutdown. Returns the final counters.
ManagerCounters run_manager(WorkerEnv& env, ManagerState& state, const std::function<void()>& abandon_work);

}  // namespace pal
