#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace pal {

/// One flat vector of doubles: a generator output, a predictor input or
/// output, an oracle input or label.
class Sample {
 public:
  Sample() = default;
  explicit Sample(std::vector<double> values) : values_(std::move(values)) {}
  Sample(std::initializer_list<double> values) : values_(values) {}

  static Sample zeros(std::size_t dim) { return Sample(std::vector<double>(dim, 0.0)); }

  std::size_t dim() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// True when any component is exactly zero (the restart sentinel check).
  bool any_zero() const noexcept;
  bool all_zero() const noexcept;

  /// Bit-exact equality: distinguishes -0.0 from 0.0 and matches identical NaNs.
  bool bit_equal(const Sample& other) const noexcept;

  friend bool operator==(const Sample&, const Sample&) = default;

 private:
  std::vector<double> values_;
};

struct LabeledSample {
  Sample input;
  Sample label;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

/// Committee predictions: `per_item[i][m]` is member m's prediction for item i.
/// Items are generator inputs (ordered by generator rank) or buffered oracle
/// inputs, depending on who built the batch.
struct CommitteeBatch {
  std::vector<std::vector<Sample>> per_item;

  std::size_t items() const noexcept { return per_item.size(); }
  std::size_t members() const noexcept { return per_item.empty() ? 0 : per_item.front().size(); }

  /// Builds a batch from member-major predictions (`by_member[m][i]`).
  static CommitteeBatch from_members(const std::vector<std::vector<Sample>>& by_member);
};

class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> values_;
};

enum class Kernel : std::uint8_t { Prediction, Generator, Oracle, Training, Manager, Exchange };

std::string_view kernel_name(Kernel k) noexcept;

struct WorkerId {
  Kernel kernel = Kernel::Manager;
  std::uint32_t rank = 0;

  static constexpr WorkerId manager() { return {Kernel::Manager, 0}; }
  static constexpr WorkerId exchange() { return {Kernel::Exchange, 0}; }

  std::string str() const;

  friend auto operator<=>(const WorkerId&, const WorkerId&) = default;
};

enum class RunMode : std::uint8_t { Parallel, Serial, Estimate };

std::string_view run_mode_name(RunMode m) noexcept;

/// Validated run settings. Keys not covered by the core schema (toy workload
/// latencies, capacities) are kept here too so one file drives a run.
struct WorkflowConfig {
  std::filesystem::path result_dir;
  int pred_workers = 0;
  int orcl_workers = 0;
  int gene_workers = 0;
  int train_workers = 0;
  bool fixed_size_data = true;
  int retrain_size = 1;
  bool dynamic_oracle_list = false;
  double progress_save_interval = 60.0;
  double oracle_latency = 0.0;
  double selection_threshold = 0.0;
  std::uint64_t seed = 0;
  RunMode mode = RunMode::Parallel;

  /// Oracle and training kernels are not started; the run is a plain
  /// generation/prediction loop.
  bool prediction_only = false;
  std::size_t oracle_buffer_capacity = 10000;
  std::size_t channel_capacity = 1024;
  /// Trainer rounds between weight pushes to the paired predictor.
  int weight_sync_interval = 1;

  // Toy workload parameters.
  double gen_latency = 0.0;
  double pred_latency = 0.0;
  double train_epoch_latency = 0.0;
  int train_max_epochs = 100;
  double train_time_budget = 3600.0;
  double train_step = 0.5;
  double val_split = 0.2;
  std::int64_t gen_limit = 300000;
  double noise_scale = 0.0;

  int total_workers() const noexcept {
    return pred_workers + orcl_workers + gene_workers + train_workers + 2;
  }
  /// Workers actually started, which excludes oracles and trainers in
  /// prediction-only runs.
  int active_workers() const noexcept {
    return prediction_only ? pred_workers + gene_workers + 2 : total_workers();
  }
};

enum class SignalKind : std::uint8_t {
  StopRun,
  NewDataArrived,
  WeightSync,
  OracleRequest,
  OracleResult,
  TrainBroadcast,
};

struct ControlSignal {
  SignalKind kind = SignalKind::StopRun;
  WorkerId origin;
  /// Set when the signal reports a kernel or protocol failure rather than a
  /// voluntary stop request.
  bool failure = false;

  /// A voluntary stop request. Throws std::invalid_argument unless `origin`
  /// is a generator or trainer.
  static ControlSignal stop_request(WorkerId origin);
  static ControlSignal failure_report(WorkerId origin);

  friend bool operator==(const ControlSignal&, const ControlSignal&) = default;
};

}  // namespace pal
