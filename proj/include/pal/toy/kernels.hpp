#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <vector>

#include "pal/core/types.hpp"
#include "pal/io/layout.hpp"
#include "pal/kernels/interfaces.hpp"
#include "pal/toy/clock.hpp"
#include "pal/toy/model.hpp"

namespace pal {

/// Initial committee weights for rank `rank`; predictor i and trainer i start
/// from the same matrix.
ToyLinearModel toy_initial_model(std::uint64_t seed, std::uint32_t rank);

class ToyPredictor final : public Predictor {
 public:
  ToyPredictor(std::uint32_t rank, ToyLinearModel model, std::shared_ptr<SimClock> clock, double latency,
               std::filesystem::path progress);

  std::vector<Sample> predict(const std::vector<Sample>& batch) override;
  void update(const WeightVector& w) override;
  std::size_t weight_size() const override { return ToyLinearModel::kWeights; }
  void save_progress() override;

  const ToyLinearModel& model() const noexcept { return model_; }

 private:
  std::uint32_t rank_;
  ToyLinearModel model_;
  std::shared_ptr<SimClock> clock_;
  double latency_;
  std::filesystem::path progress_;
  std::uint64_t predictions_ = 0;
  std::uint64_t updates_ = 0;
};

/// Follows the reference generator: a random walk that multiplies a fixed
/// random state by the feedback, restarting from a fresh random point on the
/// first call or when the feedback has a zero component.
class ToyGenerator final : public Generator {
 public:
  ToyGenerator(std::uint32_t rank, std::uint64_t seed, std::int64_t limit, std::shared_ptr<SimClock> clock,
               double latency, std::filesystem::path progress);

  Generated generate(const std::optional<Sample>& feedback) override;
  /// Appends every finished trajectory to the progress file.
  void save_progress() override;
  /// Also writes the trajectory still in progress.
  void stop_run() override;

  std::int64_t counter() const noexcept { return counter_; }
  const Sample& state() const noexcept { return state_; }

 private:
  std::uint32_t rank_;
  std::mt19937_64 rng_;
  std::int64_t counter_ = 0;
  std::int64_t limit_;
  Sample state_;
  std::vector<std::vector<Sample>> history_;
  std::shared_ptr<SimClock> clock_;
  double latency_;
  std::filesystem::path progress_;
};

class ToyOracle final : public Oracle {
 public:
  ToyOracle(std::uint32_t rank, ToyGroundTruth truth, std::shared_ptr<SimClock> clock, double latency,
            std::filesystem::path progress);

  Sample label(const Sample& input) override;
  void save_progress() override;

  std::uint64_t calls() const noexcept { return calls_; }

 private:
  std::uint32_t rank_;
  ToyGroundTruth truth_;
  std::shared_ptr<SimClock> clock_;
  double latency_;
  std::filesystem::path progress_;
  std::uint64_t calls_ = 0;
};

struct ToyTrainerOptions {
  double val_split = 0.2;
  /// Gradient step as a fraction of 1 / mean squared input norm; below 1
  /// keeps full-batch descent monotone.
  double step = 0.5;
  int max_epochs = 100;
  double epoch_latency = 0.0;
  /// Seconds of clock time after which retrain asks for a global stop.
  double time_budget = 3600.0;
};

/// Full-batch gradient descent on mean squared error, resuming from the
/// current weights on every retrain.
class ToyTrainer final : public Trainer {
 public:
  ToyTrainer(std::uint32_t rank, ToyLinearModel init, std::uint64_t split_seed, ToyTrainerOptions options,
             std::shared_ptr<SimClock> clock, std::filesystem::path progress);

  void add_trainingset(const std::vector<LabeledSample>& points) override;
  bool retrain(const InterruptProbe& interrupt) override;
  WeightVector get_weight() const override { return model_.weights(); }
  std::vector<Sample> predict(const std::vector<Sample>& batch) const override;
  std::size_t training_size() const override { return train_.size() + val_.size(); }
  /// Rewrites retrain_history_<rank>.json with every round's losses.
  void save_progress() override;

  const std::vector<LabeledSample>& train_set() const noexcept { return train_; }
  const std::vector<LabeledSample>& val_set() const noexcept { return val_; }
  const std::vector<std::vector<double>>& train_history() const noexcept { return mse_train_; }
  const std::vector<std::vector<double>>& val_history() const noexcept { return mse_val_; }
  const ToyLinearModel& model() const noexcept { return model_; }

  /// Mean over samples of the squared error norm.
  double loss(const std::vector<LabeledSample>& set) const;

 private:
  void epoch();

  std::uint32_t rank_;
  ToyLinearModel model_;
  std::mt19937_64 split_rng_;
  ToyTrainerOptions opt_;
  std::shared_ptr<SimClock> clock_;
  std::filesystem::path progress_;
  std::vector<LabeledSample> train_;
  std::vector<LabeledSample> val_;
  std::vector<std::vector<double>> mse_train_;
  std::vector<std::vector<double>> mse_val_;
};

/// Kernels for a run of the toy workload, with the default std-based
/// selection and buffer adjustment at `cfg.selection_threshold`.
KernelFactory make_toy_factory(const WorkflowConfig& cfg, std::shared_ptr<SimClock> clock);

}  // namespace pal
