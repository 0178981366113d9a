#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "pal/core/types.hpp"

namespace pal {

/// Non-blocking check handed to Trainer::retrain. True when new training
/// data (or a stop request) is waiting and the current round should end.
using InterruptProbe = std::function<bool()>;

/// Hooks every kernel shares. save_progress appends to the kernel's own
/// progress file; stop_run is called exactly once, right before the worker
/// exits.
class KernelBase {
 public:
  virtual ~KernelBase() = default;
  virtual void save_progress() {}
  virtual void stop_run() {}
};

class Predictor : public KernelBase {
 public:
  /// One prediction per input, in input order.
  virtual std::vector<Sample> predict(const std::vector<Sample>& batch) = 0;
  /// Throws SizeMismatch when w.size() != weight_size().
  virtual void update(const WeightVector& w) = 0;
  virtual std::size_t weight_size() const = 0;
};

struct Generated {
  bool stop = false;
  Sample next;
};

class Generator : public KernelBase {
 public:
  /// `feedback` is empty on the first call only.
  virtual Generated generate(const std::optional<Sample>& feedback) = 0;
};

class Oracle : public KernelBase {
 public:
  virtual Sample label(const Sample& input) = 0;
};

class Trainer : public KernelBase {
 public:
  virtual void add_trainingset(const std::vector<LabeledSample>& points) = 0;
  /// Trains until `interrupt` fires or the model's own stopping rule
  /// triggers. Returns true to request a global stop.
  virtual bool retrain(const InterruptProbe& interrupt) = 0;
  virtual WeightVector get_weight() const = 0;
  /// Inference with the current training-side model.
  virtual std::vector<Sample> predict(const std::vector<Sample>& batch) const = 0;
  virtual std::size_t training_size() const = 0;
};

struct SelectionDecision {
  std::vector<Sample> to_oracle;
  /// One feedback Sample per generator, in generator rank order.
  std::vector<Sample> to_generators;
};

/// Decides, from the generator inputs of one round and the committee's
/// predictions on them, what goes to the oracle and what each generator gets
/// back.
using SelectionHook = std::function<SelectionDecision(const std::vector<Sample>& inputs, const CommitteeBatch& batch)>;

/// Reorders or prunes the oracle buffer given fresh committee predictions on
/// its entries. Returns the indices of the entries to keep, in their new
/// order; each index at most once.
using AdjustHook = std::function<std::vector<std::size_t>(const std::vector<Sample>& entries, const CommitteeBatch& fresh)>;

/// Builds the kernel instances of one run, one call per worker rank.
struct KernelFactory {
  std::function<std::unique_ptr<Predictor>(std::uint32_t rank)> predictor;
  std::function<std::unique_ptr<Generator>(std::uint32_t rank)> generator;
  std::function<std::unique_ptr<Oracle>(std::uint32_t rank)> oracle;
  std::function<std::unique_ptr<Trainer>(std::uint32_t rank)> trainer;
  SelectionHook selection;
  AdjustHook adjust;
  /// Called once when shutdown starts so simulated work in flight can be
  /// abandoned. Optional.
  std::function<void()> abandon_work;
  /// Whether `selection` and `adjust` need a committee of at least two.
  bool std_based_selection = true;
};

}  // namespace pal
