#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "pal/core/types.hpp"

namespace pal {

struct OracleTask {
  std::uint64_t id = 0;
  Sample input;
};

/// Selected inputs waiting for an oracle, in dispatch order. Every entry gets
/// a run-unique id so a reordering computed on a snapshot can be applied
/// after the buffer has moved on.
class OracleInputBuffer {
 public:
  explicit OracleInputBuffer(std::size_t capacity) : capacity_(capacity) {}

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t free() const noexcept { return capacity_ - entries_.size(); }

  /// Throws std::length_error when full; callers hold back producers instead.
  std::uint64_t push(Sample s);
  std::optional<OracleTask> pop_front();
  const std::deque<OracleTask>& entries() const noexcept { return entries_; }

  /// Applies an adjustment computed on an earlier snapshot: snapshot entries
  /// still buffered are replaced by `kept` (in that order) at the front, and
  /// entries added after the snapshot follow in their current order.
  /// Returns the number of entries dropped.
  std::size_t apply_adjustment(const std::vector<std::uint64_t>& snapshot, const std::vector<std::uint64_t>& kept);

 private:
  std::deque<OracleTask> entries_;
  std::size_t capacity_;
  std::uint64_t next_id_ = 0;
};

/// Labeled samples waiting to be sent to the trainers. Handing out a batch
/// empties it.
class TrainingDataBuffer {
 public:
  explicit TrainingDataBuffer(std::size_t threshold) : threshold_(threshold) {}

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t threshold() const noexcept { return threshold_; }

  /// Returns the whole buffer once it reaches the threshold.
  std::optional<std::vector<LabeledSample>> add(LabeledSample s);
  std::vector<LabeledSample> take_all();

 private:
  std::vector<LabeledSample> entries_;
  std::size_t threshold_;
};

}  // namespace pal
