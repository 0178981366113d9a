#include "pal/controller/buffers.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace pal {

std::uint64_t OracleInputBuffer::push(Sample s) {
  if (entries_.size() >= capacity_) throw std::length_error("oracle input buffer full");
  const auto id = next_id_++;
  entries_.push_back({id, std::move(s)});
  return id;
}

std::optional<OracleTask> OracleInputBuffer::pop_front() {
  if (entries_.empty()) return std::nullopt;
  auto t = std::move(entries_.front());
  entries_.pop_front();
  return t;
}

std::size_t OracleInputBuffer::apply_adjustment(const std::vector<std::uint64_t>& snapshot,
                                                const std::vector<std::uint64_t>& kept) {
  const std::set<std::uint64_t> in_snapshot(snapshot.begin(), snapshot.end());
  std::unordered_map<std::uint64_t, OracleTask> snapshotted;
  std::deque<OracleTask> newer;
  for (auto& t : entries_) {
    if (in_snapshot.contains(t.id)) {
      snapshotted.emplace(t.id, std::move(t));
    } else {
      newer.push_back(std::move(t));
    }
  }
  std::deque<OracleTask> out;
  for (auto id : kept) {
    auto it = snapshotted.find(id);
    if (it == snapshotted.end()) continue;  // dispatched since the snapshot
    out.push_back(std::move(it->second));
    snapshotted.erase(it);
  }
  const auto dropped = snapshotted.size();
  for (auto& t : newer) out.push_back(std::move(t));
  entries_ = std::move(out);
  return dropped;
}

std::optional<std::vector<LabeledSample>> TrainingDataBuffer::add(LabeledSample s) {
  entries_.push_back(std::move(s));
  if (entries_.size() < threshold_) return std::nullopt;
  return take_all();
}

std::vector<LabeledSample> TrainingDataBuffer::take_all() {
  std::vector<LabeledSample> out;
  out.swap(entries_);
  return out;
}

}  // namespace pal
