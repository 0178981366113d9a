#include "pal/core/types.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include <fmt/format.h>

namespace pal {

bool Sample::any_zero() const noexcept {
  return std::any_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

bool Sample::all_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

bool Sample::bit_equal(const Sample& other) const noexcept {
  return values_.size() == other.values_.size() &&
         std::equal(values_.begin(), values_.end(), other.values_.begin(), [](double a, double b) {
           return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
         });
}

CommitteeBatch CommitteeBatch::from_members(const std::vector<std::vector<Sample>>& by_member) {
  CommitteeBatch out;
  if (by_member.empty()) return out;
  const std::size_t items = by_member.front().size();
  out.per_item.assign(items, {});
  for (auto& row : out.per_item) row.reserve(by_member.size());
  for (const auto& member : by_member) {
    if (member.size() != items) {
      throw std::invalid_argument("committee members returned different numbers of predictions");
    }
    for (std::size_t i = 0; i < items; ++i) out.per_item[i].push_back(member[i]);
  }
  return out;
}

std::string_view kernel_name(Kernel k) noexcept {
  switch (k) {
    case Kernel::Prediction: return "prediction";
    case Kernel::Generator: return "generator";
    case Kernel::Oracle: return "oracle";
    case Kernel::Training: return "training";
    case Kernel::Manager: return "manager";
    case Kernel::Exchange: return "exchange";
  }
  return "unknown";
}

std::string WorkerId::str() const { return fmt::format("{}-{}", kernel_name(kernel), rank); }

std::string_view run_mode_name(RunMode m) noexcept {
  switch (m) {
    case RunMode::Parallel: return "parallel";
    case RunMode::Serial: return "serial";
    case RunMode::Estimate: return "estimate";
  }
  return "unknown";
}

ControlSignal ControlSignal::stop_request(WorkerId origin) {
  if (origin.kernel != Kernel::Generator && origin.kernel != Kernel::Training) {
    throw std::invalid_argument("only generators and trainers may request a stop, not " + origin.str());
  }
  return {SignalKind::StopRun, origin, false};
}

ControlSignal ControlSignal::failure_report(WorkerId origin) { return {SignalKind::StopRun, origin, true}; }

}  // namespace pal
