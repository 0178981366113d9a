#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pal/kernels/interfaces.hpp"
#include "pal/kernels/runtime.hpp"

namespace pal {

struct ExchangeStats {
  std::uint64_t rounds = 0;
  std::uint64_t selected = 0;
  /// Completion time of every round.
  std::vector<Clock::time_point> round_ends;
};

/// Exchange loop: gathers one input per generator, broadcasts the batch to
/// the predictors, gathers their predictions, applies the selection hook,
/// scatters feedback and forwards picks to the manager. It never waits on
/// the manager except for StopRun. After `rounds` rounds it asks the manager
/// to stop.
ExchangeStats run_exchange(WorkerEnv& env, const SelectionHook& selection, std::optional<std::uint64_t> rounds);

}  // namespace pal
