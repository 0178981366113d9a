#pragma once

#include <filesystem>

#include "pal/core/types.hpp"

namespace pal {

/// File names under a run's result directory. Every per-worker file name
/// carries the worker's rank.
class ResultsLayout {
 public:
  /// Creates `root` and its logs/ subdirectory when missing.
  explicit ResultsLayout(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path logs_dir() const { return root_ / "logs"; }
  std::filesystem::path log_file(const WorkerId& w) const;

  std::filesystem::path run_report() const { return root_ / "run_report.txt"; }
  std::filesystem::path comparison_report() const { return root_ / "comparison_report.txt"; }

  std::filesystem::path generator_data(std::uint32_t rank) const;
  std::filesystem::path retrain_history(std::uint32_t rank) const;
  std::filesystem::path prediction_state(std::uint32_t rank) const;
  std::filesystem::path oracle_log(std::uint32_t rank) const;
  std::filesystem::path manager_progress() const { return root_ / "manager_progress.txt"; }
  std::filesystem::path exchange_progress() const { return root_ / "exchange_progress.txt"; }

  /// The progress artifact owned by `w`.
  std::filesystem::path progress_file(const WorkerId& w) const;

 private:
  std::filesystem::path root_;
};

}  // namespace pal
