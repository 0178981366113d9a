#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pal {

struct RunReport {
  std::string mode;
  std::uint64_t seed = 0;
  std::string config_fingerprint;
  std::optional<std::uint64_t> rounds_requested;
  std::uint64_t rounds_completed = 0;
  double wall_time = 0.0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t selected = 0;
  std::uint64_t flushes = 0;
  std::uint64_t weight_syncs = 0;
  std::string stop_reason;
  /// Wall seconds per named phase, in insertion order.
  std::vector<std::pair<std::string, double>> phases;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// key=value blocks: the run header, then one `phase.<name>=seconds` line per
/// phase when there are any.
std::string format_run_report(const RunReport& r);
RunReport parse_run_report(const std::string& text);

/// Writes `path`. An existing file is first renamed to
/// `<stem>.<timestamp><ext>` so earlier reports survive; returns that name.
std::optional<std::filesystem::path> write_report_file(const std::filesystem::path& path, const std::string& text);

inline std::optional<std::filesystem::path> write_run_report(const std::filesystem::path& path, const RunReport& r) {
  return write_report_file(path, format_run_report(r));
}

/// Shortest text that reads back to the same double; integral values keep a
/// trailing ".0".
std::string format_double(double v);

}  // namespace pal
