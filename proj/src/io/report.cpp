#include "pal/io/report.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "pal/core/errors.hpp"

namespace pal {

std::string format_double(double v) {
  auto s = fmt::format("{}", v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string format_run_report(const RunReport& r) {
  std::string out;
  out += fmt::format("mode={}\n", r.mode);
  out += fmt::format("seed={}\n", r.seed);
  out += fmt::format("config_fingerprint={}\n", r.config_fingerprint);
  out += fmt::format("rounds_requested={}\n", r.rounds_requested ? std::to_string(*r.rounds_requested) : "none");
  out += fmt::format("rounds_completed={}\n", r.rounds_completed);
  out += fmt::format("wall_time={}\n", format_double(r.wall_time));
  out += fmt::format("oracle_calls={}\n", r.oracle_calls);
  out += fmt::format("selected={}\n", r.selected);
  out += fmt::format("flushes={}\n", r.flushes);
  out += fmt::format("weight_syncs={}\n", r.weight_syncs);
  out += fmt::format("stop_reason={}\n", r.stop_reason);
  if (!r.phases.empty()) {
    out += '\n';
    for (const auto& [name, secs] : r.phases) out += fmt::format("phase.{}={}\n", name, format_double(secs));
  }
  return out;
}

RunReport parse_run_report(const std::string& text) {
  RunReport r;
  std::istringstream in(text);
  std::string line;
  auto to_u64 = [](const std::string& v) { return static_cast<std::uint64_t>(std::stoull(v)); };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ProtocolError("report line without '=': " + line);
    const auto key = line.substr(0, eq);
    const auto value = line.substr(eq + 1);
    if (key.rfind("phase.", 0) == 0) {
      r.phases.emplace_back(key.substr(6), std::stod(value));
    } else if (key == "mode") {
      r.mode = value;
    } else if (key == "seed") {
      r.seed = to_u64(value);
    } else if (key == "config_fingerprint") {
      r.config_fingerprint = value;
    } else if (key == "rounds_requested") {
      if (value != "none") r.rounds_requested = to_u64(value);
    } else if (key == "rounds_completed") {
      r.rounds_completed = to_u64(value);
    } else if (key == "wall_time") {
      r.wall_time = std::stod(value);
    } else if (key == "oracle_calls") {
      r.oracle_calls = to_u64(value);
    } else if (key == "selected") {
      r.selected = to_u64(value);
    } else if (key == "flushes") {
      r.flushes = to_u64(value);
    } else if (key == "weight_syncs") {
      r.weight_syncs = to_u64(value);
    } else if (key == "stop_reason") {
      r.stop_reason = value;
    }
  }
  return r;
}

std::optional<std::filesystem::path> write_report_file(const std::filesystem::path& path, const std::string& text) {
  std::optional<std::filesystem::path> rotated;
  if (std::filesystem::exists(path)) {
    const auto now = std::chrono::system_clock::now();
    const auto micros =
        std::chrono::duration_cast<std::chrono::microseconds>(now.time_since_epoch()).count() % 1000000;
    const auto stamp = fmt::format("{:%Y%m%dT%H%M%S}{:06d}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)),
                                   micros);
    auto target = path.parent_path() / fmt::format("{}.{}{}", path.stem().string(), stamp, path.extension().string());
    for (int i = 1; std::filesystem::exists(target); ++i) {
      target = path.parent_path() /
               fmt::format("{}.{}-{}{}", path.stem().string(), stamp, i, path.extension().string());
    }
    std::filesystem::rename(path, target);
    rotated = target;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  return rotated;
}

}  // namespace pal
