#include "pal/io/logging.hpp"

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/null_sink.h>

namespace pal {

std::shared_ptr<spdlog::logger> make_worker_logger(const ResultsLayout& layout, const WorkerId& w) {
  auto sink = std::make_shared<spdlog::sinks::basic_file_sink_mt>(layout.log_file(w).string(), true);
  auto log = std::make_shared<spdlog::logger>(w.str(), std::move(sink));
  log->set_pattern("%Y-%m-%d %H:%M:%S.%e %l %n: %v");
  log->flush_on(spdlog::level::warn);
  return log;
}

std::shared_ptr<spdlog::logger> null_logger() {
  return std::make_shared<spdlog::logger>("null", std::make_shared<spdlog::sinks::null_sink_mt>());
}

}  // namespace pal
