#pragma once

#include <memory>

#include <spdlog/logger.h>

#include "pal/io/layout.hpp"

namespace pal {

/// File logger for one worker at logs/<kernel>_<rank>.log. Not registered
/// globally, so repeated runs in one process do not clash.
std::shared_ptr<spdlog::logger> make_worker_logger(const ResultsLayout& layout, const WorkerId& w);

/// Logger that discards everything.
std::shared_ptr<spdlog::logger> null_logger();

}  // namespace pal
