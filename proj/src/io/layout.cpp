#include "pal/io/layout.hpp"

#include <fmt/format.h>

namespace pal {

ResultsLayout::ResultsLayout(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(logs_dir());
}

std::filesystem::path ResultsLayout::log_file(const WorkerId& w) const {
  return logs_dir() / fmt::format("{}_{}.log", kernel_name(w.kernel), w.rank);
}

std::filesystem::path ResultsLayout::generator_data(std::uint32_t rank) const {
  return root_ / fmt::format("generator_data_{}", rank);
}

std::filesystem::path ResultsLayout::retrain_history(std::uint32_t rank) const {
  return root_ / fmt::format("retrain_history_{}.json", rank);
}

std::filesystem::path ResultsLayout::prediction_state(std::uint32_t rank) const {
  return root_ / fmt::format("prediction_state_{}.txt", rank);
}

std::filesystem::path ResultsLayout::oracle_log(std::uint32_t rank) const {
  return root_ / fmt::format("oracle_log_{}.txt", rank);
}

std::filesystem::path ResultsLayout::progress_file(const WorkerId& w) const {
  switch (w.kernel) {
    case Kernel::Prediction: return prediction_state(w.rank);
    case Kernel::Generator: return generator_data(w.rank);
    case Kernel::Oracle: return oracle_log(w.rank);
    case Kernel::Training: return retrain_history(w.rank);
    case Kernel::Manager: return manager_progress();
    case Kernel::Exchange: return exchange_progress();
  }
  return root_;
}

}  // namespace pal
