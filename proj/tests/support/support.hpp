#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <unistd.h>

#include "pal/core/config.hpp"
#include "pal/core/types.hpp"

namespace pal::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "pal") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Small fast toy run: 2 predictors/trainers, 2 oracles, 2 generators.
inline WorkflowConfig small_config(const std::filesystem::path& dir) {
  WorkflowConfig c;
  c.result_dir = dir;
  c.pred_workers = 2;
  c.train_workers = 2;
  c.orcl_workers = 2;
  c.gene_workers = 2;
  c.retrain_size = 4;
  c.selection_threshold = 0.0;
  c.progress_save_interval = 60.0;
  c.train_max_epochs = 5;
  c.seed = 11;
  return c;
}

inline Sample random_sample(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> d;
  std::vector<double> v(dim);
  for (auto& x : v) x = d(rng);
  return Sample(std::move(v));
}

inline void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace pal::test
