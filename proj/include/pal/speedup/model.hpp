#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "pal/io/report.hpp"

namespace pal {

struct WorkloadParams {
  double t_oracle = 0.0;  // seconds per labeled sample
  double t_train = 0.0;   // seconds per training round
  double t_gen = 0.0;     // seconds per generation/prediction block
  std::uint64_t N = 1;    // samples to label
  std::uint64_t P = 1;    // parallel oracle workers

  /// Throws std::invalid_argument unless times are >= 0 and 1 <= P <= N.
  void validate() const;
};

/// (N/P) t_oracle + t_train + t_gen
double t_serial(const WorkloadParams& p);
/// max((N/P) t_oracle, t_train, t_gen)
double t_parallel(const WorkloadParams& p);
/// t_serial / t_parallel; throws DegenerateWorkload when t_parallel is 0.
double speedup(const WorkloadParams& p);

/// The three reference workloads: "uc1" (labeling and training equally
/// slow), "uc2" (training dominates), "uc3" (all three equal). N = P = 1.
WorkloadParams preset(std::string_view name);

struct ComparisonReport {
  double serial_wall = 0.0;
  double parallel_wall = 0.0;
  double measured = 0.0;
  double analytical = 0.0;
  double tolerance = 0.15;
  double bound = 0.0;  // analytical * (1 - tolerance)
  bool pass = false;

  std::string format() const;
};

/// Throws ComparisonError unless both reports come from the same settings,
/// seed and round count, with serial/parallel modes; DegenerateWorkload when
/// the analytical parallel time is 0 or a measured wall time is not positive.
ComparisonReport compare_measured(const RunReport& serial, const RunReport& parallel, const WorkloadParams& p,
                                  double tolerance = 0.15);

}  // namespace pal
