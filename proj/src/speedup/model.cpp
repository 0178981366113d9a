#include "pal/speedup/model.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "pal/core/errors.hpp"

namespace pal {

void WorkloadParams::validate() const {
  if (!(t_oracle >= 0 && t_train >= 0 && t_gen >= 0)) throw std::invalid_argument("times must be >= 0");
  if (P < 1 || P > N) throw std::invalid_argument(fmt::format("need 1 <= P <= N, got P={} N={}", P, N));
}

// Both times are computed as (N t_o + P t_t + P t_g) / P and max(...) / P:
// the common factor 1/P cancels in the ratio, so N/P is never rounded on
// its own.

double t_serial(const WorkloadParams& p) {
  p.validate();
  const double n = static_cast<double>(p.N), pp = static_cast<double>(p.P);
  return (n * p.t_oracle + pp * p.t_train + pp * p.t_gen) / pp;
}

double t_parallel(const WorkloadParams& p) {
  p.validate();
  const double n = static_cast<double>(p.N), pp = static_cast<double>(p.P);
  return std::max({n * p.t_oracle, pp * p.t_train, pp * p.t_gen}) / pp;
}

double speedup(const WorkloadParams& p) {
  p.validate();
  const double n = static_cast<double>(p.N), pp = static_cast<double>(p.P);
  const double label = n * p.t_oracle, train = pp * p.t_train, gen = pp * p.t_gen;
  const double par = std::max({label, train, gen});
  if (par == 0.0) throw DegenerateWorkload("parallel runtime is zero");
  return (label + train + gen) / par;
}

WorkloadParams preset(std::string_view name) {
  if (name == "uc1") return {3600.0, 3600.0, 0.0, 1, 1};
  if (name == "uc2") return {10.0, 3600.0, 0.0, 1, 1};
  if (name == "uc3") return {600.0, 600.0, 600.0, 1, 1};
  throw std::invalid_argument(fmt::format("unknown preset '{}'", name));
}

std::string ComparisonReport::format() const {
  return fmt::format(
      "serial_wall={}\nparallel_wall={}\nmeasured_speedup={}\nanalytical_speedup={}\ntolerance={}\nbound={}\n"
      "pass={}\n",
      serial_wall, parallel_wall, measured, analytical, tolerance, bound, pass ? "true" : "false");
}

ComparisonReport compare_measured(const RunReport& serial, const RunReport& parallel, const WorkloadParams& p,
                                  double tolerance) {
  if (serial.config_fingerprint != parallel.config_fingerprint) {
    throw ComparisonError(fmt::format("config fingerprints differ: {} vs {}", serial.config_fingerprint,
                                      parallel.config_fingerprint));
  }
  if (serial.seed != parallel.seed) throw ComparisonError("seeds differ");
  if (serial.rounds_requested != parallel.rounds_requested) throw ComparisonError("requested rounds differ");
  if (serial.rounds_completed != parallel.rounds_completed) {
    throw ComparisonError(fmt::format("completed rounds differ: {} vs {}", serial.rounds_completed,
                                      parallel.rounds_completed));
  }
  if (tolerance < 0 || tolerance >= 1) throw std::invalid_argument("tolerance must be in [0, 1)");

  ComparisonReport c;
  c.analytical = speedup(p);
  if (!(serial.wall_time > 0 && parallel.wall_time > 0)) throw DegenerateWorkload("measured wall time is zero");
  c.serial_wall = serial.wall_time;
  c.parallel_wall = parallel.wall_time;
  c.measured = serial.wall_time / parallel.wall_time;
  c.tolerance = tolerance;
  c.bound = c.analytical * (1.0 - tolerance);
  c.pass = c.measured >= c.bound;
  return c;
}

}  // namespace pal
