#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>

namespace pal {

/// Time source for simulated latencies. The concurrent runner uses real
/// sleeps; the deterministic runner advances a virtual clock instead.
class SimClock {
 public:
  virtual ~SimClock() = default;
  /// Seconds since the clock was created.
  virtual double now() const = 0;
  virtual void sleep(double seconds) = 0;
};

/// Wall-clock sleeps that interrupt() cuts short, so shutdown never waits
/// for simulated work in flight.
class RealClock final : public SimClock {
 public:
  RealClock() : start_(std::chrono::steady_clock::now()) {}

  double now() const override;
  void sleep(double seconds) override;

  /// Wakes every sleeper; later sleeps return immediately.
  void interrupt();
  bool interrupted() const;

 private:
  std::chrono::steady_clock::time_point start_;
  mutable std::mutex m_;
  std::condition_variable cv_;
  bool interrupted_ = false;
};

class VirtualClock final : public SimClock {
 public:
  double now() const override { return t_; }
  void sleep(double seconds) override {
    if (seconds > 0) t_ += seconds;
  }

 private:
  double t_ = 0.0;
};

}  // namespace pal
