#include "pal/toy/clock.hpp"

namespace pal {

double RealClock::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void RealClock::sleep(double seconds) {
  if (seconds <= 0) return;
  const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
  std::unique_lock lock(m_);
  cv_.wait_until(lock, until, [this] { return interrupted_; });
}

void RealClock::interrupt() {
  {
    std::lock_guard lock(m_);
    interrupted_ = true;
  }
  cv_.notify_all();
}

bool RealClock::interrupted() const {
  std::lock_guard lock(m_);
  return interrupted_;
}

}  // namespace pal
