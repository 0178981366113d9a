#pragma once

#include <stdexcept>
#include <string>

namespace pal {

/// Invalid or incomplete run settings. `key()` names the offending setting
/// when there is one; `line()` is the 1-based config file line, or 0.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::string message, std::string key = {}, int line = 0)
      : std::runtime_error(std::move(message)), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

/// A message peer terminated before the operation could complete.
class DeadWorker : public std::runtime_error {
 public:
  explicit DeadWorker(std::string worker)
      : std::runtime_error("dead worker: " + worker), worker_(std::move(worker)) {}

  const std::string& worker() const noexcept { return worker_; }

 private:
  std::string worker_;
};

/// scatter() called with a payload list that does not match the destination set.
class LengthMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A weight vector whose size differs from the model's weight size.
class SizeMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed wire data or a message that violates the controller protocol.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ComparisonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The analytical parallel runtime is zero, so the speedup ratio is undefined.
class DegenerateWorkload : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pal
