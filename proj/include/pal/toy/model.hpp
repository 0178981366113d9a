#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "pal/core/types.hpp"

namespace pal {

/// splitmix64 over the parts, so (seed, kernel, rank) tuples give unrelated
/// generator streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

Sample randn_sample(std::mt19937_64& rng, std::size_t dim);

/// y = W x with a 4x4 row-major W.
class ToyLinearModel {
 public:
  static constexpr std::size_t kDim = 4;
  static constexpr std::size_t kWeights = kDim * kDim;

  ToyLinearModel() { w_.fill(0.0); }
  explicit ToyLinearModel(const std::array<double, kWeights>& w) : w_(w) {}

  static ToyLinearModel identity();
  /// Standard-normal entries scaled by 1/2, drawn from `seed`.
  static ToyLinearModel random(std::uint64_t seed);

  /// Throws std::invalid_argument unless x.dim() == 4.
  Sample apply(const Sample& x) const;

  WeightVector weights() const;
  /// Throws SizeMismatch unless w.size() == 16.
  void set_weights(const WeightVector& w);

  std::array<double, kWeights>& raw() noexcept { return w_; }
  const std::array<double, kWeights>& raw() const noexcept { return w_; }

 private:
  std::array<double, kWeights> w_;
};

/// Labels are G x plus optional Gaussian noise. The noise is a function of
/// (seed, x) so the same input always gets the same label.
class ToyGroundTruth {
 public:
  ToyGroundTruth(std::uint64_t seed, double noise_scale);

  Sample label(const Sample& x) const;
  const ToyLinearModel& matrix() const noexcept { return g_; }

 private:
  std::uint64_t seed_;
  double noise_scale_;
  ToyLinearModel g_;
};

}  // namespace pal
