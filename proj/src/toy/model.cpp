#include "pal/toy/model.hpp"

#include <bit>
#include <stdexcept>

#include <fmt/format.h>

#include "pal/core/errors.hpp"

namespace pal {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(splitmix(seed) ^ a) ^ b);
}

Sample randn_sample(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = n01(rng);
  return Sample(std::move(v));
}

ToyLinearModel ToyLinearModel::identity() {
  ToyLinearModel m;
  for (std::size_t i = 0; i < kDim; ++i) m.w_[i * kDim + i] = 1.0;
  return m;
}

ToyLinearModel ToyLinearModel::random(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  ToyLinearModel m;
  for (auto& w : m.w_) w = 0.5 * n01(rng);
  return m;
}

Sample ToyLinearModel::apply(const Sample& x) const {
  if (x.dim() != kDim) throw std::invalid_argument(fmt::format("toy model expects dim {}, got {}", kDim, x.dim()));
  std::vector<double> y(kDim, 0.0);
  for (std::size_t i = 0; i < kDim; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < kDim; ++j) acc += w_[i * kDim + j] * x[j];
    y[i] = acc;
  }
  return Sample(std::move(y));
}

WeightVector ToyLinearModel::weights() const { return WeightVector(std::vector<double>(w_.begin(), w_.end())); }

void ToyLinearModel::set_weights(const WeightVector& w) {
  if (w.size() != kWeights) throw SizeMismatch(fmt::format("expected {} weights, got {}", kWeights, w.size()));
  std::copy(w.values().begin(), w.values().end(), w_.begin());
}

ToyGroundTruth::ToyGroundTruth(std::uint64_t seed, double noise_scale)
    : seed_(seed), noise_scale_(noise_scale) {
  std::mt19937_64 rng(derive_seed(seed, 0x47));
  std::normal_distribution<double> n01(0.0, 1.0);
  for (auto& w : g_.raw()) w = n01(rng);
}

Sample ToyGroundTruth::label(const Sample& x) const {
  auto y = g_.apply(x);
  if (noise_scale_ == 0.0) return y;
  std::uint64_t h = derive_seed(seed_, 0x4e);
  for (double v : x.values()) h = derive_seed(h, std::bit_cast<std::uint64_t>(v));
  std::mt19937_64 rng(h);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> noisy(y.values().begin(), y.values().end());
  for (auto& v : noisy) v += noise_scale_ * n01(rng);
  return Sample(std::move(noisy));
}

}  // namespace pal
