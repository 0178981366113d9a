#include "pal/controller/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "pal/core/errors.hpp"

namespace pal {
namespace {

void check_members(const std::vector<Sample>& preds) {
  if (preds.size() < 2) {
    throw ConfigError(fmt::format("committee std needs at least 2 prediction workers, got {}", preds.size()),
                      "pred_process");
  }
  for (const auto& p : preds) {
    if (p.dim() != preds.front().dim()) throw ProtocolError("committee predictions differ in dim");
  }
}

bool exceeds(const std::vector<double>& std, double threshold) {
  return std::any_of(std.begin(), std.end(), [threshold](double s) { return s > threshold; });
}

}  // namespace

Sample committee_mean(const std::vector<Sample>& preds) {
  if (preds.empty()) return {};
  std::vector<double> mean(preds.front().dim(), 0.0);
  for (const auto& p : preds) {
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += p[d];
  }
  for (auto& m : mean) m /= static_cast<double>(preds.size());
  return Sample(std::move(mean));
}

std::vector<double> committee_std(const std::vector<Sample>& preds) {
  check_members(preds);
  const auto mean = committee_mean(preds);
  std::vector<double> out(mean.dim(), 0.0);
  for (const auto& p : preds) {
    for (std::size_t d = 0; d < out.size(); ++d) {
      const double e = p[d] - mean[d];
      out[d] += e * e;
    }
  }
  for (auto& v : out) v = std::sqrt(v / static_cast<double>(preds.size() - 1));
  return out;
}

SelectionDecision prediction_check(const std::vector<Sample>& inputs, const CommitteeBatch& batch, double threshold) {
  if (batch.items() != inputs.size()) {
    throw ProtocolError(fmt::format("{} inputs but predictions for {}", inputs.size(), batch.items()));
  }
  SelectionDecision d;
  d.to_generators.reserve(inputs.size());
  for (std::size_t g = 0; g < inputs.size(); ++g) {
    const auto& preds = batch.per_item[g];
    if (exceeds(committee_std(preds), threshold)) {
      d.to_oracle.push_back(inputs[g]);
      d.to_generators.push_back(Sample::zeros(preds.front().dim()));
    } else {
      d.to_generators.push_back(committee_mean(preds));
    }
  }
  return d;
}

std::vector<std::size_t> adjust_order(const std::vector<Sample>& entries, const CommitteeBatch& fresh,
                                      double threshold) {
  if (fresh.items() != entries.size()) {
    throw ProtocolError(fmt::format("{} buffer entries but predictions for {}", entries.size(), fresh.items()));
  }
  std::vector<double> mean_std(entries.size());
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto s = committee_std(fresh.per_item[i]);
    mean_std[i] = s.empty() ? 0.0 : std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    if (exceeds(s, threshold)) keep.push_back(i);
  }
  std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) { return mean_std[a] > mean_std[b]; });
  return keep;
}

std::vector<Sample> adjust_oracle_buffer(const std::vector<Sample>& entries, const CommitteeBatch& fresh,
                                         double threshold) {
  std::vector<Sample> out;
  for (auto i : adjust_order(entries, fresh, threshold)) out.push_back(entries[i]);
  return out;
}

void validate_decision(const SelectionDecision& d, const std::vector<Sample>& inputs) {
  if (d.to_generators.size() != inputs.size()) {
    throw ProtocolError(
        fmt::format("selection returned {} feedback samples for {} generators", d.to_generators.size(), inputs.size()));
  }
  for (const auto& pick : d.to_oracle) {
    const bool known =
        std::any_of(inputs.begin(), inputs.end(), [&pick](const Sample& in) { return in.bit_equal(pick); });
    if (!known) throw ProtocolError("selection picked a sample that no generator submitted this round");
  }
}

std::vector<Sample> dedup_bit_exact(std::vector<Sample> xs) {
  std::vector<Sample> out;
  out.reserve(xs.size());
  for (auto& x : xs) {
    const bool seen = std::any_of(out.begin(), out.end(), [&x](const Sample& y) { return y.bit_equal(x); });
    if (!seen) out.push_back(std::move(x));
  }
  return out;
}

void validate_adjust_order(const std::vector<std::size_t>& order, std::size_t n) {
  std::vector<bool> seen(n, false);
  for (auto i : order) {
    if (i >= n || seen[i]) throw ProtocolError(fmt::format("adjust hook returned bad index {}", i));
    seen[i] = true;
  }
}

}  // namespace pal
