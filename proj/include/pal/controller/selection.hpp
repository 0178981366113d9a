#pragma once

#include <cstddef>
#include <vector>

#include "pal/core/types.hpp"
#include "pal/kernels/interfaces.hpp"

namespace pal {

/// Per-dimension sample standard deviation (divisor n - 1) across the
/// committee's predictions for one item. Needs at least two members.
std::vector<double> committee_std(const std::vector<Sample>& member_predictions);

/// Committee mean per dimension.
Sample committee_mean(const std::vector<Sample>& member_predictions);

/// Default selection hook. An input whose committee std exceeds `threshold`
/// in any dimension goes to the oracle and its generator gets the all-zero
/// restart sentinel; every other generator gets the committee mean.
/// Throws ConfigError with fewer than two members.
SelectionDecision prediction_check(const std::vector<Sample>& inputs, const CommitteeBatch& batch, double threshold);

/// Default adjustment hook: indices of the entries whose std exceeds
/// `threshold` in some dimension, ordered by mean std, largest first. Ties
/// keep buffer order.
std::vector<std::size_t> adjust_order(const std::vector<Sample>& entries, const CommitteeBatch& fresh, double threshold);

/// adjust_order applied to the entries themselves.
std::vector<Sample> adjust_oracle_buffer(const std::vector<Sample>& entries, const CommitteeBatch& fresh,
                                         double threshold);

/// Throws ProtocolError when a hook's decision breaks the shape contract:
/// wrong feedback count, or an oracle pick that is not one of `inputs`.
void validate_decision(const SelectionDecision& d, const std::vector<Sample>& inputs);

/// Drops bit-identical repeats, keeping first occurrences in order.
std::vector<Sample> dedup_bit_exact(std::vector<Sample> xs);

/// Throws ProtocolError unless `order` is a list of distinct indices below `n`.
void validate_adjust_order(const std::vector<std::size_t>& order, std::size_t n);

}  // namespace pal
