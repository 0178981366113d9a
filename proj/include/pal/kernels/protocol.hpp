#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pal/core/serialize.hpp"
#include "pal/core/types.hpp"

namespace pal {

/// What a Data payload carries. The first byte of every Data payload.
enum class MessageKind : std::uint8_t {
  GenInput = 1,   // generator -> exchange: one sample
  Inputs,         // exchange -> predictors: one sample per generator
  Predictions,    // predictor -> exchange: one sample per generator
  Feedback,       // exchange -> generator: one sample
  Selection,      // exchange -> manager: inputs picked for labeling
  RoundBudget,    // exchange -> manager: requested rounds done
  OracleRequest,  // manager -> oracle: id + sample
  OracleResult,   // oracle -> manager: id + labeled sample
  TrainBatch,     // manager -> trainers: labeled samples
  RetrainDone,    // trainer -> manager: optional weights
  AdjustRequest,  // manager -> trainers: buffered inputs
  AdjustResponse, // trainer -> manager: predictions on them
};

std::string_view message_kind_name(MessageKind k) noexcept;

/// Decoded Data message. Which fields are meaningful depends on `kind`.
struct Message {
  MessageKind kind = MessageKind::GenInput;
  std::uint64_t id = 0;
  std::vector<Sample> samples;
  std::vector<LabeledSample> labeled;
  std::optional<WeightVector> weights;

  static Message of_samples(MessageKind kind, std::vector<Sample> samples);
  static Message of_sample(MessageKind kind, Sample s);

  friend bool operator==(const Message&, const Message&) = default;
};

/// Layout: [kind:1][id:8][sample list][labeled list][has_weights:1][weights].
/// A sample list is [count:4] then, in Fixed mode, [dim:4] and raw values;
/// in Prefixed mode every sample carries its own count. Labeled lists work
/// the same way with separate input and label dims. Fixed mode rejects lists
/// whose dims differ (ProtocolError).
Bytes encode_message(const Message& m, SizeMode mode);
Message decode_message(ByteView bytes, SizeMode mode);

/// Checks the kind byte without decoding the rest.
MessageKind peek_kind(ByteView bytes);

/// [kind:1][origin kernel:1][origin rank:4][failure:1]
Bytes encode_signal(const ControlSignal& s);
ControlSignal decode_signal(ByteView bytes);

}  // namespace pal
