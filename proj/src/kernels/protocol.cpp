#include "pal/kernels/protocol.hpp"

#include <fmt/format.h>

#include "pal/core/errors.hpp"

namespace pal {
namespace {

constexpr auto kLastKind = MessageKind::AdjustResponse;
constexpr auto kLastSignal = SignalKind::TrainBroadcast;

std::uint32_t common_dim(const std::vector<Sample>& xs, std::uint32_t (*dim)(const Sample&)) {
  if (xs.empty()) return 0;
  const auto d = dim(xs.front());
  for (const auto& x : xs) {
    if (dim(x) != d) throw ProtocolError(fmt::format("fixed-size list mixes dims {} and {}", d, dim(x)));
  }
  return d;
}

std::uint32_t dim_of(const Sample& s) { return static_cast<std::uint32_t>(s.dim()); }

void put_samples(ByteWriter& w, const std::vector<Sample>& xs, SizeMode mode) {
  w.put_u32(static_cast<std::uint32_t>(xs.size()));
  if (mode == SizeMode::Fixed) w.put_u32(common_dim(xs, dim_of));
  for (const auto& x : xs) w.put_doubles(x.values(), mode);
}

std::vector<Sample> get_samples(ByteReader& r, SizeMode mode) {
  const auto n = r.get_u32();
  const auto dim = mode == SizeMode::Fixed ? r.get_u32() : 0u;
  if (mode == SizeMode::Fixed && n > 0 && dim == 0) throw ProtocolError("fixed-size list with zero dim");
  std::vector<Sample> xs;
  xs.reserve(std::min<std::size_t>(n, r.remaining()));
  for (std::uint32_t i = 0; i < n; ++i) xs.emplace_back(r.get_doubles(mode, dim));
  return xs;
}

void put_labeled(ByteWriter& w, const std::vector<LabeledSample>& xs, SizeMode mode) {
  w.put_u32(static_cast<std::uint32_t>(xs.size()));
  if (mode == SizeMode::Fixed) {
    std::vector<Sample> inputs, labels;
    for (const auto& x : xs) {
      inputs.push_back(x.input);
      labels.push_back(x.label);
    }
    w.put_u32(common_dim(inputs, dim_of));
    w.put_u32(common_dim(labels, dim_of));
  }
  for (const auto& x : xs) {
    w.put_doubles(x.input.values(), mode);
    w.put_doubles(x.label.values(), mode);
  }
}

std::vector<LabeledSample> get_labeled(ByteReader& r, SizeMode mode) {
  const auto n = r.get_u32();
  std::uint32_t in_dim = 0, label_dim = 0;
  if (mode == SizeMode::Fixed) {
    in_dim = r.get_u32();
    label_dim = r.get_u32();
    if (n > 0 && (in_dim == 0 || label_dim == 0)) throw ProtocolError("fixed-size list with zero dim");
  }
  std::vector<LabeledSample> xs;
  xs.reserve(std::min<std::size_t>(n, r.remaining()));
  for (std::uint32_t i = 0; i < n; ++i) {
    Sample in(r.get_doubles(mode, in_dim));
    Sample label(r.get_doubles(mode, label_dim));
    xs.push_back({std::move(in), std::move(label)});
  }
  return xs;
}

}  // namespace

std::string_view message_kind_name(MessageKind k) noexcept {
  switch (k) {
    case MessageKind::GenInput: return "GenInput";
    case MessageKind::Inputs: return "Inputs";
    case MessageKind::Predictions: return "Predictions";
    case MessageKind::Feedback: return "Feedback";
    case MessageKind::Selection: return "Selection";
    case MessageKind::RoundBudget: return "RoundBudget";
    case MessageKind::OracleRequest: return "OracleRequest";
    case MessageKind::OracleResult: return "OracleResult";
    case MessageKind::TrainBatch: return "TrainBatch";
    case MessageKind::RetrainDone: return "RetrainDone";
    case MessageKind::AdjustRequest: return "AdjustRequest";
    case MessageKind::AdjustResponse: return "AdjustResponse";
  }
  return "?";
}

Message Message::of_samples(MessageKind kind, std::vector<Sample> samples) {
  Message m;
  m.kind = kind;
  m.samples = std::move(samples);
  return m;
}

Message Message::of_sample(MessageKind kind, Sample s) {
  return of_samples(kind, std::vector<Sample>{std::move(s)});
}

Bytes encode_message(const Message& m, SizeMode mode) {
  ByteWriter w;
  w.put_u8(static_cast<std::uint8_t>(m.kind));
  w.put_u64(m.id);
  put_samples(w, m.samples, mode);
  put_labeled(w, m.labeled, mode);
  w.put_u8(m.weights ? 1 : 0);
  // Weights are nested inside a larger message, so they always carry a count.
  if (m.weights) w.put_doubles(m.weights->values(), SizeMode::Prefixed);
  return std::move(w).take();
}

MessageKind peek_kind(ByteView bytes) {
  if (bytes.empty()) throw ProtocolError("empty message");
  const auto raw = std::to_integer<std::uint8_t>(bytes.front());
  if (raw < 1 || raw > static_cast<std::uint8_t>(kLastKind)) {
    throw ProtocolError(fmt::format("unknown message kind {}", raw));
  }
  return static_cast<MessageKind>(raw);
}

Message decode_message(ByteView bytes, SizeMode mode) {
  Message m;
  m.kind = peek_kind(bytes);
  ByteReader r(bytes.subspan(1));
  m.id = r.get_u64();
  m.samples = get_samples(r, mode);
  m.labeled = get_labeled(r, mode);
  const auto has_weights = r.get_u8();
  if (has_weights > 1) throw ProtocolError("bad weights flag");
  if (has_weights) m.weights = WeightVector(r.get_doubles(SizeMode::Prefixed));
  r.expect_done();
  return m;
}

Bytes encode_signal(const ControlSignal& s) {
  ByteWriter w;
  w.put_u8(static_cast<std::uint8_t>(s.kind));
  w.put_u8(static_cast<std::uint8_t>(s.origin.kernel));
  w.put_u32(s.origin.rank);
  w.put_u8(s.failure ? 1 : 0);
  return std::move(w).take();
}

ControlSignal decode_signal(ByteView bytes) {
  ByteReader r(bytes);
  ControlSignal s;
  const auto kind = r.get_u8();
  if (kind > static_cast<std::uint8_t>(kLastSignal)) throw ProtocolError(fmt::format("unknown signal kind {}", kind));
  s.kind = static_cast<SignalKind>(kind);
  const auto kernel = r.get_u8();
  if (kernel > static_cast<std::uint8_t>(Kernel::Exchange)) throw ProtocolError("unknown signal origin kernel");
  s.origin.kernel = static_cast<Kernel>(kernel);
  s.origin.rank = r.get_u32();
  const auto failure = r.get_u8();
  if (failure > 1) throw ProtocolError("bad failure flag");
  s.failure = failure == 1;
  r.expect_done();
  return s;
}

}  // namespace pal
