#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pal/core/types.hpp"

namespace pal {

using Bytes = std::vector<std::byte>;
using ByteView = std::span<const std::byte>;

/// Whether vectors on the wire carry their own element count. Fixed-size
/// runs omit it; variable-size runs prefix every vector with a u32 count.
enum class SizeMode : std::uint8_t { Fixed, Prefixed };

inline SizeMode size_mode(bool fixed_size_data) {
  return fixed_size_data ? SizeMode::Fixed : SizeMode::Prefixed;
}

/// Little-endian primitive writer.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(Bytes buffer) : buf_(std::move(buffer)) {}

  void put_u8(std::uint8_t v);
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_f64(double v);
  void put_doubles(std::span<const double> values, SizeMode mode);
  void put_bytes(ByteView bytes);

  const Bytes& bytes() const& noexcept { return buf_; }
  Bytes take() && noexcept { return std::move(buf_); }

 private:
  Bytes buf_;
};

/// Little-endian primitive reader; throws ProtocolError on truncation.
class ByteReader {
 public:
  explicit ByteReader(ByteView bytes) : bytes_(bytes) {}

  std::uint8_t get_u8();
  std::uint32_t get_u32();
  std::uint64_t get_u64();
  double get_f64();
  /// Reads a prefixed vector, or exactly `fixed_count` doubles in Fixed mode.
  std::vector<double> get_doubles(SizeMode mode, std::size_t fixed_count = 0);

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  bool done() const noexcept { return remaining() == 0; }
  void expect_done() const;

 private:
  ByteView take(std::size_t n);

  ByteView bytes_;
  std::size_t pos_ = 0;
};

/// Concatenated little-endian f64 values, prefixed with a u32 count in
/// Prefixed mode.
Bytes serialize_sample(const Sample& s, SizeMode mode);

/// Inverse of serialize_sample. In Fixed mode the whole buffer is the sample.
Sample deserialize_sample(ByteView bytes, SizeMode mode);

/// input then label. Fixed mode needs the input dim to split the buffer.
Bytes serialize_labeled(const LabeledSample& ls, SizeMode mode);
LabeledSample deserialize_labeled(ByteView bytes, SizeMode mode, std::size_t input_dim = 0);

Bytes serialize_weights(const WeightVector& w, SizeMode mode);
WeightVector deserialize_weights(ByteView bytes, SizeMode mode);

}  // namespace pal
