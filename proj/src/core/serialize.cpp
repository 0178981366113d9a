#include "pal/core/serialize.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include <fmt/format.h>

#include "pal/core/errors.hpp"

namespace pal {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

namespace {

template <typename U>
void put_le(Bytes& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
  }
}

template <typename U>
U get_le(ByteView in) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(std::to_integer<std::uint8_t>(in[i])) << (8 * i);
  }
  return v;
}

}  // namespace

void ByteWriter::put_u8(std::uint8_t v) { buf_.push_back(static_cast<std::byte>(v)); }
void ByteWriter::put_u32(std::uint32_t v) { put_le(buf_, v); }
void ByteWriter::put_u64(std::uint64_t v) { put_le(buf_, v); }
void ByteWriter::put_f64(double v) { put_le(buf_, std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::put_doubles(std::span<const double> values, SizeMode mode) {
  if (mode == SizeMode::Prefixed) {
    if (values.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw ProtocolError("vector too long for u32 length prefix");
    }
    put_u32(static_cast<std::uint32_t>(values.size()));
  }
  buf_.reserve(buf_.size() + 8 * values.size());
  for (double v : values) put_f64(v);
}

void ByteWriter::put_bytes(ByteView bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

ByteView ByteReader::take(std::size_t n) {
  if (remaining() < n) {
    throw ProtocolError(fmt::format("truncated message: need {} bytes, {} left", n, remaining()));
  }
  auto out = bytes_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::get_u8() { return std::to_integer<std::uint8_t>(take(1)[0]); }
std::uint32_t ByteReader::get_u32() { return get_le<std::uint32_t>(take(4)); }
std::uint64_t ByteReader::get_u64() { return get_le<std::uint64_t>(take(8)); }
double ByteReader::get_f64() { return std::bit_cast<double>(get_le<std::uint64_t>(take(8))); }

std::vector<double> ByteReader::get_doubles(SizeMode mode, std::size_t fixed_count) {
  const std::size_t n = mode == SizeMode::Prefixed ? get_u32() : fixed_count;
  if (n > remaining() / 8) {
    throw ProtocolError(fmt::format("truncated vector: {} doubles declared, {} bytes left", n, remaining()));
  }
  std::vector<double> out(n);
  for (auto& v : out) v = get_f64();
  return out;
}

void ByteReader::expect_done() const {
  if (!done()) throw ProtocolError(fmt::format("{} trailing bytes in message", remaining()));
}

Bytes serialize_sample(const Sample& s, SizeMode mode) {
  ByteWriter w;
  w.put_doubles(s.values(), mode);
  return std::move(w).take();
}

Sample deserialize_sample(ByteView bytes, SizeMode mode) {
  if (mode == SizeMode::Fixed && bytes.size() % 8 != 0) {
    throw ProtocolError(fmt::format("fixed-size sample of {} bytes is not a multiple of 8", bytes.size()));
  }
  ByteReader r(bytes);
  auto values = r.get_doubles(mode, bytes.size() / 8);
  r.expect_done();
  return Sample(std::move(values));
}

Bytes serialize_labeled(const LabeledSample& ls, SizeMode mode) {
  ByteWriter w;
  w.put_doubles(ls.input.values(), mode);
  w.put_doubles(ls.label.values(), mode);
  return std::move(w).take();
}

LabeledSample deserialize_labeled(ByteView bytes, SizeMode mode, std::size_t input_dim) {
  ByteReader r(bytes);
  LabeledSample out;
  out.input = Sample(r.get_doubles(mode, input_dim));
  if (mode == SizeMode::Fixed) {
    if (r.remaining() % 8 != 0) throw ProtocolError("fixed-size label is not a multiple of 8 bytes");
    out.label = Sample(r.get_doubles(mode, r.remaining() / 8));
  } else {
    out.label = Sample(r.get_doubles(mode));
  }
  r.expect_done();
  return out;
}

Bytes serialize_weights(const WeightVector& w, SizeMode mode) {
  ByteWriter out;
  out.put_doubles(w.values(), mode);
  return std::move(out).take();
}

WeightVector deserialize_weights(ByteView bytes, SizeMode mode) {
  const auto s = deserialize_sample(bytes, mode);
  return WeightVector(std::vector<double>(s.values().begin(), s.values().end()));
}

}  // namespace pal
