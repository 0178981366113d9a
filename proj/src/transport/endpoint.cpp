#include "pal/transport/endpoint.hpp"

#include <fmt/format.h>

#include "pal/core/errors.hpp"

namespace pal {

void Endpoint::send(WorkerId dst, Tag tag, Bytes payload) {
  if (tag == Tag::SizeHandshake) throw ProtocolError("size handshakes are sent implicitly");
  if (tag == Tag::Data && mode_ == SizeMode::Prefixed) {
    ByteWriter w;
    w.put_u32(static_cast<std::uint32_t>(payload.size()));
    transport_->send(Envelope{self_, dst, Tag::SizeHandshake, std::move(w).take()});
  }
  transport_->send(Envelope{self_, dst, tag, std::move(payload)});
}

Envelope Endpoint::complete_handshake(const Envelope& handshake) {
  ByteReader r(handshake.payload);
  const auto expected = r.get_u32();
  r.expect_done();
  auto data = transport_->recv(self_, handshake.src, Tag::Data);
  if (data.payload.size() != expected) {
    throw ProtocolError(fmt::format("size handshake from {} announced {} bytes, got {}", handshake.src.str(),
                                    expected, data.payload.size()));
  }
  return data;
}

Bytes Endpoint::recv(WorkerId src, Tag tag) {
  if (tag == Tag::Data && mode_ == SizeMode::Prefixed) {
    return complete_handshake(transport_->recv(self_, src, Tag::SizeHandshake)).payload;
  }
  return transport_->recv(self_, src, tag).payload;
}

bool Endpoint::probe(WorkerId src, Tag tag) const {
  if (tag == Tag::Data && mode_ == SizeMode::Prefixed) return transport_->probe(self_, src, Tag::SizeHandshake);
  return transport_->probe(self_, src, tag);
}

std::optional<Envelope> Endpoint::next(const EnvelopeFilter& filter, Deadline deadline) {
  if (mode_ == SizeMode::Fixed) return transport_->recv_any(self_, filter, deadline);

  auto translated = [&filter](const WorkerId& src, Tag tag) {
    if (tag == Tag::Data) return false;
    if (tag == Tag::SizeHandshake) return filter(src, Tag::Data);
    return filter(src, tag);
  };
  auto env = transport_->recv_any(self_, translated, deadline);
  if (env && env->tag == Tag::SizeHandshake) return complete_handshake(*env);
  return env;
}

}  // namespace pal
