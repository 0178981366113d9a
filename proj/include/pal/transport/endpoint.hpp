#pragma once

#include "pal/transport/transport.hpp"

namespace pal {

/// One worker's handle on the transport.
///
/// In variable-size runs (SizeMode::Prefixed) every Data message is preceded
/// by a SizeHandshake carrying the payload length as a u32; receives consume
/// and check the handshake transparently. Fixed-size runs never send one.
class Endpoint {
 public:
  Endpoint(Transport& transport, WorkerId self, SizeMode mode)
      : transport_(&transport), self_(self), mode_(mode) {}

  WorkerId self() const noexcept { return self_; }
  SizeMode size_mode() const noexcept { return mode_; }
  Transport& transport() const noexcept { return *transport_; }

  void send(WorkerId dst, Tag tag, Bytes payload);
  Bytes recv(WorkerId src, Tag tag);
  bool probe(WorkerId src, Tag tag) const;
  /// Next message accepted by `filter` (expressed in terms of Data, never
  /// SizeHandshake), or nullopt at the deadline.
  std::optional<Envelope> next(const EnvelopeFilter& filter, Deadline deadline);

  bool is_open(WorkerId w) const { return transport_->is_open(w); }
  void close() { transport_->close(self_); }

 private:
  Envelope complete_handshake(const Envelope& handshake);

  Transport* transport_;
  WorkerId self_;
  SizeMode mode_;
};

}  // namespace pal
