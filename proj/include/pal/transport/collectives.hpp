#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pal/transport/endpoint.hpp"

namespace pal {

/// Sends an identical copy of `payload` to every destination, in order.
void broadcast(Endpoint& ep, const Bytes& payload, std::span<const WorkerId> dsts, Tag tag = Tag::Data);

/// Destination i receives payloads[i]. Throws LengthMismatch before sending
/// anything when the sizes differ.
void scatter(Endpoint& ep, std::vector<Bytes> payloads, std::span<const WorkerId> dsts, Tag tag = Tag::Data);

/// One message from each source, returned in the order of `srcs` whatever
/// the arrival order. Throws DeadWorker when a source closes without having
/// sent its message.
std::vector<Bytes> gather(Endpoint& ep, std::span<const WorkerId> srcs, Tag tag = Tag::Data);

struct GatherOutcome {
  std::vector<Bytes> payloads;
  /// Set when the gather was abandoned because of this signal.
  std::optional<Envelope> signal;
};

/// Like gather, but abandons the round as soon as a Signal arrives from one
/// of `interrupters` and hands that signal back.
GatherOutcome gather_or_signal(Endpoint& ep, std::span<const WorkerId> srcs, std::span<const WorkerId> interrupters,
                               Tag tag = Tag::Data);

}  // namespace pal
