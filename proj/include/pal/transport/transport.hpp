#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "pal/core/serialize.hpp"
#include "pal/core/types.hpp"

namespace pal {

enum class Tag : std::uint8_t { Data = 0, Signal = 1, Weights = 2, SizeHandshake = 3 };

std::string_view tag_name(Tag t) noexcept;

struct Envelope {
  WorkerId src;
  WorkerId dst;
  Tag tag = Tag::Data;
  Bytes payload;
};

/// Header of one sent message, recorded in send order when tracing is on.
struct TraceEntry {
  WorkerId src;
  WorkerId dst;
  Tag tag;
  std::size_t size;
};

using Clock = std::chrono::steady_clock;
using Deadline = Clock::time_point;
using EnvelopeFilter = std::function<bool(const WorkerId& src, Tag tag)>;

/// Point-to-point message layer between a fixed set of workers.
///
/// Channels are keyed by (src, dst, tag) and are FIFO without loss or
/// duplication. Sends block while the destination channel is full. A worker
/// that finished calls close(); sends to it then throw DeadWorker, and a
/// receive waiting on it throws DeadWorker once its channel is empty.
///
/// Every method may be called concurrently from different workers; a single
/// worker never issues two concurrent calls.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual void send(Envelope env) = 0;
  virtual Envelope recv(WorkerId dst, WorkerId src, Tag tag) = 0;
  /// Non-blocking; true iff recv(dst, src, tag) would return immediately.
  virtual bool probe(WorkerId dst, WorkerId src, Tag tag) = 0;
  /// Earliest-sent message to `dst` on any channel accepted by `filter`.
  /// Returns nullopt at the deadline, and may return early when any worker
  /// closes so callers can re-check liveness.
  virtual std::optional<Envelope> recv_any(WorkerId dst, const EnvelopeFilter& filter, Deadline deadline) = 0;

  virtual void close(WorkerId w) = 0;
  virtual bool is_open(WorkerId w) const = 0;

  /// Discards every undelivered message; returns how many were dropped.
  virtual std::size_t drain() = 0;
  /// Sent-message headers in send order; empty unless tracing was enabled.
  virtual std::vector<TraceEntry> trace() const = 0;
};

}  // namespace pal
