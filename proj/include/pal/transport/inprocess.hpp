#pragma once

#include "pal/transport/mailbox.hpp"
#include "pal/transport/transport.hpp"

namespace pal {

/// Default backing: bounded in-memory queues, all workers in one process.
class InProcessTransport final : public Transport {
 public:
  explicit InProcessTransport(const std::vector<WorkerId>& workers, std::size_t capacity = 1024,
                              bool trace = false);

  void send(Envelope env) override;
  Envelope recv(WorkerId dst, WorkerId src, Tag tag) override;
  bool probe(WorkerId dst, WorkerId src, Tag tag) override;
  std::optional<Envelope> recv_any(WorkerId dst, const EnvelopeFilter& filter, Deadline deadline) override;
  void close(WorkerId w) override;
  bool is_open(WorkerId w) const override;
  std::size_t drain() override;
  std::vector<TraceEntry> trace() const override;

 private:
  Mailboxes boxes_;
};

/// Rejects envelopes that break the wire invariants (empty non-signal payload).
void check_envelope(const Envelope& env);

}  // namespace pal
