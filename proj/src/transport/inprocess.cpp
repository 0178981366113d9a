#include "pal/transport/inprocess.hpp"

#include "pal/core/errors.hpp"

namespace pal {

void check_envelope(const Envelope& env) {
  if (env.payload.empty() && env.tag != Tag::Signal) {
    throw ProtocolError("empty " + std::string(tag_name(env.tag)) + " payload from " + env.src.str());
  }
}

InProcessTransport::InProcessTransport(const std::vector<WorkerId>& workers, std::size_t capacity, bool trace)
    : boxes_(workers, capacity, trace) {}

void InProcessTransport::send(Envelope env) {
  check_envelope(env);
  const TraceEntry header{env.src, env.dst, env.tag, env.payload.size()};
  boxes_.push(std::move(env));
  boxes_.record(header);
}

Envelope InProcessTransport::recv(WorkerId dst, WorkerId src, Tag tag) { return boxes_.pop(dst, src, tag); }

bool InProcessTransport::probe(WorkerId dst, WorkerId src, Tag tag) { return boxes_.probe(dst, src, tag); }

std::optional<Envelope> InProcessTransport::recv_any(WorkerId dst, const EnvelopeFilter& filter, Deadline deadline) {
  return boxes_.pop_any(dst, filter, deadline);
}

void InProcessTransport::close(WorkerId w) { boxes_.close(w); }
bool InProcessTransport::is_open(WorkerId w) const { return boxes_.is_open(w); }
std::size_t InProcessTransport::drain() { return boxes_.drain(); }
std::vector<TraceEntry> InProcessTransport::trace() const { return boxes_.trace(); }

}  // namespace pal
