#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>

#include "pal/transport/transport.hpp"

namespace pal {

/// Per-destination bounded queues shared by the transport backings.
class Mailboxes {
 public:
  Mailboxes(const std::vector<WorkerId>& workers, std::size_t capacity, bool trace);

  void push(Envelope env);
  Envelope pop(WorkerId dst, WorkerId src, Tag tag);
  bool probe(WorkerId dst, WorkerId src, Tag tag);
  std::optional<Envelope> pop_any(WorkerId dst, const EnvelopeFilter& filter, Deadline deadline);

  void close(WorkerId w);
  bool is_open(WorkerId w) const;
  std::size_t drain();

  void record(const TraceEntry& entry);
  std::vector<TraceEntry> trace() const;

 private:
  struct ChannelKey {
    WorkerId src;
    Tag tag;
    friend auto operator<=>(const ChannelKey&, const ChannelKey&) = default;
  };
  struct Queued {
    std::uint64_t seq;
    Envelope env;
  };
  struct Inbox {
    std::mutex m;
    std::condition_variable cv;
    std::map<ChannelKey, std::deque<Queued>> channels;
    std::atomic<bool> open{true};
  };

  Inbox& inbox(const WorkerId& w) const;

  std::map<WorkerId, std::unique_ptr<Inbox>> inboxes_;
  std::size_t capacity_;
  std::atomic<std::uint64_t> seq_{0};
  std::atomic<std::uint64_t> closures_{0};

  bool tracing_;
  mutable std::mutex trace_m_;
  std::vector<TraceEntry> trace_;
};

}  // namespace pal
