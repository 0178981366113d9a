#include "pal/transport/mailbox.hpp"

#include <fmt/format.h>

#include "pal/core/errors.hpp"

namespace pal {

std::string_view tag_name(Tag t) noexcept {
  switch (t) {
    case Tag::Data: return "data";
    case Tag::Signal: return "signal";
    case Tag::Weights: return "weights";
    case Tag::SizeHandshake: return "size-handshake";
  }
  return "unknown";
}

Mailboxes::Mailboxes(const std::vector<WorkerId>& workers, std::size_t capacity, bool trace)
    : capacity_(capacity == 0 ? 1 : capacity), tracing_(trace) {
  for (const auto& w : workers) inboxes_.emplace(w, std::make_unique<Inbox>());
}

Mailboxes::Inbox& Mailboxes::inbox(const WorkerId& w) const {
  auto it = inboxes_.find(w);
  if (it == inboxes_.end()) throw ProtocolError("unknown worker " + w.str());
  return *it->second;
}

void Mailboxes::push(Envelope env) {
  auto& box = inbox(env.dst);
  std::unique_lock lock(box.m);
  auto& channel = box.channels[ChannelKey{env.src, env.tag}];
  box.cv.wait(lock, [&] { return channel.size() < capacity_ || !box.open.load(); });
  if (!box.open.load()) throw DeadWorker(env.dst.str());
  channel.push_back(Queued{seq_.fetch_add(1), std::move(env)});
  box.cv.notify_all();
}

Envelope Mailboxes::pop(WorkerId dst, WorkerId src, Tag tag) {
  auto& box = inbox(dst);
  auto& src_box = inbox(src);
  std::unique_lock lock(box.m);
  auto& channel = box.channels[ChannelKey{src, tag}];
  box.cv.wait(lock, [&] { return !channel.empty() || !src_box.open.load(); });
  if (channel.empty()) throw DeadWorker(src.str());
  Envelope env = std::move(channel.front().env);
  channel.pop_front();
  box.cv.notify_all();
  return env;
}

bool Mailboxes::probe(WorkerId dst, WorkerId src, Tag tag) {
  auto& box = inbox(dst);
  std::lock_guard lock(box.m);
  auto it = box.channels.find(ChannelKey{src, tag});
  return it != box.channels.end() && !it->second.empty();
}

std::optional<Envelope> Mailboxes::pop_any(WorkerId dst, const EnvelopeFilter& filter, Deadline deadline) {
  auto& box = inbox(dst);
  std::unique_lock lock(box.m);
  const auto closures_at_entry = closures_.load();
  std::deque<Queued>* best = nullptr;
  auto find_best = [&] {
    best = nullptr;
    for (auto& [key, channel] : box.channels) {
      if (channel.empty() || !filter(key.src, key.tag)) continue;
      if (!best || channel.front().seq < best->front().seq) best = &channel;
    }
    return best != nullptr;
  };
  box.cv.wait_until(lock, deadline, [&] { return find_best() || closures_.load() != closures_at_entry; });
  if (!best && !find_best()) return std::nullopt;
  Envelope env = std::move(best->front().env);
  best->pop_front();
  box.cv.notify_all();
  return env;
}

void Mailboxes::close(WorkerId w) {
  inbox(w).open.store(false);
  closures_.fetch_add(1);
  for (auto& [id, box] : inboxes_) {
    std::lock_guard lock(box->m);
    box->cv.notify_all();
  }
}

bool Mailboxes::is_open(WorkerId w) const { return inbox(w).open.load(); }

std::size_t Mailboxes::drain() {
  std::size_t dropped = 0;
  for (auto& [id, box] : inboxes_) {
    std::lock_guard lock(box->m);
    for (auto& [key, channel] : box->channels) {
      dropped += channel.size();
      channel.clear();
    }
    box->cv.notify_all();
  }
  return dropped;
}

void Mailboxes::record(const TraceEntry& entry) {
  if (!tracing_) return;
  std::lock_guard lock(trace_m_);
  trace_.push_back(entry);
}

std::vector<TraceEntry> Mailboxes::trace() const {
  std::lock_guard lock(trace_m_);
  return trace_;
}

}  // namespace pal
