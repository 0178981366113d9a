#include "pal/transport/socket.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <limits>
#include <system_error>

#include "pal/core/errors.hpp"
#include "pal/transport/inprocess.hpp"

namespace pal {
namespace {

[[noreturn]] void throw_errno(const char* what) { throw std::system_error(errno, std::generic_category(), what); }

void write_all(int fd, const std::byte* data, std::size_t n) {
  while (n > 0) {
    const auto w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw_errno("socket send");
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

// False on clean EOF before any byte was read.
bool read_all(int fd, std::byte* data, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const auto r = ::recv(fd, data + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      throw ProtocolError("stream closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      throw_errno("socket recv");
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

}  // namespace

Bytes encode_frame(Tag tag, ByteView payload) {
  if (payload.size() > std::numeric_limits<std::uint32_t>::max()) throw ProtocolError("frame too large");
  ByteWriter w;
  w.put_u8(static_cast<std::uint8_t>(tag));
  w.put_u32(static_cast<std::uint32_t>(payload.size()));
  w.put_bytes(payload);
  return std::move(w).take();
}

FrameHeader decode_frame_header(ByteView header) {
  ByteReader r(header.first(kFrameHeaderSize));
  const auto raw_tag = r.get_u8();
  if (raw_tag > static_cast<std::uint8_t>(Tag::SizeHandshake)) {
    throw ProtocolError("unknown frame tag " + std::to_string(raw_tag));
  }
  return FrameHeader{static_cast<Tag>(raw_tag), r.get_u32()};
}

SocketTransport::SocketTransport(const std::vector<WorkerId>& workers, std::size_t capacity, bool trace)
    : boxes_(workers, capacity, trace) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw_errno("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) throw_errno("bind");
  if (::listen(listen_fd_, 64) < 0) throw_errno("listen");
  socklen_t len = sizeof addr;
  if (::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len) < 0) throw_errno("getsockname");
  port_ = ntohs(addr.sin_port);
}

SocketTransport::~SocketTransport() {
  // Closing every mailbox unblocks readers stuck on a full channel.
  for (auto& [key, s] : streams_) {
    boxes_.close(key.second);
    ::shutdown(s->send_fd, SHUT_RDWR);
  }
  for (auto& [key, s] : streams_) {
    if (s->reader.joinable()) s->reader.join();
    ::close(s->send_fd);
    ::close(s->recv_fd);
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

SocketTransport::Stream& SocketTransport::stream(const WorkerId& src, const WorkerId& dst) {
  std::lock_guard lock(streams_m_);
  auto& slot = streams_[{src, dst}];
  if (slot) return *slot;

  auto s = std::make_unique<Stream>();
  s->send_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (s->send_fd < 0) throw_errno("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port_));
  if (::connect(s->send_fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) throw_errno("connect");
  s->recv_fd = ::accept(listen_fd_, nullptr, nullptr);
  if (s->recv_fd < 0) throw_errno("accept");
  int one = 1;
  ::setsockopt(s->send_fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

  auto* raw = s.get();
  s->reader = std::thread([this, raw, src, dst] { read_loop(*raw, src, dst); });
  slot = std::move(s);
  return *slot;
}

void SocketTransport::read_loop(Stream& s, WorkerId src, WorkerId dst) {
  try {
    std::array<std::byte, kFrameHeaderSize> header{};
    while (read_all(s.recv_fd, header.data(), header.size())) {
      const auto h = decode_frame_header(header);
      Bytes payload(h.length);
      if (h.length > 0 && !read_all(s.recv_fd, payload.data(), payload.size())) break;
      try {
        boxes_.push(Envelope{src, dst, h.tag, std::move(payload)});
      } catch (const DeadWorker&) {
        // Receiver is gone; keep consuming so the sender never stalls.
      }
      {
        std::lock_guard lock(flush_m_);
        ++s.delivered;
      }
      flushed_.notify_all();
    }
  } catch (const std::exception&) {
    // Stream torn down during shutdown.
  }
}

void SocketTransport::send(Envelope env) {
  check_envelope(env);
  if (!boxes_.is_open(env.dst)) throw DeadWorker(env.dst.str());
  auto& s = stream(env.src, env.dst);
  const auto frame = encode_frame(env.tag, env.payload);
  {
    std::lock_guard lock(s.write_m);
    write_all(s.send_fd, frame.data(), frame.size());
    std::lock_guard flock(flush_m_);
    ++s.sent;
  }
  boxes_.record(TraceEntry{env.src, env.dst, env.tag, env.payload.size()});
}

Envelope SocketTransport::recv(WorkerId dst, WorkerId src, Tag tag) { return boxes_.pop(dst, src, tag); }
bool SocketTransport::probe(WorkerId dst, WorkerId src, Tag tag) { return boxes_.probe(dst, src, tag); }

std::optional<Envelope> SocketTransport::recv_any(WorkerId dst, const EnvelopeFilter& filter, Deadline deadline) {
  return boxes_.pop_any(dst, filter, deadline);
}

void SocketTransport::flush_from(const WorkerId& src) {
  std::vector<Stream*> outgoing;
  {
    std::lock_guard lock(streams_m_);
    for (auto& [key, s] : streams_) {
      if (key.first == src) outgoing.push_back(s.get());
    }
  }
  std::unique_lock lock(flush_m_);
  for (auto* s : outgoing) {
    // Bounded: a receiver that never drains a full mailbox must not hang the close.
    flushed_.wait_for(lock, std::chrono::seconds(5), [s] { return s->delivered >= s->sent; });
  }
}

void SocketTransport::close(WorkerId w) {
  flush_from(w);
  boxes_.close(w);
}
bool SocketTransport::is_open(WorkerId w) const { return boxes_.is_open(w); }
std::size_t SocketTransport::drain() { return boxes_.drain(); }
std::vector<TraceEntry> SocketTransport::trace() const { return boxes_.trace(); }

}  // namespace pal
