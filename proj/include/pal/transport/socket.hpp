#pragma once

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "pal/transport/mailbox.hpp"
#include "pal/transport/transport.hpp"

namespace pal {

inline constexpr std::size_t kFrameHeaderSize = 5;

/// [tag:1][length:4 LE][payload]
Bytes encode_frame(Tag tag, ByteView payload);

struct FrameHeader {
  Tag tag;
  std::uint32_t length;
};

/// Parses the 5-byte header; throws ProtocolError on an unknown tag.
FrameHeader decode_frame_header(ByteView header);

/// Loopback TCP backing. Each (src, dst) pair gets its own stream, opened on
/// first send; a reader thread per stream decodes frames into the receiving
/// worker's bounded mailbox, so a full mailbox stalls the stream and in turn
/// the sender.
class SocketTransport final : public Transport {
 public:
  explicit SocketTransport(const std::vector<WorkerId>& workers, std::size_t capacity = 1024, bool trace = false);
  ~SocketTransport() override;

  SocketTransport(const SocketTransport&) = delete;
  SocketTransport& operator=(const SocketTransport&) = delete;

  void send(Envelope env) override;
  Envelope recv(WorkerId dst, WorkerId src, Tag tag) override;
  bool probe(WorkerId dst, WorkerId src, Tag tag) override;
  std::optional<Envelope> recv_any(WorkerId dst, const EnvelopeFilter& filter, Deadline deadline) override;
  void close(WorkerId w) override;
  bool is_open(WorkerId w) const override;
  std::size_t drain() override;
  std::vector<TraceEntry> trace() const override;

  /// Port of the loopback listener, for diagnostics.
  int port() const noexcept { return port_; }

 private:
  struct Stream {
    int send_fd = -1;
    int recv_fd = -1;
    std::mutex write_m;
    std::thread reader;
    std::uint64_t sent = 0;       // guarded by SocketTransport::flush_m_
    std::uint64_t delivered = 0;  // guarded by SocketTransport::flush_m_
  };

  Stream& stream(const WorkerId& src, const WorkerId& dst);
  void read_loop(Stream& s, WorkerId src, WorkerId dst);

  // Closing a sender waits until its frames have reached the mailboxes, so a
  // receiver never sees the close before the last message.
  void flush_from(const WorkerId& src);

  Mailboxes boxes_;
  std::mutex flush_m_;
  std::condition_variable flushed_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::mutex streams_m_;
  std::map<std::pair<WorkerId, WorkerId>, std::unique_ptr<Stream>> streams_;
};

}  // namespace pal
