#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <memory>
#include <numeric>
#include <random>
#include <thread>

#include "pal/core/errors.hpp"
#include "pal/transport/collectives.hpp"
#include "pal/transport/endpoint.hpp"
#include "pal/transport/inprocess.hpp"
#include "pal/transport/socket.hpp"

using namespace pal;
using namespace std::chrono_literals;

namespace {

const WorkerId kEx = WorkerId::exchange();
const WorkerId kMgr = WorkerId::manager();

std::vector<WorkerId> gens(std::uint32_t n) {
  std::vector<WorkerId> out;
  for (std::uint32_t i = 0; i < n; ++i) out.push_back({Kernel::Generator, i});
  return out;
}

std::vector<WorkerId> everyone(std::uint32_t n) {
  auto w = gens(n);
  w.push_back(kEx);
  w.push_back(kMgr);
  return w;
}

std::unique_ptr<Transport> make(bool sockets, const std::vector<WorkerId>& workers, std::size_t cap = 1024,
                                bool trace = false) {
  if (sockets) return std::make_unique<SocketTransport>(workers, cap, trace);
  return std::make_unique<InProcessTransport>(workers, cap, trace);
}

Bytes u64_bytes(std::uint64_t v) {
  ByteWriter w;
  w.put_u64(v);
  return std::move(w).take();
}

std::uint64_t read_u64(const Bytes& b) {
  ByteReader r(b);
  return r.get_u64();
}

}  // namespace

TEST_CASE("point to point: probe, FIFO over 1000 messages") {
  for (bool sockets : {false, true}) {
    CAPTURE(sockets);
    auto t = make(sockets, everyone(2));
    Endpoint a(*t, gens(1)[0], SizeMode::Fixed), ex(*t, kEx, SizeMode::Fixed);
    CHECK_FALSE(ex.probe(a.self(), Tag::Data));

    std::thread sender([&] {
      for (std::uint64_t i = 0; i < 1000; ++i) a.send(kEx, Tag::Data, u64_bytes(i));
    });
    for (std::uint64_t i = 0; i < 1000; ++i) CHECK(read_u64(ex.recv(a.self(), Tag::Data)) == i);
    sender.join();
    CHECK_FALSE(ex.probe(a.self(), Tag::Data));

    a.send(kEx, Tag::Data, u64_bytes(7));
    for (int i = 0; i < 200 && !ex.probe(a.self(), Tag::Data); ++i) std::this_thread::sleep_for(1ms);
    CHECK(ex.probe(a.self(), Tag::Data));
    CHECK(read_u64(ex.recv(a.self(), Tag::Data)) == 7);
  }
}

TEST_CASE("channels of different tags do not block each other") {
  auto t = make(false, everyone(1));
  Endpoint g(*t, gens(1)[0], SizeMode::Fixed), ex(*t, kEx, SizeMode::Fixed);
  g.send(kEx, Tag::Data, u64_bytes(1));
  g.send(kEx, Tag::Signal, u64_bytes(2));
  CHECK(read_u64(ex.recv(g.self(), Tag::Signal)) == 2);
  CHECK(read_u64(ex.recv(g.self(), Tag::Data)) == 1);
}

TEST_CASE("randomized interleavings keep every channel FIFO without loss") {
  for (bool sockets : {false, true}) {
    CAPTURE(sockets);
    const auto g = gens(4);
    auto t = make(sockets, everyone(4), 16);
    Endpoint ex(*t, kEx, SizeMode::Fixed);
    std::vector<std::thread> senders;
    for (std::uint32_t r = 0; r < 4; ++r) {
      senders.emplace_back([&, r] {
        Endpoint ep(*t, g[r], SizeMode::Fixed);
        std::mt19937_64 rng(r);
        for (std::uint64_t i = 0; i < 300; ++i) {
          ep.send(kEx, rng() % 3 ? Tag::Data : Tag::Weights, u64_bytes(i));
          if (rng() % 8 == 0) std::this_thread::yield();
        }
      });
    }
    std::map<std::pair<std::uint32_t, Tag>, std::vector<std::uint64_t>> seen;
    for (int n = 0; n < 1200; ++n) {
      auto env = ex.next([](const WorkerId&, Tag) { return true; }, Clock::now() + 5s);
      REQUIRE(env.has_value());
      seen[{env->src.rank, env->tag}].push_back(read_u64(env->payload));
    }
    for (auto& s : senders) s.join();
    for (std::uint32_t r = 0; r < 4; ++r) {
      auto data = seen[{r, Tag::Data}];
      auto weights = seen[{r, Tag::Weights}];
      CHECK(std::is_sorted(data.begin(), data.end()));
      CHECK(std::is_sorted(weights.begin(), weights.end()));
      std::vector<std::uint64_t> all = data;
      all.insert(all.end(), weights.begin(), weights.end());
      std::sort(all.begin(), all.end());
      std::vector<std::uint64_t> want(300);
      std::iota(want.begin(), want.end(), 0);
      CHECK(all == want);
    }
  }
}

TEST_CASE("full channels block the sender") {
  {
    auto t = make(false, everyone(1), 4);
    Endpoint g(*t, gens(1)[0], SizeMode::Fixed), ex(*t, kEx, SizeMode::Fixed);
    std::atomic<int> sent{0};
    std::thread sender([&] {
      for (int i = 0; i < 10; ++i) {
        g.send(kEx, Tag::Data, u64_bytes(static_cast<std::uint64_t>(i)));
        ++sent;
      }
    });
    std::this_thread::sleep_for(200ms);
    CHECK(sent.load() < 10);
    for (std::uint64_t i = 0; i < 10; ++i) CHECK(read_u64(ex.recv(g.self(), Tag::Data)) == i);
    sender.join();
    CHECK(sent.load() == 10);
  }
}

TEST_CASE("broadcast") {
  auto t = make(false, everyone(3));
  Endpoint ex(*t, kEx, SizeMode::Fixed);
  const auto g = gens(3);
  broadcast(ex, u64_bytes(1), g);
  broadcast(ex, u64_bytes(2), g);
  broadcast(ex, u64_bytes(3), std::span<const WorkerId>{});
  for (const auto& w : g) {
    Endpoint ep(*t, w, SizeMode::Fixed);
    CHECK(read_u64(ep.recv(kEx, Tag::Data)) == 1);
    CHECK(read_u64(ep.recv(kEx, Tag::Data)) == 2);
    CHECK_FALSE(ep.probe(kEx, Tag::Data));
  }
}

TEST_CASE("gather orders by rank for every arrival order") {
  const auto g = gens(3);
  std::vector<int> order{0, 1, 2};
  int perms = 0;
  do {
    auto t = make(false, everyone(3));
    Endpoint ex(*t, kEx, SizeMode::Fixed);
    for (int r : order) {
      Endpoint(*t, g[r], SizeMode::Fixed).send(kEx, Tag::Data, u64_bytes(100 + r));
    }
    const auto got = gather(ex, g);
    REQUIRE(got.size() == 3);
    for (std::uint64_t r = 0; r < 3; ++r) CHECK(read_u64(got[r]) == 100 + r);
    ++perms;
  } while (std::next_permutation(order.begin(), order.end()));
  CHECK(perms == 6);

  auto t = make(false, everyone(1));
  Endpoint ex(*t, kEx, SizeMode::Fixed);
  Endpoint(*t, gens(1)[0], SizeMode::Fixed).send(kEx, Tag::Data, u64_bytes(5));
  CHECK(gather(ex, gens(1)).size() == 1);
}

TEST_CASE("gather surfaces a source that stopped") {
  auto t = make(false, everyone(2));
  const auto g = gens(2);
  Endpoint ex(*t, kEx, SizeMode::Fixed), g0(*t, g[0], SizeMode::Fixed), g1(*t, g[1], SizeMode::Fixed);
  g0.send(kEx, Tag::Data, u64_bytes(1));
  g1.close();
  CHECK_THROWS_AS(gather(ex, g), DeadWorker);
  CHECK_THROWS_AS(ex.send(g[1], Tag::Data, u64_bytes(1)), DeadWorker);
}

TEST_CASE("messages sent before a close are still delivered") {
  for (bool sockets : {false, true}) {
    CAPTURE(sockets);
    auto t = make(sockets, everyone(1));
    Endpoint g(*t, gens(1)[0], SizeMode::Fixed), ex(*t, kEx, SizeMode::Fixed);
    for (std::uint64_t i = 0; i < 50; ++i) g.send(kEx, Tag::Data, u64_bytes(i));
    g.close();
    for (std::uint64_t i = 0; i < 50; ++i) CHECK(read_u64(ex.recv(g.self(), Tag::Data)) == i);
    CHECK_THROWS_AS(ex.recv(g.self(), Tag::Data), DeadWorker);
  }
}

TEST_CASE("gather_or_signal stops on an interrupter's signal") {
  auto t = make(false, everyone(2));
  const auto g = gens(2);
  Endpoint ex(*t, kEx, SizeMode::Fixed), mgr(*t, kMgr, SizeMode::Fixed);
  Endpoint(*t, g[0], SizeMode::Fixed).send(kEx, Tag::Data, u64_bytes(1));
  mgr.send(kEx, Tag::Signal, u64_bytes(9));
  const WorkerId interrupters[]{kMgr};
  const auto out = gather_or_signal(ex, g, interrupters);
  REQUIRE(out.signal.has_value());
  CHECK(out.signal->src == kMgr);
  CHECK(read_u64(out.signal->payload) == 9);
  CHECK_FALSE(ex.probe(kMgr, Tag::Signal));
}

TEST_CASE("scatter") {
  auto t = make(false, everyone(20));
  Endpoint ex(*t, kEx, SizeMode::Fixed);
  const auto g = gens(20);
  std::vector<Bytes> payloads;
  for (std::uint64_t i = 0; i < 20; ++i) payloads.push_back(u64_bytes(i * i));
  scatter(ex, payloads, g);
  for (std::uint64_t i = 0; i < 20; ++i) {
    CHECK(read_u64(Endpoint(*t, g[i], SizeMode::Fixed).recv(kEx, Tag::Data)) == i * i);
  }

  scatter(ex, {u64_bytes(3)}, gens(1));
  CHECK(read_u64(Endpoint(*t, g[0], SizeMode::Fixed).recv(kEx, Tag::Data)) == 3);

  CHECK_THROWS_AS(scatter(ex, {u64_bytes(1), u64_bytes(2), u64_bytes(3)}, gens(2)), LengthMismatch);
  CHECK_FALSE(Endpoint(*t, g[0], SizeMode::Fixed).probe(kEx, Tag::Data));
}

TEST_CASE("size handshakes precede data only in variable-size runs") {
  for (bool sockets : {false, true}) {
    for (auto mode : {SizeMode::Fixed, SizeMode::Prefixed}) {
      CAPTURE(sockets);
      auto t = make(sockets, everyone(2), 1024, true);
      const auto g = gens(2);
      Endpoint ex(*t, kEx, mode);
      for (std::uint64_t i = 0; i < 10; ++i) {
        Endpoint(*t, g[i % 2], mode).send(kEx, Tag::Data, u64_bytes(i));
        if (i % 3 == 0) ex.send(g[0], Tag::Signal, {});
      }
      for (std::uint64_t i = 0; i < 10; ++i) {
        CHECK(read_u64(ex.recv(g[i % 2], Tag::Data)) == i);
      }
      const auto trace = t->trace();
      std::size_t data = 0, handshakes = 0;
      for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace[i].tag == Tag::SizeHandshake) ++handshakes;
        if (trace[i].tag != Tag::Data) continue;
        ++data;
        if (mode == SizeMode::Prefixed) {
          // The handshake is the previous message on the same channel.
          std::optional<TraceEntry> prev;
          for (std::size_t j = i; j-- > 0;) {
            if (trace[j].src == trace[i].src && trace[j].dst == trace[i].dst &&
                (trace[j].tag == Tag::Data || trace[j].tag == Tag::SizeHandshake)) {
              prev = trace[j];
              break;
            }
          }
          REQUIRE(prev.has_value());
          CHECK(prev->tag == Tag::SizeHandshake);
        }
      }
      CHECK(data == 10);
      CHECK(handshakes == (mode == SizeMode::Prefixed ? 10u : 0u));
    }
  }
}

TEST_CASE("envelope and frame checks") {
  auto t = make(false, everyone(1));
  CHECK_THROWS_AS(t->send(Envelope{kEx, kMgr, Tag::Data, {}}), ProtocolError);
  CHECK_NOTHROW(t->send(Envelope{kEx, kMgr, Tag::Signal, {}}));
  CHECK(t->drain() == 1);

  const Bytes payload{std::byte{1}, std::byte{2}, std::byte{3}};
  const auto frame = encode_frame(Tag::Weights, payload);
  REQUIRE(frame.size() == kFrameHeaderSize + 3);
  CHECK(frame[0] == std::byte{2});
  CHECK(frame[1] == std::byte{3});
  const auto h = decode_frame_header(frame);
  CHECK(h.tag == Tag::Weights);
  CHECK(h.length == 3u);
  Bytes bad = frame;
  bad[0] = std::byte{9};
  CHECK_THROWS_AS(decode_frame_header(bad), ProtocolError);
}
