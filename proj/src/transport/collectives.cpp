#include "pal/transport/collectives.hpp"

#include <algorithm>
#include <chrono>

#include <fmt/format.h>

#include "pal/core/errors.hpp"

namespace pal {
namespace {

constexpr auto kLivenessPoll = std::chrono::milliseconds(50);

bool contains(std::span<const WorkerId> set, const WorkerId& w) {
  return std::find(set.begin(), set.end(), w) != set.end();
}

}  // namespace

void broadcast(Endpoint& ep, const Bytes& payload, std::span<const WorkerId> dsts, Tag tag) {
  for (const auto& dst : dsts) ep.send(dst, tag, payload);
}

void scatter(Endpoint& ep, std::vector<Bytes> payloads, std::span<const WorkerId> dsts, Tag tag) {
  if (payloads.size() != dsts.size()) {
    throw LengthMismatch(fmt::format("scatter of {} payloads to {} destinations", payloads.size(), dsts.size()));
  }
  for (std::size_t i = 0; i < dsts.size(); ++i) ep.send(dsts[i], tag, std::move(payloads[i]));
}

GatherOutcome gather_or_signal(Endpoint& ep, std::span<const WorkerId> srcs, std::span<const WorkerId> interrupters,
                               Tag tag) {
  GatherOutcome out;
  std::vector<std::optional<Bytes>> slots(srcs.size());
  std::size_t missing = srcs.size();

  auto slot_of = [&](const WorkerId& w) -> std::optional<Bytes>* {
    for (std::size_t i = 0; i < srcs.size(); ++i) {
      if (srcs[i] == w) return &slots[i];
    }
    return nullptr;
  };
  auto accept = [&](const WorkerId& src, Tag t) {
    if (t == Tag::Signal && contains(interrupters, src)) return true;
    if (t != tag) return false;
    auto* slot = slot_of(src);
    return slot && !slot->has_value();
  };

  while (missing > 0) {
    auto env = ep.next(accept, Clock::now() + kLivenessPoll);
    if (env) {
      if (env->tag == Tag::Signal) {
        out.signal = std::move(env);
        return out;
      }
      *slot_of(env->src) = std::move(env->payload);
      --missing;
      continue;
    }
    for (std::size_t i = 0; i < srcs.size(); ++i) {
      if (!slots[i] && !ep.is_open(srcs[i]) && !ep.probe(srcs[i], tag)) throw DeadWorker(srcs[i].str());
    }
  }
  out.payloads.reserve(slots.size());
  for (auto& s : slots) out.payloads.push_back(std::move(*s));
  return out;
}

std::vector<Bytes> gather(Endpoint& ep, std::span<const WorkerId> srcs, Tag tag) {
  return gather_or_signal(ep, srcs, {}, tag).payloads;
}

}  // namespace pal
