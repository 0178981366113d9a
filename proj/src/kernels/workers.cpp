#include "pal/kernels/workers.hpp"

#include <deque>

#include <fmt/format.h>

#include "pal/core/errors.hpp"

namespace pal {
namespace {

constexpr auto kLivenessPoll = std::chrono::milliseconds(100);

enum class Step { Continue, Stop };

// Runs `loop` until it returns Stop. Kernel or protocol failures become a
// failure stop request; a vanished peer means shutdown is under way. Either
// way the worker then waits for the manager's StopRun.
template <class Loop>
void drive(WorkerEnv& env, KernelBase& k, SnapshotTimer& timer, Loop&& loop) {
  env.log->info("started");
  try {
    while (loop() == Step::Continue) {
    }
  } catch (const DeadWorker& e) {
    env.log->warn("{}; waiting for stop", e.what());
    wait_for_stop(env, k, timer);
  } catch (const std::exception& e) {
    env.log->error("failure: {}", e.what());
    report_stop(env, true);
    wait_for_stop(env, k, timer);
  }
  finish_worker(env, k);
}

Deadline poll_deadline(const SnapshotTimer& timer) { return std::min(timer.deadline(), Clock::now() + kLivenessPoll); }

// nullopt: nothing arrived before the deadline (and the manager is alive).
// Throws DeadWorker when the manager has gone without a StopRun.
std::optional<Envelope> next_or_liveness(WorkerEnv& env, const EnvelopeFilter& filter, Deadline deadline) {
  auto e = env.ep.next(filter, deadline);
  if (!e && !env.ep.is_open(WorkerId::manager()) && !env.ep.probe(WorkerId::manager(), Tag::Signal)) {
    throw DeadWorker(WorkerId::manager().str());
  }
  return e;
}

Message expect(const Envelope& e, MessageKind kind, SizeMode mode) {
  auto m = decode_message(e.payload, mode);
  if (m.kind != kind) {
    throw ProtocolError(fmt::format("expected {} from {}, got {}", message_kind_name(kind), e.src.str(),
                                    message_kind_name(m.kind)));
  }
  return m;
}

}  // namespace

void run_predictor(WorkerEnv& env, Predictor& k) {
  SnapshotTimer timer(env.cfg.progress_save_interval);
  const auto exchange = WorkerId::exchange();
  const auto manager = WorkerId::manager();
  const auto generators = env.roster.generators.size();
  auto accept = [&](const WorkerId& src, Tag tag) {
    return (src == exchange && tag == Tag::Data) || (src == manager && (tag == Tag::Weights || tag == Tag::Signal));
  };
  drive(env, k, timer, [&] {
    timer.poll(k, env.tally(), *env.log);
    auto e = next_or_liveness(env, accept, poll_deadline(timer));
    if (!e) return Step::Continue;
    if (e->tag == Tag::Signal) return is_stop(*e) ? Step::Stop : Step::Continue;
    if (e->tag == Tag::Weights) {
      k.update(deserialize_weights(e->payload, env.mode()));
      return Step::Continue;
    }
    auto m = expect(*e, MessageKind::Inputs, env.mode());
    if (m.samples.size() != generators) {
      throw ProtocolError(fmt::format("got {} inputs for {} generators", m.samples.size(), generators));
    }
    auto preds = k.predict(m.samples);
    if (preds.size() != generators) {
      throw ProtocolError(fmt::format("predict returned {} outputs for {} generators", preds.size(), generators));
    }
    env.send_message(exchange, Message::of_samples(MessageKind::Predictions, std::move(preds)));
    return Step::Continue;
  });
}

void run_generator(WorkerEnv& env, Generator& k) {
  SnapshotTimer timer(env.cfg.progress_save_interval);
  const auto exchange = WorkerId::exchange();
  const auto manager = WorkerId::manager();
  auto accept = [&](const WorkerId& src, Tag tag) {
    return (src == exchange && tag == Tag::Data) || (src == manager && tag == Tag::Signal);
  };
  std::optional<Sample> feedback;
  bool awaiting = false;
  drive(env, k, timer, [&] {
    timer.poll(k, env.tally(), *env.log);
    if (!awaiting) {
      auto g = k.generate(feedback);
      if (g.stop) {
        env.log->info("generator requested stop");
        report_stop(env, false);
        wait_for_stop(env, k, timer);
        return Step::Stop;
      }
      env.send_message(exchange, Message::of_sample(MessageKind::GenInput, std::move(g.next)));
      awaiting = true;
    }
    auto e = next_or_liveness(env, accept, poll_deadline(timer));
    if (!e) return Step::Continue;
    if (e->tag == Tag::Signal) return is_stop(*e) ? Step::Stop : Step::Continue;
    auto m = expect(*e, MessageKind::Feedback, env.mode());
    if (m.samples.size() != 1) throw ProtocolError("feedback must carry one sample");
    feedback = std::move(m.samples.front());
    awaiting = false;
    return Step::Continue;
  });
}

void run_oracle(WorkerEnv& env, Oracle& k) {
  SnapshotTimer timer(env.cfg.progress_save_interval);
  const auto manager = WorkerId::manager();
  auto accept = [&](const WorkerId& src, Tag tag) { return src == manager && (tag == Tag::Data || tag == Tag::Signal); };
  drive(env, k, timer, [&] {
    timer.poll(k, env.tally(), *env.log);
    auto e = next_or_liveness(env, accept, poll_deadline(timer));
    if (!e) return Step::Continue;
    if (e->tag == Tag::Signal) return is_stop(*e) ? Step::Stop : Step::Continue;
    auto m = expect(*e, MessageKind::OracleRequest, env.mode());
    if (m.samples.size() != 1) throw ProtocolError("oracle request must carry one sample");
    Message result;
    result.kind = MessageKind::OracleResult;
    result.id = m.id;
    auto label = k.label(m.samples.front());
    result.labeled.push_back({std::move(m.samples.front()), std::move(label)});
    env.send_message(manager, result);
    return Step::Continue;
  });
}

void run_trainer(WorkerEnv& env, Trainer& k) {
  SnapshotTimer timer(env.cfg.progress_save_interval);
  const auto manager = WorkerId::manager();
  auto accept = [&](const WorkerId& src, Tag tag) { return src == manager && (tag == Tag::Data || tag == Tag::Signal); };

  // Messages pulled in by the interrupt probe wait here until the retrain
  // round ends.
  std::deque<Envelope> inbox;
  auto pull_ready = [&] {
    while (auto e = env.ep.next(accept, Clock::now())) inbox.push_back(std::move(*e));
  };
  auto interrupting = [&](const Envelope& e) {
    return e.tag == Tag::Signal || peek_kind(e.payload) == MessageKind::TrainBatch;
  };
  InterruptProbe probe = [&] {
    timer.poll(k, env.tally(), *env.log);
    pull_ready();
    return std::any_of(inbox.begin(), inbox.end(), interrupting);
  };

  bool pending = false;
  std::uint64_t rounds = 0;
  const auto sync_every = static_cast<std::uint64_t>(std::max(1, env.cfg.weight_sync_interval));

  drive(env, k, timer, [&] {
    timer.poll(k, env.tally(), *env.log);
    if (inbox.empty()) {
      if (pending) {
        pull_ready();
      } else if (auto e = next_or_liveness(env, accept, poll_deadline(timer))) {
        inbox.push_back(std::move(*e));
      }
    }
    while (!inbox.empty()) {
      auto e = std::move(inbox.front());
      inbox.pop_front();
      if (e.tag == Tag::Signal) {
        if (is_stop(e)) return Step::Stop;
        continue;
      }
      auto m = decode_message(e.payload, env.mode());
      if (m.kind == MessageKind::TrainBatch) {
        k.add_trainingset(m.labeled);
        pending = true;
      } else if (m.kind == MessageKind::AdjustRequest) {
        auto preds = k.predict(m.samples);
        if (preds.size() != m.samples.size()) throw ProtocolError("trainer predict changed the batch size");
        env.send_message(manager, Message::of_samples(MessageKind::AdjustResponse, std::move(preds)));
      } else {
        throw ProtocolError(fmt::format("trainer got unexpected {}", message_kind_name(m.kind)));
      }
    }
    if (!pending || k.training_size() == 0) return Step::Continue;

    pending = false;
    const bool stop = k.retrain(probe);
    ++rounds;
    Message done;
    done.kind = MessageKind::RetrainDone;
    done.id = rounds;
    if (rounds % sync_every == 0) done.weights = k.get_weight();
    env.send_message(manager, done);
    if (stop) {
      env.log->info("trainer requested stop after {} rounds", rounds);
      report_stop(env, false);
      for (auto& e : inbox) {
        if (is_stop(e)) return Step::Stop;
      }
      wait_for_stop(env, k, timer);
      return Step::Stop;
    }
    return Step::Continue;
  });
}

}  // namespace pal
