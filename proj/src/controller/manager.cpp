#include "pal/controller/manager.hpp"

#include <fstream>

#include <fmt/format.h>

#include "pal/controller/selection.hpp"
#include "pal/core/errors.hpp"
#include "pal/io/layout.hpp"
#include "pal/transport/collectives.hpp"

namespace pal {

ManagerState::ManagerState(const WorkflowConfig& cfg, AdjustHook adjust)
    : trainers_(cfg.prediction_only ? 0 : static_cast<std::size_t>(cfg.train_workers)),
      dynamic_(cfg.dynamic_oracle_list && !cfg.prediction_only),
      adjust_(std::move(adjust)),
      oracle_buffer_(cfg.oracle_buffer_capacity),
      training_buffer_(static_cast<std::size_t>(cfg.retrain_size)) {
  if (!cfg.prediction_only) {
    for (int i = 0; i < cfg.orcl_workers; ++i) idle_.push_back(static_cast<std::uint32_t>(i));
  }
}

void ManagerState::enqueue(const std::vector<Sample>& inputs) {
  for (const auto& s : inputs) {
    oracle_buffer_.push(s);
    ++counters_.selected;
  }
}

std::vector<Dispatch> ManagerState::dispatch() {
  std::vector<Dispatch> out;
  while (!idle_.empty() && !oracle_buffer_.empty()) {
    const auto oracle = idle_.front();
    idle_.pop_front();
    auto task = *oracle_buffer_.pop_front();
    busy_[oracle] = task.id;
    ++counters_.dispatched;
    out.push_back({oracle, std::move(task)});
  }
  return out;
}

std::optional<std::vector<LabeledSample>> ManagerState::on_label(std::uint32_t oracle, std::uint64_t id,
                                                                 LabeledSample ls) {
  auto it = busy_.find(oracle);
  if (it == busy_.end() || it->second != id) {
    throw ProtocolError(fmt::format("unexpected label {} from oracle {}", id, oracle));
  }
  busy_.erase(it);
  idle_.push_back(oracle);
  ++counters_.labeled;
  auto batch = training_buffer_.add(std::move(ls));
  if (batch) {
    ++counters_.flushes;
    counters_.flushed_samples += batch->size();
  }
  return batch;
}

std::optional<AdjustSnapshot> ManagerState::on_retrain_done(std::uint32_t trainer) {
  done_since_adjust_.insert(trainer);
  if (!dynamic_ || snapshot_ || done_since_adjust_.size() < trainers_ || oracle_buffer_.empty()) return std::nullopt;
  done_since_adjust_.clear();
  AdjustSnapshot snap;
  for (const auto& t : oracle_buffer_.entries()) {
    snap.ids.push_back(t.id);
    snap.inputs.push_back(t.input);
  }
  snapshot_ = snap;
  responses_.clear();
  return snap;
}

bool ManagerState::on_adjust_response(std::uint32_t trainer, std::vector<Sample> predictions) {
  if (!snapshot_) throw ProtocolError(fmt::format("adjust response from trainer {} without a request", trainer));
  if (predictions.size() != snapshot_->inputs.size()) {
    throw ProtocolError(fmt::format("trainer {} predicted {} of {} buffered inputs", trainer, predictions.size(),
                                    snapshot_->inputs.size()));
  }
  responses_[trainer] = std::move(predictions);
  if (responses_.size() < trainers_) return false;

  std::vector<std::vector<Sample>> by_member;
  for (auto& [rank, preds] : responses_) by_member.push_back(std::move(preds));
  const auto batch = CommitteeBatch::from_members(by_member);
  const auto order = adjust_(snapshot_->inputs, batch);
  validate_adjust_order(order, snapshot_->inputs.size());
  std::vector<std::uint64_t> kept;
  kept.reserve(order.size());
  for (auto i : order) kept.push_back(snapshot_->ids[i]);
  counters_.pruned += oracle_buffer_.apply_adjustment(snapshot_->ids, kept);
  ++counters_.adjustments;
  snapshot_.reset();
  responses_.clear();
  return true;
}

namespace {

constexpr auto kPoll = std::chrono::milliseconds(50);

class ManagerProgress final : public KernelBase {
 public:
  ManagerProgress(std::filesystem::path path, const ManagerState& state) : path_(std::move(path)), state_(state) {}

  void save_progress() override {
    std::ofstream out(path_, std::ios::app);
    const auto& c = state_.counters();
    out << fmt::format(
        "selected={} dispatched={} labeled={} pruned={} flushes={} weight_syncs={} adjustments={} "
        "oracle_buffer={} training_buffer={} in_flight={}\n",
        c.selected, c.dispatched, c.labeled, c.pruned, c.flushes, c.weight_syncs, c.adjustments,
        state_.oracle_buffer().size(), state_.training_buffer().size(), state_.in_flight());
  }

 private:
  std::filesystem::path path_;
  const ManagerState& state_;
};

}  // namespace

ManagerCounters run_manager(WorkerEnv& env, ManagerState& state, const std::function<void()>& abandon_work) {
  const ResultsLayout layout(env.cfg.result_dir);
  ManagerProgress progress(layout.manager_progress(), state);
  SnapshotTimer timer(env.cfg.progress_save_interval);
  const auto& roster = env.roster;
  const auto exchange = WorkerId::exchange();
  const auto generators = roster.generators.size();
  bool shutting_down = false;

  auto begin_shutdown = [&](const std::string& reason) {
    if (shutting_down) return;
    shutting_down = true;
    env.control.mark_shutdown(reason);
    env.log->info("shutting down: {}", reason);
    if (abandon_work) abandon_work();
    const ControlSignal stop{SignalKind::StopRun, WorkerId::manager(), false};
    for (const auto& w : roster.all()) {
      if (w == env.self()) continue;
      try {
        env.send_signal(w, stop);
      } catch (const DeadWorker&) {
      }
    }
  };

  auto handle_signal = [&](const Envelope& e) {
    const auto s = decode_signal(e.payload);
    if (s.kind != SignalKind::StopRun) return;
    if (shutting_down) {
      env.log->info("ignoring further stop from {}", e.src.str());
      return;
    }
    begin_shutdown(fmt::format("{} from {}", s.failure ? "failure" : "stop request", e.src.str()));
  };

  auto handle_data = [&](const Envelope& e) {
    auto m = decode_message(e.payload, env.mode());
    switch (m.kind) {
      case MessageKind::Selection:
        state.enqueue(m.samples);
        break;
      case MessageKind::RoundBudget:
        begin_shutdown("round budget reached");
        break;
      case MessageKind::OracleResult: {
        if (e.src.kernel != Kernel::Oracle || m.labeled.size() != 1) throw ProtocolError("malformed oracle result");
        if (auto batch = state.on_label(e.src.rank, m.id, std::move(m.labeled.front()))) {
          Message train;
          train.kind = MessageKind::TrainBatch;
          train.labeled = std::move(*batch);
          broadcast(env.ep, encode_message(train, env.mode()), roster.trainers);
        }
        break;
      }
      case MessageKind::RetrainDone: {
        if (e.src.kernel != Kernel::Training) throw ProtocolError("retrain report from a non-trainer");
        if (m.weights) {
          // Trainer i feeds predictor i.
          env.ep.send(roster.predictors.at(e.src.rank), Tag::Weights, serialize_weights(*m.weights, env.mode()));
          state.on_weight_sync();
        }
        if (auto snap = state.on_retrain_done(e.src.rank)) {
          broadcast(env.ep, encode_message(Message::of_samples(MessageKind::AdjustRequest, snap->inputs), env.mode()),
                    roster.trainers);
        }
        break;
      }
      case MessageKind::AdjustResponse:
        if (e.src.kernel != Kernel::Training) throw ProtocolError("adjust response from a non-trainer");
        state.on_adjust_response(e.src.rank, std::move(m.samples));
        break;
      default:
        throw ProtocolError(fmt::format("manager got unexpected {} from {}", message_kind_name(m.kind), e.src.str()));
    }
  };

  env.log->info("started");
  try {
    while (!shutting_down) {
      timer.poll(progress, env.tally(), *env.log);
      if (env.control.should_abort()) {
        begin_shutdown("interrupted");
        break;
      }
      for (auto& d : state.dispatch()) {
        Message req = Message::of_sample(MessageKind::OracleRequest, std::move(d.task.input));
        req.id = d.task.id;
        env.send_message(roster.oracles.at(d.oracle), req);
      }
      // Selections wait in the exchange's channel while the oracle buffer
      // is too full to take a whole round.
      const bool room = state.can_accept(generators);
      auto accept = [&](const WorkerId& src, Tag tag) {
        if (tag == Tag::Signal) return true;
        if (tag != Tag::Data) return false;
        return src != exchange || room;
      };
      auto e = env.ep.next(accept, std::min(timer.deadline(), Clock::now() + kPoll));
      if (!e) continue;
      if (e->tag == Tag::Signal) {
        handle_signal(*e);
      } else {
        handle_data(*e);
      }
    }
  } catch (const std::exception& ex) {
    env.log->error("failure: {}", ex.what());
    env.control.tally(env.self()).failed = true;
    begin_shutdown(fmt::format("failure in manager: {}", ex.what()));
  }

  // Keep every channel into the manager moving until all other workers are
  // gone, so none of them blocks on a send during shutdown.
  std::size_t discarded = 0;
  auto others_alive = [&] {
    for (const auto& w : roster.all()) {
      if (w != env.self() && env.ep.is_open(w)) return true;
    }
    return false;
  };
  auto any = [](const WorkerId&, Tag) { return true; };
  while (others_alive()) {
    if (auto e = env.ep.next(any, Clock::now() + kPoll)) {
      if (e->tag == Tag::Signal && decode_signal(e->payload).kind == SignalKind::StopRun) {
        env.log->info("ignoring further stop from {}", e->src.str());
      }
      ++discarded;
    }
  }
  env.log->info("discarded {} messages during shutdown", discarded);
  finish_worker(env, progress);
  return state.counters();
}

}  // namespace pal
