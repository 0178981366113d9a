#include "pal/controller/exchange.hpp"

#include <fstream>

#include <fmt/format.h>

#include "pal/controller/selection.hpp"
#include "pal/core/errors.hpp"
#include "pal/io/layout.hpp"
#include "pal/transport/collectives.hpp"

namespace pal {
namespace {

class ExchangeProgress final : public KernelBase {
 public:
  ExchangeProgress(std::filesystem::path path, const ExchangeStats& stats) : path_(std::move(path)), stats_(stats) {}

  void save_progress() override {
    std::ofstream out(path_, std::ios::app);
    out << fmt::format("rounds={} selected={}\n", stats_.rounds, stats_.selected);
  }

 private:
  std::filesystem::path path_;
  const ExchangeStats& stats_;
};

// Dims seen on the first round; fixed-size runs must keep them.
struct DimGuard {
  std::optional<std::size_t> input;
  std::optional<std::size_t> prediction;

  static void check(std::optional<std::size_t>& seen, const std::vector<Sample>& xs, const char* what) {
    for (const auto& x : xs) {
      if (x.dim() == 0) throw ProtocolError(fmt::format("empty {} sample", what));
      if (!seen) seen = x.dim();
      if (*seen != x.dim()) {
        throw ProtocolError(fmt::format("{} dim changed from {} to {} in a fixed-size run", what, *seen, x.dim()));
      }
    }
  }
};

}  // namespace

ExchangeStats run_exchange(WorkerEnv& env, const SelectionHook& selection, std::optional<std::uint64_t> rounds) {
  ExchangeStats stats;
  const ResultsLayout layout(env.cfg.result_dir);
  ExchangeProgress progress(layout.exchange_progress(), stats);
  SnapshotTimer timer(env.cfg.progress_save_interval);
  const auto& roster = env.roster;
  const auto manager = WorkerId::manager();
  const std::vector<WorkerId> interrupters{manager};
  const auto g = roster.generators.size();
  const bool to_manager = !env.cfg.prediction_only;
  const bool fixed = env.mode() == SizeMode::Fixed;
  DimGuard dims;

  auto stopped = [](const GatherOutcome& o) { return decode_signal(o.signal->payload).kind == SignalKind::StopRun; };

  env.log->info("started");
  try {
    while (true) {
      timer.poll(progress, env.tally(), *env.log);
      if (rounds && stats.rounds >= *rounds) {
        env.send_message(manager, Message::of_samples(MessageKind::RoundBudget, {}));
        wait_for_stop(env, progress, timer);
        break;
      }

      auto gathered = gather_or_signal(env.ep, roster.generators, interrupters);
      if (gathered.signal) {
        if (stopped(gathered)) break;
        throw ProtocolError("unexpected signal during a round");
      }
      std::vector<Sample> inputs;
      inputs.reserve(g);
      for (const auto& p : gathered.payloads) {
        auto m = decode_message(p, env.mode());
        if (m.kind != MessageKind::GenInput || m.samples.size() != 1) throw ProtocolError("malformed generator input");
        inputs.push_back(std::move(m.samples.front()));
      }
      if (fixed) DimGuard::check(dims.input, inputs, "generator input");

      broadcast(env.ep, encode_message(Message::of_samples(MessageKind::Inputs, inputs), env.mode()),
                roster.predictors);
      auto predicted = gather_or_signal(env.ep, roster.predictors, interrupters);
      if (predicted.signal) {
        if (stopped(predicted)) break;
        throw ProtocolError("unexpected signal during a round");
      }
      std::vector<std::vector<Sample>> by_member;
      by_member.reserve(predicted.payloads.size());
      for (const auto& p : predicted.payloads) {
        auto m = decode_message(p, env.mode());
        if (m.kind != MessageKind::Predictions || m.samples.size() != g) {
          throw ProtocolError(fmt::format("predictor returned {} predictions for {} generators", m.samples.size(), g));
        }
        if (fixed) DimGuard::check(dims.prediction, m.samples, "prediction");
        by_member.push_back(std::move(m.samples));
      }

      auto decision = selection(inputs, CommitteeBatch::from_members(by_member));
      validate_decision(decision, inputs);
      auto picks = dedup_bit_exact(std::move(decision.to_oracle));

      std::vector<Bytes> feedback;
      feedback.reserve(g);
      for (auto& f : decision.to_generators) {
        feedback.push_back(encode_message(Message::of_sample(MessageKind::Feedback, std::move(f)), env.mode()));
      }
      scatter(env.ep, std::move(feedback), roster.generators);

      if (to_manager && !picks.empty()) {
        stats.selected += picks.size();
        env.send_message(manager, Message::of_samples(MessageKind::Selection, std::move(picks)));
      }
      ++stats.rounds;
      stats.round_ends.push_back(Clock::now());
    }
  } catch (const DeadWorker& e) {
    env.log->warn("{}; waiting for stop", e.what());
    wait_for_stop(env, progress, timer);
  } catch (const std::exception& e) {
    env.log->error("failure: {}", e.what());
    report_stop(env, true);
    wait_for_stop(env, progress, timer);
  }
  finish_worker(env, progress);
  return stats;
}

}  // namespace pal
