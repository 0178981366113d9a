#include "pal/controller/workflow.hpp"

#include <deque>
#include <exception>
#include <fstream>
#include <thread>

#include <fmt/format.h>

#include "pal/controller/selection.hpp"
#include "pal/core/config.hpp"
#include "pal/core/errors.hpp"
#include "pal/io/layout.hpp"
#include "pal/io/logging.hpp"
#include "pal/kernels/workers.hpp"
#include "pal/transport/inprocess.hpp"
#include "pal/transport/socket.hpp"

namespace pal {
namespace {

double seconds(Clock::duration d) { return std::chrono::duration<double>(d).count(); }

// Runs fn(0..n-1) on n threads and rethrows the first failure.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    threads.emplace_back([&, i] {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <class K>
void snapshot_all(std::vector<std::unique_ptr<K>>& ks) {
  for (auto& k : ks) k->save_progress();
}

void finish_all(KernelSet& ks) {
  auto finish = [](auto& group) {
    for (auto& k : group) {
      k->save_progress();
      k->stop_run();
    }
  };
  finish(ks.predictors);
  finish(ks.generators);
  finish(ks.oracles);
  finish(ks.trainers);
}

// Progress files for the two controller roles in runs without controller
// threads, so every run leaves one artifact per role.
void write_controller_progress(const ResultsLayout& layout, const ManagerCounters& c, std::uint64_t rounds) {
  std::ofstream(layout.manager_progress(), std::ios::app)
      << fmt::format("selected={} labeled={} flushes={} weight_syncs={} adjustments={} pruned={}\n", c.selected,
                     c.labeled, c.flushes, c.weight_syncs, c.adjustments, c.pruned);
  std::ofstream(layout.exchange_progress(), std::ios::app)
      << fmt::format("rounds={} selected={}\n", rounds, c.selected);
}

RunReport base_report(const WorkflowConfig& cfg, std::string mode, std::optional<std::uint64_t> rounds) {
  RunReport r;
  r.mode = std::move(mode);
  r.seed = cfg.seed;
  r.config_fingerprint = config_fingerprint(cfg);
  r.rounds_requested = rounds;
  return r;
}

std::vector<Sample> gather_inputs(std::vector<Generated>& gen) {
  std::vector<Sample> inputs;
  inputs.reserve(gen.size());
  for (auto& g : gen) inputs.push_back(std::move(g.next));
  return inputs;
}

}  // namespace

KernelSet KernelSet::build(const KernelFactory& f, const Roster& roster) {
  KernelSet ks;
  for (const auto& w : roster.predictors) ks.predictors.push_back(f.predictor(w.rank));
  for (const auto& w : roster.generators) ks.generators.push_back(f.generator(w.rank));
  for (const auto& w : roster.oracles) ks.oracles.push_back(f.oracle(w.rank));
  for (const auto& w : roster.trainers) ks.trainers.push_back(f.trainer(w.rank));
  return ks;
}

void check_committee(const WorkflowConfig& cfg, const KernelFactory& f) {
  if (!f.std_based_selection) return;
  if (cfg.pred_workers < 2) {
    throw ConfigError(
        fmt::format("std-based selection needs at least 2 prediction workers, got {}", cfg.pred_workers),
        "pred_process");
  }
  if (cfg.dynamic_oracle_list && !cfg.prediction_only && cfg.train_workers < 2) {
    throw ConfigError(fmt::format("dynamic oracle list needs at least 2 training workers, got {}", cfg.train_workers),
                      "ml_process");
  }
}

double WorkflowResult::exchange_throughput() const {
  const auto& ends = exchange.round_ends;
  if (ends.size() < 2) return 0.0;
  const double span = seconds(ends.back() - ends.front());
  return span > 0 ? static_cast<double>(ends.size() - 1) / span : 0.0;
}

// -- concurrent ----------------------------------------------------------------

WorkflowResult run_workflow(const WorkflowConfig& cfg, const KernelFactory& f, const WorkflowOptions& opt) {
  check_committee(cfg, f);
  const auto t0 = Clock::now();
  const ResultsLayout layout(cfg.result_dir);
  const auto roster = Roster::from_config(cfg);
  auto kernels = KernelSet::build(f, roster);
  const auto workers = roster.all();

  std::unique_ptr<Transport> transport;
  if (opt.sockets) {
    transport = std::make_unique<SocketTransport>(workers, cfg.channel_capacity, opt.trace);
  } else {
    transport = std::make_unique<InProcessTransport>(workers, cfg.channel_capacity, opt.trace);
  }
  RunControl control(workers);
  control.watch(opt.abort);
  ManagerState state(cfg, f.adjust);
  const auto mode = size_mode(cfg.fixed_size_data);

  std::deque<WorkerEnv> envs;
  for (const auto& w : workers) {
    envs.push_back(WorkerEnv{Endpoint(*transport, w, mode), cfg, roster, control, make_worker_logger(layout, w)});
  }

  WorkflowResult result;
  const auto t_started = Clock::now();
  std::vector<std::thread> threads;
  for (auto& env : envs) {
    threads.emplace_back([&, e = &env] {
      try {
        const auto w = e->self();
        switch (w.kernel) {
          case Kernel::Manager: result.counters = run_manager(*e, state, f.abandon_work); break;
          case Kernel::Exchange: result.exchange = run_exchange(*e, f.selection, opt.rounds); break;
          case Kernel::Prediction: run_predictor(*e, *kernels.predictors[w.rank]); break;
          case Kernel::Generator: run_generator(*e, *kernels.generators[w.rank]); break;
          case Kernel::Oracle: run_oracle(*e, *kernels.oracles[w.rank]); break;
          case Kernel::Training: run_trainer(*e, *kernels.trainers[w.rank]); break;
        }
      } catch (const std::exception& ex) {
        e->log->critical("worker loop escaped: {}", ex.what());
        e->tally().failed = true;
        control.request_abort();
        e->ep.close();
      }
    });
  }
  for (auto& t : threads) t.join();
  const auto t_end = Clock::now();
  for (auto& env : envs) env.log->flush();

  transport->drain();
  result.trace = transport->trace();

  for (const auto& [w, tally] : control.tallies()) {
    result.tallies[w] = TallyCounts{tally->saves.load(), tally->stop_runs.load(), tally->failed.load()};
    result.failed = result.failed || tally->failed.load();
  }
  const auto shutdown_at = control.shutdown_started().value_or(t_end);
  Clock::time_point last_exit = shutdown_at;
  for (const auto& [w, tally] : control.tallies()) last_exit = std::max(last_exit, tally->finished_at);
  if (control.shutdown_started()) result.shutdown_latency = seconds(last_exit - shutdown_at);

  auto& r = result.report;
  r = base_report(cfg, "parallel", opt.rounds);
  r.rounds_completed = result.exchange.rounds;
  r.wall_time = seconds(t_end - t0);
  r.oracle_calls = result.counters.labeled;
  r.selected = result.counters.selected;
  r.flushes = result.counters.flushes;
  r.weight_syncs = result.counters.weight_syncs;
  r.stop_reason = control.stop_reason();
  r.phases = {{"startup", seconds(t_started - t0)},
              {"run", seconds(shutdown_at - t_started)},
              {"shutdown", seconds(t_end - shutdown_at)}};
  if (opt.write_report) write_run_report(layout.run_report(), r);
  return result;
}

// -- serial baseline -----------------------------------------------------------

RunReport serial_run(const WorkflowConfig& cfg, const KernelFactory& f, std::uint64_t rounds, bool write_report) {
  check_committee(cfg, f);
  const auto t0 = Clock::now();
  const ResultsLayout layout(cfg.result_dir);
  const auto roster = Roster::from_config(cfg);
  auto ks = KernelSet::build(f, roster);
  const auto g = ks.generators.size();
  const bool labeling = !cfg.prediction_only;

  ManagerCounters c;
  std::vector<Sample> pending;
  std::vector<std::optional<Sample>> feedback(g);
  Clock::duration t_label{}, t_train{}, t_gen{};
  std::uint64_t done = 0;
  std::string reason = "round budget reached";
  const auto interval =
      std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.progress_save_interval));
  auto next_snapshot = Clock::now() + interval;
  auto never = [] { return false; };

  while (done < rounds) {
    if (labeling && !pending.empty()) {
      auto t = Clock::now();
      std::vector<Sample> labels(pending.size());
      std::atomic<std::size_t> next{0};
      parallel_for(ks.oracles.size(), [&](std::size_t o) {
        for (auto i = next++; i < pending.size(); i = next++) labels[i] = ks.oracles[o]->label(pending[i]);
      });
      c.dispatched += pending.size();
      c.labeled += pending.size();
      t_label += Clock::now() - t;

      t = Clock::now();
      std::vector<LabeledSample> batch;
      batch.reserve(pending.size());
      for (std::size_t i = 0; i < pending.size(); ++i) batch.push_back({pending[i], std::move(labels[i])});
      pending.clear();
      ++c.flushes;
      c.flushed_samples += batch.size();
      std::vector<char> stop(ks.trainers.size(), 0);
      parallel_for(ks.trainers.size(), [&](std::size_t i) {
        ks.trainers[i]->add_trainingset(batch);
        stop[i] = ks.trainers[i]->retrain(never);
      });
      for (std::size_t i = 0; i < ks.trainers.size(); ++i) {
        ks.predictors[i]->update(ks.trainers[i]->get_weight());
        ++c.weight_syncs;
      }
      t_train += Clock::now() - t;
      if (std::find(stop.begin(), stop.end(), 1) != stop.end()) {
        reason = "stop request from a trainer";
        break;
      }
    }

    auto t = Clock::now();
    std::vector<Generated> gen(g);
    parallel_for(g, [&](std::size_t i) { gen[i] = ks.generators[i]->generate(feedback[i]); });
    if (std::any_of(gen.begin(), gen.end(), [](const Generated& x) { return x.stop; })) {
      t_gen += Clock::now() - t;
      reason = "stop request from a generator";
      break;
    }
    const auto inputs = gather_inputs(gen);
    std::vector<std::vector<Sample>> by_member(ks.predictors.size());
    parallel_for(ks.predictors.size(), [&](std::size_t m) { by_member[m] = ks.predictors[m]->predict(inputs); });
    for (const auto& p : by_member) {
      if (p.size() != g) throw ProtocolError(fmt::format("predict returned {} outputs for {} generators", p.size(), g));
    }
    auto decision = f.selection(inputs, CommitteeBatch::from_members(by_member));
    validate_decision(decision, inputs);
    auto picks = dedup_bit_exact(std::move(decision.to_oracle));
    if (labeling) {
      c.selected += picks.size();
      pending.insert(pending.end(), picks.begin(), picks.end());
    }
    for (std::size_t i = 0; i < g; ++i) feedback[i] = std::move(decision.to_generators[i]);
    t_gen += Clock::now() - t;
    ++done;

    if (Clock::now() >= next_snapshot) {
      snapshot_all(ks.predictors);
      snapshot_all(ks.generators);
      snapshot_all(ks.oracles);
      snapshot_all(ks.trainers);
      next_snapshot = Clock::now() + interval;
    }
  }
  finish_all(ks);
  write_controller_progress(layout, c, done);

  auto r = base_report(cfg, "serial", rounds);
  r.rounds_completed = done;
  r.wall_time = seconds(Clock::now() - t0);
  r.oracle_calls = c.labeled;
  r.selected = c.selected;
  r.flushes = c.flushes;
  r.weight_syncs = c.weight_syncs;
  r.stop_reason = reason;
  if (done > 0) r.phases = {{"label", seconds(t_label)}, {"train", seconds(t_train)}, {"generate", seconds(t_gen)}};
  if (write_report) write_run_report(layout.run_report(), r);
  return r;
}

// -- deterministic -------------------------------------------------------------

DeterministicResult run_deterministic(const WorkflowConfig& cfg, const KernelFactory& f, std::uint64_t rounds,
                                      bool write_report) {
  check_committee(cfg, f);
  const auto t0 = Clock::now();
  const ResultsLayout layout(cfg.result_dir);
  const auto roster = Roster::from_config(cfg);
  auto ks = KernelSet::build(f, roster);
  const auto g = ks.generators.size();
  const bool labeling = !cfg.prediction_only;
  const auto sync_every = static_cast<std::uint64_t>(std::max(1, cfg.weight_sync_interval));

  DeterministicResult out;
  ManagerState state(cfg, f.adjust);
  std::vector<std::optional<Sample>> feedback(g);
  std::vector<bool> fresh_data(ks.trainers.size(), false);
  std::vector<std::uint64_t> trainer_rounds(ks.trainers.size(), 0);
  std::uint64_t done = 0;
  std::string reason = "round budget reached";
  auto never = [] { return false; };

  auto oracle_step = [&] {
    for (auto& d : state.dispatch()) {
      auto label = ks.oracles[d.oracle]->label(d.task.input);
      if (auto batch = state.on_label(d.oracle, d.task.id, {std::move(d.task.input), std::move(label)})) {
        for (std::size_t t = 0; t < ks.trainers.size(); ++t) {
          ks.trainers[t]->add_trainingset(*batch);
          fresh_data[t] = true;
        }
      }
    }
  };

  while (done < rounds) {
    std::vector<Generated> gen(g);
    bool stop = false;
    for (std::size_t i = 0; i < g; ++i) {
      gen[i] = ks.generators[i]->generate(feedback[i]);
      stop = stop || gen[i].stop;
    }
    if (stop) {
      reason = "stop request from a generator";
      break;
    }
    const auto inputs = gather_inputs(gen);
    std::vector<std::vector<Sample>> by_member;
    for (auto& p : ks.predictors) {
      by_member.push_back(p->predict(inputs));
      if (by_member.back().size() != g) throw ProtocolError("predict changed the batch size");
    }
    auto decision = f.selection(inputs, CommitteeBatch::from_members(by_member));
    validate_decision(decision, inputs);
    auto picks = dedup_bit_exact(std::move(decision.to_oracle));
    for (std::size_t i = 0; i < g; ++i) feedback[i] = std::move(decision.to_generators[i]);

    if (labeling) {
      // A full buffer holds the round back until the oracles make room.
      while (!state.can_accept(picks.size())) oracle_step();
      state.enqueue(picks);
      out.selections.insert(out.selections.end(), picks.begin(), picks.end());
      oracle_step();

      for (std::size_t t = 0; t < ks.trainers.size(); ++t) {
        if (!fresh_data[t]) continue;
        fresh_data[t] = false;
        stop = ks.trainers[t]->retrain(never) || stop;
        if (++trainer_rounds[t] % sync_every == 0) {
          ks.predictors[t]->update(ks.trainers[t]->get_weight());
          state.on_weight_sync();
        }
        if (auto snap = state.on_retrain_done(static_cast<std::uint32_t>(t))) {
          for (std::size_t u = 0; u < ks.trainers.size(); ++u) {
            state.on_adjust_response(static_cast<std::uint32_t>(u), ks.trainers[u]->predict(snap->inputs));
          }
        }
      }
    }
    ++done;
    if (stop) {
      reason = "stop request from a trainer";
      break;
    }
  }
  for (auto& t : ks.trainers) out.final_weights.push_back(t->get_weight());
  finish_all(ks);
  out.counters = state.counters();
  write_controller_progress(layout, out.counters, done);

  auto& r = out.report;
  r = base_report(cfg, "deterministic", rounds);
  r.rounds_completed = done;
  r.wall_time = seconds(Clock::now() - t0);
  r.oracle_calls = out.counters.labeled;
  r.selected = out.counters.selected;
  r.flushes = out.counters.flushes;
  r.weight_syncs = out.counters.weight_syncs;
  r.stop_reason = reason;
  if (write_report) write_run_report(layout.run_report(), r);
  return out;
}

}  // namespace pal
