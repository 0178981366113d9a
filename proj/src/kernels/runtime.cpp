#include "pal/kernels/runtime.hpp"

#include <algorithm>

#include "pal/core/errors.hpp"

namespace pal {
namespace {

constexpr auto kLivenessPoll = std::chrono::milliseconds(100);

}  // namespace

Roster Roster::from_config(const WorkflowConfig& cfg) {
  Roster r;
  auto fill = [](std::vector<WorkerId>& out, Kernel k, int n) {
    for (int i = 0; i < n; ++i) out.push_back({k, static_cast<std::uint32_t>(i)});
  };
  fill(r.predictors, Kernel::Prediction, cfg.pred_workers);
  fill(r.generators, Kernel::Generator, cfg.gene_workers);
  if (!cfg.prediction_only) {
    fill(r.oracles, Kernel::Oracle, cfg.orcl_workers);
    fill(r.trainers, Kernel::Training, cfg.train_workers);
  }
  return r;
}

std::vector<WorkerId> Roster::all() const {
  std::vector<WorkerId> out{WorkerId::manager(), WorkerId::exchange()};
  for (const auto* group : {&predictors, &generators, &oracles, &trainers}) {
    out.insert(out.end(), group->begin(), group->end());
  }
  return out;
}

RunControl::RunControl(const std::vector<WorkerId>& workers) {
  for (const auto& w : workers) tallies_.emplace(w, std::make_unique<WorkerTally>());
}

bool RunControl::mark_shutdown(std::string reason) {
  std::lock_guard lock(m_);
  if (shutdown_at_) return false;
  shutdown_at_ = Clock::now();
  reason_ = std::move(reason);
  return true;
}

std::optional<Clock::time_point> RunControl::shutdown_started() const {
  std::lock_guard lock(m_);
  return shutdown_at_;
}

std::string RunControl::stop_reason() const {
  std::lock_guard lock(m_);
  return reason_;
}

SnapshotTimer::SnapshotTimer(double interval_seconds)
    : interval_(std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(interval_seconds))),
      next_(Clock::now() + interval_) {}

void SnapshotTimer::poll(KernelBase& k, WorkerTally& tally, spdlog::logger& log) {
  const auto now = Clock::now();
  if (now < next_) return;
  try {
    k.save_progress();
  } catch (const std::exception& e) {
    log.error("save_progress failed: {}", e.what());
  }
  ++tally.saves;
  next_ = now + interval_;
}

void finish_worker(WorkerEnv& env, KernelBase& k) {
  auto& tally = env.tally();
  try {
    k.save_progress();
  } catch (const std::exception& e) {
    env.log->error("final save_progress failed: {}", e.what());
  }
  ++tally.saves;
  try {
    k.stop_run();
  } catch (const std::exception& e) {
    env.log->error("stop_run failed: {}", e.what());
  }
  ++tally.stop_runs;
  tally.finished_at = Clock::now();
  tally.finished = true;
  env.log->info("stopped");
  env.log->flush();
  env.ep.close();
}

void report_stop(WorkerEnv& env, bool failure) {
  const auto self = env.self();
  ControlSignal s{SignalKind::StopRun, self, failure};
  if (!failure) s = ControlSignal::stop_request(self);
  if (failure) env.tally().failed = true;
  try {
    env.send_signal(WorkerId::manager(), s);
  } catch (const DeadWorker&) {
    env.log->warn("manager already gone");
  }
}

bool is_stop(const Envelope& e) {
  return e.tag == Tag::Signal && e.src == WorkerId::manager() && decode_signal(e.payload).kind == SignalKind::StopRun;
}

void wait_for_stop(WorkerEnv& env, KernelBase& k, SnapshotTimer& timer) {
  const auto manager = WorkerId::manager();
  auto from_manager = [&manager](const WorkerId& src, Tag tag) { return src == manager && tag == Tag::Signal; };
  while (true) {
    timer.poll(k, env.tally(), *env.log);
    const auto deadline = std::min(timer.deadline(), Clock::now() + kLivenessPoll);
    auto e = env.ep.next(from_manager, deadline);
    if (e && is_stop(*e)) return;
    if (!e && !env.ep.is_open(manager) && !env.ep.probe(manager, Tag::Signal)) return;
  }
}

}  // namespace pal
