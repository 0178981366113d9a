// Runs each acceptance criterion end to end and prints one PASS/FAIL line
// per criterion. With arguments, runs only the listed criterion numbers.
// Exit status is the number of failures.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "cli.hpp"
#include "pal/controller/selection.hpp"
#include "pal/controller/workflow.hpp"
#include "pal/core/errors.hpp"
#include "pal/io/config_file.hpp"
#include "pal/io/layout.hpp"
#include "pal/io/report.hpp"
#include "pal/speedup/model.hpp"
#include "pal/toy/kernels.hpp"
#include "pal/transport/collectives.hpp"
#include "pal/transport/inprocess.hpp"
#include "support/recording.hpp"
#include "support/support.hpp"

using namespace pal;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

/// Collects failed sub-checks; the verdict passes only when there are none.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  Verdict verdict(std::string detail) const {
    if (failures_.empty()) return {true, std::move(detail)};
    std::string msg = failures_.front();
    if (failures_.size() > 1) msg += fmt::format(" (+{} more)", failures_.size() - 1);
    return {false, msg + "; " + detail};
  }

 private:
  std::vector<std::string> failures_;
};

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within_ulp(double got, double want) {
  return got >= std::nextafter(want, -INFINITY) && got <= std::nextafter(want, INFINITY);
}

struct CliOutput {
  int code;
  std::string out;
  std::string err;
};

CliOutput cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

/// Value of `key=` in a line of space- or newline-separated key=value pairs.
std::optional<double> field(const std::string& text, const std::string& key) {
  const auto at = text.find(key + "=");
  if (at == std::string::npos) return std::nullopt;
  const auto begin = text.data() + at + key.size() + 1;
  double v = 0;
  auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), v);
  if (ec != std::errc{}) return std::nullopt;
  return v;
}

// -- 1 -----------------------------------------------------------------------

Verdict analytical_presets() {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto uc3 = cli_run({"estimate", "--preset", "uc3"});
  const auto uc1 = cli_run({"estimate", "--preset", "uc1", "--N", "8", "--P", "8"});
  const auto uc2 = cli_run({"estimate", "--preset", "uc2"});
  const double took = elapsed(t0);
  const auto s3 = field(uc3.out, "S"), s1 = field(uc1.out, "S"), s2 = field(uc2.out, "S");
  c.expect(uc3.code == 0 && uc1.code == 0 && uc2.code == 0, "estimate exited nonzero");
  c.expect(s3 && within_ulp(*s3, 3.0), "uc3 printed " + uc3.out);
  c.expect(s1 && within_ulp(*s1, 2.0), "uc1 printed " + uc1.out);
  c.expect(s2 && *s2 >= 1.0 && *s2 <= 1.01, "uc2 printed " + uc2.out);
  c.expect(took < 1.0, "too slow");
  auto line = [](const std::string& s) { return s.substr(0, s.find('\n')); };
  return c.verdict(fmt::format("{} | {} | {} | {:.3f}s", line(uc3.out), line(uc1.out), line(uc2.out), took));
}

// -- 2 -----------------------------------------------------------------------

Verdict equal_time_grid() {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  int cells = 0, bad = 0;
  for (std::uint64_t n = 1; n <= 64; ++n) {
    for (std::uint64_t p = 1; p <= n; ++p) {
      ++cells;
      const double want = 1.0 + static_cast<double>(p) / static_cast<double>(n);
      if (!within_ulp(speedup({1.0, 1.0, 0.0, n, p}), want)) ++bad;
    }
  }
  const double took = elapsed(t0);
  c.expect(bad == 0, fmt::format("{} cells off by more than 1 ulp", bad));
  c.expect(took < 1.0, "too slow");
  return c.verdict(fmt::format("{} (N,P) cells in {:.3f}s", cells, took));
}

// -- 3 -----------------------------------------------------------------------

Verdict measured_speedup(const std::filesystem::path& dir) {
  Checks c;
  auto cfg = test::small_config(dir / "uc3");
  cfg.gene_workers = 4;
  cfg.orcl_workers = 4;
  cfg.retrain_size = 4;
  cfg.oracle_latency = 0.1;
  cfg.gen_latency = 0.1;
  cfg.train_max_epochs = 10;
  cfg.train_epoch_latency = 0.01;
  test::write_text(dir / "uc3.cfg", emit_config(cfg));

  const auto t0 = std::chrono::steady_clock::now();
  const auto r = cli_run({"compare", "--config", (dir / "uc3.cfg").string(), "--rounds", "20"});
  const double took = elapsed(t0);
  const auto report = test::read_text(ResultsLayout(cfg.result_dir).comparison_report());
  const auto measured = field(report, "measured_speedup");
  const auto analytical = field(report, "analytical_speedup");
  c.expect(r.code == 0, fmt::format("compare exited {}: {}", r.code, r.err));
  c.expect(measured && *measured >= 2.55, "measured speedup below 2.55");
  c.expect(took < 120.0, "too slow");
  return c.verdict(fmt::format("measured={:.3f} analytical={:.3f} in {:.1f}s", measured.value_or(NAN),
                               analytical.value_or(NAN), took));
}

// -- 4 -----------------------------------------------------------------------

Verdict decoupling(const std::filesystem::path& dir) {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = test::small_config(dir / "coupled");
  cfg.gene_workers = 4;
  cfg.orcl_workers = 2;
  cfg.retrain_size = 2;
  cfg.gen_latency = 0.01;
  cfg.oracle_latency = 1.0;
  cfg.train_epoch_latency = 0.01;
  cfg.train_max_epochs = 20;
  WorkflowOptions opt;
  opt.rounds = 200;
  const auto with_oracle = run_workflow(cfg, make_toy_factory(cfg, std::make_shared<RealClock>()), opt);

  auto bare = cfg;
  bare.result_dir = dir / "bare";
  bare.prediction_only = true;
  const auto without = run_workflow(bare, make_toy_factory(bare, std::make_shared<RealClock>()), opt);
  const double took = elapsed(t0);

  const double a = with_oracle.exchange_throughput(), b = without.exchange_throughput();
  const double ratio = b > 0 ? a / b : 0.0;
  c.expect(!with_oracle.failed && !without.failed, "a run failed");
  c.expect(with_oracle.exchange.rounds == 200 && without.exchange.rounds == 200, "rounds missing");
  c.expect(with_oracle.counters.selected > 0, "nothing was sent to the oracles");
  c.expect(std::fabs(ratio - 1.0) <= 0.10, "throughput differs by more than 10%");
  c.expect(took < 60.0, "too slow");
  return c.verdict(fmt::format("rounds/s with oracle={:.2f} without={:.2f} ratio={:.3f} in {:.1f}s", a, b, ratio,
                               took));
}

// -- 5 -----------------------------------------------------------------------

std::vector<long double> brute_std(const std::vector<Sample>& members) {
  std::vector<long double> out(members.front().dim());
  for (std::size_t d = 0; d < out.size(); ++d) {
    long double mean = 0, ss = 0;
    for (const auto& m : members) mean += m[d];
    mean /= members.size();
    for (const auto& m : members) ss += (m[d] - mean) * (m[d] - mean);
    out[d] = std::sqrt(ss / (members.size() - 1));
  }
  return out;
}

void check_no_lost_label(Checks& c, const std::filesystem::path& dir, int retrain_size) {
  auto cfg = test::small_config(dir / fmt::format("labels_{}", retrain_size));
  cfg.gene_workers = 4;
  cfg.retrain_size = retrain_size;
  cfg.gen_latency = 0.005;
  cfg.oracle_latency = 0.01;
  auto rec = std::make_shared<test::Recorder>();
  WorkflowOptions opt;
  opt.rounds = 150;
  const auto r =
      run_workflow(cfg, test::recording(make_toy_factory(cfg, std::make_shared<RealClock>()), rec, 10), opt);
  const auto tag = fmt::format("[retrain_size={}] ", retrain_size);
  c.expect(!r.failed, tag + "run failed");
  c.expect(rec->selected.size() == 40, tag + "expected 40 selections");
  for (std::uint32_t t = 0; t < 2; ++t) {
    std::vector<LabeledSample> all;
    for (const auto& b : rec->batches[t]) {
      c.expect(b.size() == static_cast<std::size_t>(retrain_size), tag + "flush size differs from retrain_size");
      all.insert(all.end(), b.begin(), b.end());
    }
    for (const auto& x : rec->selected) {
      const bool found = std::any_of(all.begin(), all.end(), [&](const auto& ls) { return ls.input.bit_equal(x); });
      c.expect(found, tag + "selected input missing from a trainer");
    }
    c.expect(all.size() == rec->selected.size(), tag + "trainer saw extra samples");
    c.expect(rec->predictor_weights[t] == rec->trainer_weights[t], tag + "predictor weights differ from trainer");
  }
}

Verdict protocol_invariants(const std::filesystem::path& dir) {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();

  check_no_lost_label(c, dir, 4);
  check_no_lost_label(c, dir, 20);

  std::vector<WorkerId> workers{WorkerId::exchange(), WorkerId::manager()};
  std::vector<WorkerId> gens;
  for (std::uint32_t i = 0; i < 20; ++i) gens.push_back({Kernel::Generator, i});
  workers.insert(workers.end(), gens.begin(), gens.end());

  {
    InProcessTransport t(workers);
    Endpoint ex(t, WorkerId::exchange(), SizeMode::Fixed);
    std::vector<Bytes> payloads;
    for (std::uint32_t i = 0; i < 20; ++i) payloads.push_back(serialize_sample(Sample{double(i)}, SizeMode::Fixed));
    scatter(ex, payloads, gens);
    for (std::uint32_t i = 0; i < 20; ++i) {
      const auto got = deserialize_sample(Endpoint(t, gens[i], SizeMode::Fixed).recv(ex.self(), Tag::Data),
                                          SizeMode::Fixed);
      c.expect(got == Sample{double(i)}, "scatter delivered to the wrong rank");
    }
    bool threw = false;
    try {
      scatter(ex, std::vector<Bytes>(3, payloads[0]), std::span(gens).first(2));
    } catch (const LengthMismatch&) {
      threw = true;
    }
    c.expect(threw, "scatter accepted 3 payloads for 2 destinations");
  }

  std::vector<int> order{0, 1, 2};
  do {
    InProcessTransport t(workers);
    Endpoint ex(t, WorkerId::exchange(), SizeMode::Fixed);
    for (int r : order) {
      Endpoint(t, gens[r], SizeMode::Fixed).send(ex.self(), Tag::Data, serialize_sample(Sample{double(r)}, SizeMode::Fixed));
    }
    const auto got = gather(ex, std::span(gens).first(3));
    for (int r = 0; r < 3; ++r) {
      c.expect(deserialize_sample(got[r], SizeMode::Fixed) == Sample{double(r)}, "gather out of rank order");
    }
  } while (std::next_permutation(order.begin(), order.end()));

  int mismatches = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 1 + rng() % 20, m = 2 + rng() % 4;
    const double threshold = std::uniform_real_distribution<double>(0.0, 1.5)(rng);
    std::vector<Sample> inputs;
    CommitteeBatch batch;
    for (std::size_t g = 0; g < n; ++g) {
      inputs.push_back(test::random_sample(rng, 4));
      std::vector<Sample> preds;
      for (std::size_t k = 0; k < m; ++k) preds.push_back(test::random_sample(rng, 3));
      batch.per_item.push_back(std::move(preds));
    }
    const auto d = prediction_check(inputs, batch, threshold);
    std::vector<Sample> want;
    for (std::size_t g = 0; g < n; ++g) {
      const auto s = brute_std(batch.per_item[g]);
      if (std::any_of(s.begin(), s.end(), [&](long double v) { return v > threshold; })) want.push_back(inputs[g]);
    }
    mismatches += d.to_oracle != want;
  }
  c.expect(mismatches == 0, fmt::format("{} of 500 batches disagree with brute force", mismatches));

  {
    test::TempDir wdir("wsync");
    auto clock = std::make_shared<VirtualClock>();
    const ToyGroundTruth truth(3, 0.0);
    ToyTrainer trainer(0, toy_initial_model(3, 0), 3, {}, clock, wdir / "h.json");
    ToyPredictor predictor(0, toy_initial_model(3, 0), clock, 0.0, wdir / "p.txt");
    std::mt19937_64 rng(3);
    std::vector<LabeledSample> data;
    for (int i = 0; i < 20; ++i) {
      auto x = test::random_sample(rng, 4);
      data.push_back({x, truth.label(x)});
    }
    trainer.add_trainingset(data);
    trainer.retrain({});
    predictor.update(trainer.get_weight());
    std::vector<Sample> probes;
    for (int i = 0; i < 100; ++i) probes.push_back(test::random_sample(rng, 4));
    const auto a = predictor.predict(probes), b = trainer.predict(probes);
    int differ = 0;
    for (std::size_t i = 0; i < probes.size(); ++i) differ += !a[i].bit_equal(b[i]);
    c.expect(differ == 0, fmt::format("{} of 100 probes differ after weight sync", differ));
  }

  const double took = elapsed(t0);
  c.expect(took < 60.0, "too slow");
  return c.verdict(fmt::format("labels, flushes at 4 and 20, scatter, gather x6, selection x500, sync x100 in {:.1f}s",
                               took));
}

// -- 6 -----------------------------------------------------------------------

Verdict shutdown(const std::filesystem::path& dir) {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = test::small_config(dir / "shutdown");
  cfg.pred_workers = cfg.train_workers = 3;
  cfg.orcl_workers = 5;
  cfg.gene_workers = 20;
  cfg.retrain_size = 20;
  cfg.gen_latency = 0.01;
  cfg.oracle_latency = 1.0;
  cfg.gen_limit = 10;
  const auto r = run_workflow(cfg, make_toy_factory(cfg, std::make_shared<RealClock>()));
  const double took = elapsed(t0);

  const ResultsLayout layout(cfg.result_dir);
  int once = 0, files = 0;
  for (const auto& [w, t] : r.tallies) {
    once += t.stop_runs == 1;
    files += std::filesystem::exists(layout.progress_file(w));
  }
  const double latency = r.shutdown_latency.value_or(INFINITY);
  c.expect(r.tallies.size() == 33, fmt::format("{} workers", r.tallies.size()));
  c.expect(once == 33, fmt::format("{} workers with exactly one stop_run", once));
  c.expect(files == 33, fmt::format("{} progress files", files));
  c.expect(r.report.stop_reason.find("generator") != std::string::npos, "stop did not come from a generator");
  c.expect(!r.failed, "a worker failed");
  c.expect(latency < cfg.oracle_latency + 1.0, "shutdown too slow");
  c.expect(took < 30.0, "too slow");
  return c.verdict(fmt::format("33 workers, reason \"{}\", exit {:.3f}s after the stop, total {:.1f}s",
                               r.report.stop_reason, latency, took));
}

// -- 7 -----------------------------------------------------------------------

Verdict replay(const std::filesystem::path& dir) {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = test::small_config(dir / "replay");
  cfg.gene_workers = 4;
  cfg.selection_threshold = 0.05;
  test::write_text(dir / "replay.cfg", emit_config(cfg));
  const auto r = cli_run({"replay", "--config", (dir / "replay.cfg").string(), "--rounds", "200", "--seed", "1234"});

  auto seeded = cfg;
  seeded.seed = 1234;
  seeded.result_dir = dir / "replay_direct";
  const auto direct =
      run_deterministic(seeded, make_toy_factory(seeded, std::make_shared<VirtualClock>()), 200, false);
  const double took = elapsed(t0);
  c.expect(r.code == 0, fmt::format("replay exited {}: {}{}", r.code, r.out, r.err));
  c.expect(r.out.rfind("replay identical", 0) == 0, "unexpected output " + r.out);
  c.expect(!direct.selections.empty(), "no selections, the check would be vacuous");
  c.expect(took < 30.0, "too slow");
  return c.verdict(fmt::format("{}selections per run={} in {:.2f}s", r.out.substr(0, r.out.find('\n')) + ", ",
                               direct.selections.size(), took));
}

// -- 8 -----------------------------------------------------------------------

Verdict learnability() {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  test::TempDir dir("learn");
  constexpr std::uint64_t kSeed = 2024;
  constexpr int kRounds = 5, kEpochsPerRound = 100;
  auto clock = std::make_shared<VirtualClock>();
  const ToyGroundTruth truth(kSeed, 0.0);
  ToyTrainerOptions opt;
  opt.max_epochs = kEpochsPerRound;
  std::vector<std::unique_ptr<ToyTrainer>> committee;
  for (std::uint32_t r = 0; r < 3; ++r) {
    committee.push_back(std::make_unique<ToyTrainer>(r, toy_initial_model(kSeed, r), kSeed, opt, clock,
                                                     dir / fmt::format("h{}.json", r)));
  }
  std::mt19937_64 rng(kSeed);
  std::vector<Sample> probes;
  for (int i = 0; i < 64; ++i) probes.push_back(test::random_sample(rng, 4));

  auto median_std = [&] {
    std::vector<std::vector<Sample>> by_member;
    for (const auto& t : committee) by_member.push_back(t->predict(probes));
    std::vector<double> per_probe;
    for (const auto& members : CommitteeBatch::from_members(by_member).per_item) {
      const auto s = committee_std(members);
      per_probe.push_back(*std::max_element(s.begin(), s.end()));
    }
    std::nth_element(per_probe.begin(), per_probe.begin() + per_probe.size() / 2, per_probe.end());
    return per_probe[per_probe.size() / 2];
  };

  std::vector<double> medians{median_std()};
  for (int round = 0; round < kRounds; ++round) {
    std::vector<LabeledSample> batch;
    for (int i = 0; i < 20; ++i) {
      auto x = test::random_sample(rng, 4);
      batch.push_back({x, truth.label(x)});
    }
    for (auto& t : committee) {
      t->add_trainingset(batch);
      t->retrain({});
    }
    medians.push_back(median_std());
  }
  bool monotone = true;
  for (std::size_t i = 2; i < medians.size(); ++i) monotone = monotone && medians[i] <= medians[i - 1];
  double worst_val = 0;
  for (const auto& t : committee) worst_val = std::max(worst_val, t->loss(t->val_set()));
  const double took = elapsed(t0);

  c.expect(monotone, "median committee std increased between retrain rounds");
  c.expect(medians[1] < medians[0], "first retrain did not reduce disagreement");
  c.expect(worst_val < 1e-6, "validation loss not below 1e-6");
  c.expect(took < 60.0, "too slow");
  std::string trail;
  for (double m : medians) trail += fmt::format("{}{:.3g}", trail.empty() ? "" : " ", m);
  return c.verdict(fmt::format("median std {} ; worst val loss {:.3g} after {} epochs in {:.2f}s", trail, worst_val,
                               kRounds * kEpochsPerRound, took));
}

}  // namespace

int main(int argc, char** argv) {
  test::TempDir dir("acceptance");
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"analytical speedup presets", analytical_presets},
      {"equal-time (N,P) grid", equal_time_grid},
      {"measured end-to-end speedup", [&] { return measured_speedup(dir.path()); }},
      {"exchange decoupled from oracles", [&] { return decoupling(dir.path()); }},
      {"protocol invariants", [&] { return protocol_invariants(dir.path()); }},
      {"shutdown correctness", [&] { return shutdown(dir.path()); }},
      {"deterministic replay", [&] { return replay(dir.path()); }},
      {"toy learnability", learnability},
  };
  std::vector<std::size_t> selected;
  for (int a = 1; a < argc; ++a) {
    const auto n = std::strtoul(argv[a], nullptr, 10);
    if (n < 1 || n > criteria.size()) {
      std::cerr << "no criterion " << argv[a] << '\n';
      return 2;
    }
    selected.push_back(n - 1);
  }
  if (selected.empty()) {
    for (std::size_t i = 0; i < criteria.size(); ++i) selected.push_back(i);
  }
  int failures = 0;
  for (const auto i : selected) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << fmt::format("criterion {}: {} {}: {}", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first,
                             v.detail)
              << std::endl;
  }
  return failures;
}
