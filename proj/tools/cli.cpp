#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pal/controller/workflow.hpp"
#include "pal/core/config.hpp"
#include "pal/core/errors.hpp"
#include "pal/io/config_file.hpp"
#include "pal/io/layout.hpp"
#include "pal/io/report.hpp"
#include "pal/speedup/model.hpp"
#include "pal/toy/kernels.hpp"

namespace pal::cli {
namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> rounds;
  std::vector<std::string> overrides;
  std::string exec_mode = "concurrent";
  double tolerance = 0.15;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> other_seed;
  std::optional<double> t_oracle, t_train, t_gen;
  std::optional<std::uint64_t> n, p;
  std::string sweep;
  bool sockets = false;
};

WorkflowConfig load(const Options& o, std::ostream& err) {
  std::vector<std::string> warnings;
  auto overrides = o.overrides;
  if (o.seed) overrides.push_back(fmt::format("seed={}", *o.seed));
  auto cfg = load_config(o.config, overrides, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return cfg;
}

void print_summary(std::ostream& out, const RunReport& r) {
  out << fmt::format("{} rounds={} oracle_calls={} selected={} flushes={} weight_syncs={} wall_time={:.3f} "
                     "stop_reason=\"{}\"\n",
                     r.mode, r.rounds_completed, r.oracle_calls, r.selected, r.flushes, r.weight_syncs, r.wall_time,
                     r.stop_reason);
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err, const std::atomic<bool>* abort) {
  auto cfg = load(o, err);
  if (cfg.mode == RunMode::Estimate) {
    throw ConfigError("mode = estimate has no workflow to run; use the estimate subcommand", "mode");
  }
  if (o.exec_mode == "deterministic") {
    if (!o.rounds) throw ConfigError("--mode deterministic needs --rounds");
    auto res = run_deterministic(cfg, make_toy_factory(cfg, std::make_shared<VirtualClock>()), *o.rounds);
    print_summary(out, res.report);
    return kOk;
  }
  if (cfg.mode == RunMode::Serial) {
    if (!o.rounds) throw ConfigError("serial runs need --rounds");
    print_summary(out, serial_run(cfg, make_toy_factory(cfg, std::make_shared<RealClock>()), *o.rounds));
    return kOk;
  }
  WorkflowOptions wo;
  wo.rounds = o.rounds;
  wo.abort = abort;
  wo.sockets = o.sockets;
  auto res = run_workflow(cfg, make_toy_factory(cfg, std::make_shared<RealClock>()), wo);
  print_summary(out, res.report);
  if (res.failed) {
    err << "run ended after a worker failure: " << res.report.stop_reason << '\n';
    return kRuntimeFailure;
  }
  return kOk;
}

int cmd_serial(const Options& o, std::ostream& out, std::ostream& err) {
  auto cfg = load(o, err);
  cfg.mode = RunMode::Serial;
  if (!o.rounds) throw ConfigError("serial needs --rounds");
  print_summary(out, serial_run(cfg, make_toy_factory(cfg, std::make_shared<RealClock>()), *o.rounds));
  return kOk;
}

void print_estimate(std::ostream& out, const std::string& label, const WorkloadParams& p) {
  out << fmt::format("{} T_serial={} T_parallel={} S={}\n", label, format_double(t_serial(p)),
                     format_double(t_parallel(p)), format_double(speedup(p)));
}

std::vector<WorkloadParams> read_sweep(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read sweep file {}", path));
  std::string line;
  int n = 0;
  std::vector<WorkloadParams> rows;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (n == 1) {
      if (line != "t_oracle,t_train,t_gen,N,P") {
        throw ConfigError(fmt::format("line 1: sweep header must be t_oracle,t_train,t_gen,N,P"), {}, 1);
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 5) throw ConfigError(fmt::format("line {}: expected 5 columns", n), {}, n);
    try {
      std::size_t used = 0;
      auto num = [&](const std::string& c) {
        const double v = std::stod(c, &used);
        if (used != c.size()) throw std::invalid_argument(c);
        return v;
      };
      auto count = [&](const std::string& c) {
        const auto v = std::stoull(c, &used);
        if (used != c.size()) throw std::invalid_argument(c);
        return static_cast<std::uint64_t>(v);
      };
      WorkloadParams p{num(cells[0]), num(cells[1]), num(cells[2]), count(cells[3]), count(cells[4])};
      p.validate();
      rows.push_back(p);
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("line {}: {}", n, e.what()), {}, n);
    }
  }
  return rows;
}

int cmd_estimate(const Options& o, std::ostream& out) {
  if (!o.sweep.empty()) {
    const auto rows = read_sweep(o.sweep);
    for (std::size_t i = 0; i < rows.size(); ++i) print_estimate(out, fmt::format("row{}", i + 1), rows[i]);
    return kOk;
  }
  WorkloadParams p;
  std::string label = "custom";
  if (!o.preset.empty()) {
    p = preset(o.preset);
    label = o.preset;
  }
  if (o.t_oracle) p.t_oracle = *o.t_oracle;
  if (o.t_train) p.t_train = *o.t_train;
  if (o.t_gen) p.t_gen = *o.t_gen;
  if (o.n) p.N = *o.n;
  if (o.p) p.P = *o.p;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  print_estimate(out, label, p);
  return kOk;
}

/// Analytical parameters of a configured toy run: one round labels up to one
/// input per generator on the available oracles, retrains for the full epoch
/// budget and generates one block.
WorkloadParams params_of(const WorkflowConfig& cfg) {
  WorkloadParams p;
  p.t_oracle = cfg.oracle_latency;
  p.t_train = cfg.train_max_epochs * cfg.train_epoch_latency;
  p.t_gen = cfg.gen_latency + cfg.pred_latency;
  p.N = static_cast<std::uint64_t>(std::max(1, cfg.gene_workers));
  p.P = std::min<std::uint64_t>(p.N, static_cast<std::uint64_t>(std::max(1, cfg.orcl_workers)));
  return p;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  auto cfg = load(o, err);
  if (!o.rounds) throw ConfigError("compare needs --rounds");
  const ResultsLayout layout(cfg.result_dir);

  auto serial_cfg = cfg;
  serial_cfg.mode = RunMode::Serial;
  serial_cfg.result_dir = cfg.result_dir / "serial";
  const auto serial = serial_run(serial_cfg, make_toy_factory(serial_cfg, std::make_shared<RealClock>()), *o.rounds);

  auto parallel_cfg = cfg;
  parallel_cfg.mode = RunMode::Parallel;
  parallel_cfg.result_dir = cfg.result_dir / "parallel";
  WorkflowOptions wo;
  wo.rounds = o.rounds;
  auto parallel = run_workflow(parallel_cfg, make_toy_factory(parallel_cfg, std::make_shared<RealClock>()), wo);
  print_summary(out, serial);
  print_summary(out, parallel.report);
  if (parallel.failed) {
    err << "parallel run ended after a worker failure\n";
    return kRuntimeFailure;
  }

  const auto cmp = compare_measured(serial, parallel.report, params_of(cfg), o.tolerance);
  write_report_file(layout.comparison_report(), cmp.format());
  out << fmt::format("compare measured={:.4f} analytical={} bound={:.4f} tolerance={} pass={}\n", cmp.measured,
                     format_double(cmp.analytical), cmp.bound, format_double(cmp.tolerance),
                     cmp.pass ? "true" : "false");
  if (!cmp.pass) {
    err << fmt::format("measured speedup {:.4f} is below the bound {:.4f}\n", cmp.measured, cmp.bound);
    return kComparisonFailure;
  }
  return kOk;
}

int cmd_replay(const Options& o, std::ostream& out, std::ostream& err) {
  auto cfg = load(o, err);
  const auto rounds = o.rounds.value_or(50);
  auto run_once = [&](const char* sub, std::uint64_t seed) {
    auto c = cfg;
    c.seed = seed;
    c.result_dir = cfg.result_dir / sub;
    return run_deterministic(c, make_toy_factory(c, std::make_shared<VirtualClock>()), rounds);
  };
  const auto a = run_once("replay_a", cfg.seed);
  const auto b = run_once("replay_b", o.other_seed.value_or(cfg.seed));

  const auto n = std::min(a.selections.size(), b.selections.size());
  std::optional<std::size_t> diverged;
  for (std::size_t i = 0; i < n && !diverged; ++i) {
    if (!a.selections[i].bit_equal(b.selections[i])) diverged = i;
  }
  if (!diverged && a.selections.size() != b.selections.size()) diverged = n;
  bool same_weights = a.final_weights.size() == b.final_weights.size();
  for (std::size_t i = 0; same_weights && i < a.final_weights.size(); ++i) {
    const auto x = a.final_weights[i].values(), y = b.final_weights[i].values();
    same_weights = std::equal(x.begin(), x.end(), y.begin(), y.end(), [](double u, double v) {
      return std::bit_cast<std::uint64_t>(u) == std::bit_cast<std::uint64_t>(v);
    });
  }
  if (diverged) {
    out << fmt::format("replay diverged index={} selections_a={} selections_b={}\n", *diverged, a.selections.size(),
                       b.selections.size());
    return kComparisonFailure;
  }
  if (!same_weights) {
    out << fmt::format("replay diverged weights selections={}\n", a.selections.size());
    return kComparisonFailure;
  }
  out << fmt::format("replay identical selections={} trainers={}\n", a.selections.size(), a.final_weights.size());
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const std::atomic<bool>* abort) {
  CLI::App app{"Parallel active-learning workflow runner"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Settings file (key = value lines)")->required();
    sub->add_option("--override", o.overrides, "Setting override K=V, applied after the file")->take_all();
  };
  auto add_rounds = [&](CLI::App* sub) { sub->add_option("--rounds", o.rounds, "Exchange rounds to run"); };

  auto* run_cmd = app.add_subcommand("run", "Run the workflow");
  add_config(run_cmd);
  add_rounds(run_cmd);
  run_cmd->add_option("--mode", o.exec_mode, "concurrent or deterministic")
      ->check(CLI::IsMember({"concurrent", "deterministic"}));
  run_cmd->add_option("--seed", o.seed, "Override the seed");
  run_cmd->add_flag("--sockets", o.sockets, "Use the loopback socket transport");

  auto* serial_cmd = app.add_subcommand("serial", "Run the sequential baseline");
  add_config(serial_cmd);
  add_rounds(serial_cmd);

  auto* est_cmd = app.add_subcommand("estimate", "Analytical speedup estimate");
  est_cmd->add_option("--preset", o.preset, "Reference workload")->check(CLI::IsMember({"uc1", "uc2", "uc3"}));
  est_cmd->add_option("--t-oracle", o.t_oracle, "Seconds per labeled sample");
  est_cmd->add_option("--t-train", o.t_train, "Seconds per training round");
  est_cmd->add_option("--t-gen", o.t_gen, "Seconds per generation block");
  est_cmd->add_option("--N", o.n, "Samples to label");
  est_cmd->add_option("--P", o.p, "Oracle workers");
  est_cmd->add_option("--sweep", o.sweep, "CSV with header t_oracle,t_train,t_gen,N,P");

  auto* cmp_cmd = app.add_subcommand("compare", "Serial then parallel run, checked against the estimate");
  add_config(cmp_cmd);
  add_rounds(cmp_cmd);
  cmp_cmd->add_option("--tolerance", o.tolerance, "Allowed shortfall below the analytical speedup")
      ->check(CLI::Range(0.0, 0.999999));

  auto* replay_cmd = app.add_subcommand("replay", "Two deterministic runs, checked for identical results");
  add_config(replay_cmd);
  add_rounds(replay_cmd);
  replay_cmd->add_option("--seed", o.seed, "Seed of both runs");
  replay_cmd->add_option("--other-seed", o.other_seed, "Seed of the second run");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(o, out, err, abort);
    if (serial_cmd->parsed()) return cmd_serial(o, out, err);
    if (est_cmd->parsed()) return cmd_estimate(o, out);
    if (cmp_cmd->parsed()) return cmd_compare(o, out, err);
    if (replay_cmd->parsed()) return cmd_replay(o, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ComparisonError& e) {
    err << "comparison error: " << e.what() << '\n';
    return kComparisonFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kRuntimeFailure;
}

}  // namespace pal::cli
