#include "pal/core/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "pal/core/errors.hpp"

namespace pal {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
  const auto s = trim(text);
  T value{};
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || s.empty()) {
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, text), key);
  }
  return value;
}

double parse_double(const std::string& key, const std::string& text) {
  const auto s = trim(text);
  double value = 0;
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), last, value);
  if (ec != std::errc{} || ptr != last || s.empty() || !std::isfinite(value)) {
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, text), key);
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const auto s = trim(text);
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, text), key);
}

RunMode parse_mode(const std::string& key, const std::string& text) {
  const auto s = trim(text);
  if (s == "parallel") return RunMode::Parallel;
  if (s == "serial") return RunMode::Serial;
  if (s == "estimate") return RunMode::Estimate;
  throw ConfigError(fmt::format("{}: expected parallel, serial or estimate, got '{}'", key, text), key);
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

struct Field {
  std::string key;
  std::vector<std::string> aliases;
  std::function<void(WorkflowConfig&, const std::string& key, const std::string&)> set;
  std::function<std::string(const WorkflowConfig&)> get;
};

template <typename M>
Field int_field(std::string key, M WorkflowConfig::*member) {
  return {key, {},
          [member](WorkflowConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_integer<std::remove_cvref_t<decltype(c.*member)>>(k, v);
          },
          [member](const WorkflowConfig& c) { return fmt::format("{}", c.*member); }};
}

Field double_field(std::string key, double WorkflowConfig::*member, std::vector<std::string> aliases = {}) {
  return {key, std::move(aliases),
          [member](WorkflowConfig& c, const std::string& k, const std::string& v) { c.*member = parse_double(k, v); },
          [member](const WorkflowConfig& c) { return fmt_double(c.*member); }};
}

Field bool_field(std::string key, bool WorkflowConfig::*member, std::vector<std::string> aliases = {}) {
  return {key, std::move(aliases),
          [member](WorkflowConfig& c, const std::string& k, const std::string& v) { c.*member = parse_bool(k, v); },
          [member](const WorkflowConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"result_dir", {},
                 [](WorkflowConfig& c, const std::string& k, const std::string& v) {
                   auto s = trim(v);
                   if (s.empty()) throw ConfigError(k + ": must not be empty", k);
                   c.result_dir = s;
                 },
                 [](const WorkflowConfig& c) { return c.result_dir.string(); }});
    f.push_back(int_field("pred_process", &WorkflowConfig::pred_workers));
    f.push_back(int_field("orcl_process", &WorkflowConfig::orcl_workers));
    f.push_back(int_field("gene_process", &WorkflowConfig::gene_workers));
    f.push_back(int_field("ml_process", &WorkflowConfig::train_workers));
    f.push_back(int_field("retrain_size", &WorkflowConfig::retrain_size));
    f.push_back(bool_field("fixed_size_data", &WorkflowConfig::fixed_size_data));
    f.push_back(bool_field("dynamic_oracle_list", &WorkflowConfig::dynamic_oracle_list, {"dynamic_orcale_list"}));
    f.push_back(double_field("progress_save_interval", &WorkflowConfig::progress_save_interval));
    f.push_back(double_field("oracle_latency", &WorkflowConfig::oracle_latency, {"orcl_time"}));
    f.push_back(double_field("selection_threshold", &WorkflowConfig::selection_threshold));
    f.push_back(int_field("seed", &WorkflowConfig::seed));
    f.push_back({"mode", {},
                 [](WorkflowConfig& c, const std::string& k, const std::string& v) { c.mode = parse_mode(k, v); },
                 [](const WorkflowConfig& c) { return std::string(run_mode_name(c.mode)); }});
    f.push_back(bool_field("prediction_only", &WorkflowConfig::prediction_only));
    f.push_back(int_field("oracle_buffer_capacity", &WorkflowConfig::oracle_buffer_capacity));
    f.push_back(int_field("channel_capacity", &WorkflowConfig::channel_capacity));
    f.push_back(int_field("weight_sync_interval", &WorkflowConfig::weight_sync_interval));
    f.push_back(double_field("gen_latency", &WorkflowConfig::gen_latency));
    f.push_back(double_field("pred_latency", &WorkflowConfig::pred_latency));
    f.push_back(double_field("train_epoch_latency", &WorkflowConfig::train_epoch_latency));
    f.push_back(int_field("train_max_epochs", &WorkflowConfig::train_max_epochs));
    f.push_back(double_field("train_time_budget", &WorkflowConfig::train_time_budget));
    f.push_back(double_field("train_step", &WorkflowConfig::train_step));
    f.push_back(double_field("val_split", &WorkflowConfig::val_split));
    f.push_back(int_field("gen_limit", &WorkflowConfig::gen_limit));
    f.push_back(double_field("noise_scale", &WorkflowConfig::noise_scale));
    return f;
  }();
  return table;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", key, what), key);
}

void check_ranges(const WorkflowConfig& c) {
  const bool needs_workers = c.mode != RunMode::Estimate;
  if (needs_workers) {
    require(c.pred_workers >= 1, "pred_process", "must be at least 1");
    require(c.gene_workers >= 1, "gene_process", "must be at least 1");
    if (!c.prediction_only) {
      require(c.orcl_workers >= 1, "orcl_process", "must be at least 1");
      require(c.train_workers >= 1, "ml_process", "must be at least 1");
      require(c.pred_workers == c.train_workers, "ml_process",
              fmt::format("must equal pred_process ({} != {}); each predictor replicates one trainer",
                          c.train_workers, c.pred_workers));
    }
  }
  for (auto [key, v] : {std::pair{"pred_process", c.pred_workers}, std::pair{"orcl_process", c.orcl_workers},
                        std::pair{"gene_process", c.gene_workers}, std::pair{"ml_process", c.train_workers}}) {
    require(v >= 0, key, "must not be negative");
  }
  require(c.retrain_size >= 1, "retrain_size", "must be at least 1");
  require(c.progress_save_interval > 0, "progress_save_interval", "must be positive");
  require(c.oracle_latency >= 0, "oracle_latency", "must not be negative");
  require(c.selection_threshold >= 0, "selection_threshold", "must not be negative");
  require(c.channel_capacity >= 1, "channel_capacity", "must be at least 1");
  require(c.oracle_buffer_capacity >= static_cast<std::size_t>(std::max(1, c.gene_workers)),
          "oracle_buffer_capacity", "must hold at least one selection per generator");
  require(c.weight_sync_interval >= 1, "weight_sync_interval", "must be at least 1");
  require(c.gen_latency >= 0, "gen_latency", "must not be negative");
  require(c.pred_latency >= 0, "pred_latency", "must not be negative");
  require(c.train_epoch_latency >= 0, "train_epoch_latency", "must not be negative");
  require(c.train_max_epochs >= 1, "train_max_epochs", "must be at least 1");
  require(c.train_time_budget > 0, "train_time_budget", "must be positive");
  require(c.train_step > 0, "train_step", "must be positive");
  require(c.val_split >= 0 && c.val_split < 1, "val_split", "must be in [0, 1)");
  require(c.gen_limit >= 0, "gen_limit", "must not be negative");
  require(c.noise_scale >= 0, "noise_scale", "must not be negative");
}

}  // namespace

const std::vector<std::string>& required_config_keys() {
  static const std::vector<std::string> keys{"result_dir",   "pred_process", "orcl_process",
                                             "gene_process", "ml_process",   "retrain_size"};
  return keys;
}

const std::vector<std::string>& ignored_config_keys() {
  static const std::vector<std::string> keys{"designate_task_number", "task_per_node",  "gpu_pred", "gpu_ml",
                                             "orcl_buffer_path",      "ml_buffer_path", "usr_pkg"};
  return keys;
}

WorkflowConfig validate_config(const RawConfig& raw, std::vector<std::string>* warnings) {
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  for (const auto& key : required_config_keys()) {
    if (!raw.contains(key)) throw ConfigError("missing required key: " + key, key);
  }

  WorkflowConfig cfg;
  std::vector<std::string> consumed;
  for (const auto& field : fields()) {
    std::optional<std::string> seen_key;
    if (raw.contains(field.key)) seen_key = field.key;
    for (const auto& alias : field.aliases) {
      if (!raw.contains(alias)) continue;
      if (seen_key) throw ConfigError(fmt::format("{} and {} are the same setting", *seen_key, alias), alias);
      seen_key = alias;
    }
    if (!seen_key) continue;
    field.set(cfg, *seen_key, raw.at(*seen_key));
    consumed.push_back(*seen_key);
  }

  const auto& ignored = ignored_config_keys();
  for (const auto& [key, value] : raw) {
    if (std::find(consumed.begin(), consumed.end(), key) != consumed.end()) continue;
    if (std::find(ignored.begin(), ignored.end(), key) != ignored.end()) {
      warn(fmt::format("ignoring '{}': not supported by this runtime", key));
    } else {
      warn(fmt::format("unknown key '{}'", key));
    }
  }

  check_ranges(cfg);
  return cfg;
}

std::string canonical_config_key(const std::string& key) {
  for (const auto& field : fields()) {
    if (std::find(field.aliases.begin(), field.aliases.end(), key) != field.aliases.end()) return field.key;
  }
  return key;
}

std::string emit_config(const WorkflowConfig& cfg) {
  std::string out;
  for (const auto& field : fields()) {
    out += fmt::format("{} = {}\n", field.key, field.get(cfg));
  }
  return out;
}

std::string config_fingerprint(const WorkflowConfig& cfg) {
  WorkflowConfig c = cfg;
  c.result_dir = ".";
  c.mode = RunMode::Parallel;
  const auto text = emit_config(c);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace pal
