#include "pal/toy/kernels.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "pal/controller/selection.hpp"
#include "pal/core/errors.hpp"

namespace pal {
namespace {

constexpr std::uint64_t kPredictorStream = 0x50;
constexpr std::uint64_t kGeneratorStream = 0x47454e;
constexpr std::uint64_t kSplitStream = 0x53504c;

std::ofstream open_append(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::app);
  if (!out) throw std::runtime_error(fmt::format("cannot open {}", p.string()));
  return out;
}

std::string format_sample(const Sample& s) { return fmt::format("{}", fmt::join(s.values(), " ")); }

}  // namespace

ToyLinearModel toy_initial_model(std::uint64_t seed, std::uint32_t rank) {
  return ToyLinearModel::random(derive_seed(seed, kPredictorStream, rank));
}

// -- predictor ---------------------------------------------------------------

ToyPredictor::ToyPredictor(std::uint32_t rank, ToyLinearModel model, std::shared_ptr<SimClock> clock,
                           double latency, std::filesystem::path progress)
    : rank_(rank), model_(model), clock_(std::move(clock)), latency_(latency), progress_(std::move(progress)) {}

std::vector<Sample> ToyPredictor::predict(const std::vector<Sample>& batch) {
  clock_->sleep(latency_);
  std::vector<Sample> out;
  out.reserve(batch.size());
  for (const auto& x : batch) out.push_back(model_.apply(x));
  ++predictions_;
  return out;
}

void ToyPredictor::update(const WeightVector& w) {
  model_.set_weights(w);
  ++updates_;
}

void ToyPredictor::save_progress() {
  auto out = open_append(progress_);
  out << fmt::format("rank={} t={:.6f} predict_calls={} updates={} weights={}\n", rank_, clock_->now(), predictions_,
                     updates_, fmt::join(model_.raw(), " "));
}

// -- generator ---------------------------------------------------------------

ToyGenerator::ToyGenerator(std::uint32_t rank, std::uint64_t seed, std::int64_t limit,
                           std::shared_ptr<SimClock> clock, double latency, std::filesystem::path progress)
    : rank_(rank),
      rng_(derive_seed(seed, kGeneratorStream, rank)),
      limit_(limit),
      clock_(std::move(clock)),
      latency_(latency),
      progress_(std::move(progress)) {
  state_ = randn_sample(rng_, ToyLinearModel::kDim);
  history_.emplace_back();
}

Generated ToyGenerator::generate(const std::optional<Sample>& feedback) {
  clock_->sleep(latency_);
  Generated g;
  if (counter_ > limit_) {
    g.stop = true;
    g.next = randn_sample(rng_, ToyLinearModel::kDim);
  } else if (!feedback || feedback->any_zero()) {
    g.next = randn_sample(rng_, ToyLinearModel::kDim);
    history_.push_back({g.next});
  } else {
    if (feedback->dim() != state_.dim()) {
      throw std::invalid_argument(fmt::format("feedback dim {} != {}", feedback->dim(), state_.dim()));
    }
    std::vector<double> next(state_.dim());
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = state_[i] * (*feedback)[i];
    g.next = Sample(std::move(next));
    history_.back().push_back(g.next);
  }
  ++counter_;
  return g;
}

void ToyGenerator::save_progress() {
  auto out = open_append(progress_);
  for (std::size_t t = 0; t + 1 < history_.size(); ++t) {
    if (history_[t].empty()) continue;
    out << "trajectory";
    for (const auto& s : history_[t]) out << " | " << format_sample(s);
    out << '\n';
  }
  std::vector<std::vector<Sample>> keep{std::move(history_.back())};
  history_ = std::move(keep);
}

void ToyGenerator::stop_run() {
  history_.emplace_back();
  save_progress();
}

// -- oracle ------------------------------------------------------------------

ToyOracle::ToyOracle(std::uint32_t rank, ToyGroundTruth truth, std::shared_ptr<SimClock> clock, double latency,
                     std::filesystem::path progress)
    : rank_(rank), truth_(std::move(truth)), clock_(std::move(clock)), latency_(latency),
      progress_(std::move(progress)) {}

Sample ToyOracle::label(const Sample& input) {
  clock_->sleep(latency_);
  ++calls_;
  return truth_.label(input);
}

void ToyOracle::save_progress() {
  auto out = open_append(progress_);
  out << fmt::format("rank={} t={:.6f} calls={}\n", rank_, clock_->now(), calls_);
}

// -- trainer -----------------------------------------------------------------

ToyTrainer::ToyTrainer(std::uint32_t rank, ToyLinearModel init, std::uint64_t split_seed, ToyTrainerOptions options,
                       std::shared_ptr<SimClock> clock, std::filesystem::path progress)
    : rank_(rank),
      model_(init),
      split_rng_(derive_seed(split_seed, kSplitStream)),
      opt_(options),
      clock_(std::move(clock)),
      progress_(std::move(progress)) {}

void ToyTrainer::add_trainingset(const std::vector<LabeledSample>& points) {
  const auto n = points.size();
  const auto val_size = static_cast<std::size_t>(opt_.val_split * static_cast<double>(n));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), split_rng_);
  std::vector<bool> to_val(n, false);
  for (std::size_t i = 0; i < val_size; ++i) to_val[idx[i]] = true;
  for (std::size_t i = 0; i < n; ++i) (to_val[i] ? val_ : train_).push_back(points[i]);
}

double ToyTrainer::loss(const std::vector<LabeledSample>& set) const {
  if (set.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : set) {
    const auto y = model_.apply(p.input);
    for (std::size_t i = 0; i < y.dim(); ++i) {
      const double e = y[i] - p.label[i];
      sum += e * e;
    }
  }
  return sum / static_cast<double>(set.size());
}

void ToyTrainer::epoch() {
  constexpr auto D = ToyLinearModel::kDim;
  std::array<double, ToyLinearModel::kWeights> grad{};
  double norm_sum = 0.0;
  for (const auto& p : train_) {
    const auto y = model_.apply(p.input);
    for (std::size_t i = 0; i < D; ++i) {
      const double e = y[i] - p.label[i];
      for (std::size_t j = 0; j < D; ++j) grad[i * D + j] += 2.0 * e * p.input[j];
    }
    for (double v : p.input.values()) norm_sum += v * v;
  }
  const double n = static_cast<double>(train_.size());
  const double mean_norm = norm_sum / n;
  if (mean_norm == 0.0) return;
  const double lr = opt_.step / mean_norm;
  auto& w = model_.raw();
  for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr * grad[k] / n;
}

bool ToyTrainer::retrain(const InterruptProbe& interrupt) {
  mse_train_.emplace_back();
  mse_val_.emplace_back();
  if (!train_.empty()) {
    for (int e = 1; e <= opt_.max_epochs; ++e) {
      epoch();
      mse_train_.back().push_back(loss(train_));
      if (!val_.empty()) mse_val_.back().push_back(loss(val_));
      clock_->sleep(opt_.epoch_latency);
      if (interrupt && interrupt()) break;
    }
  }
  return clock_->now() >= opt_.time_budget;
}

std::vector<Sample> ToyTrainer::predict(const std::vector<Sample>& batch) const {
  std::vector<Sample> out;
  out.reserve(batch.size());
  for (const auto& x : batch) out.push_back(model_.apply(x));
  return out;
}

void ToyTrainer::save_progress() {
  const nlohmann::json j = {{"MSE_train", mse_train_}, {"MSE_val", mse_val_}};
  const auto tmp = std::filesystem::path(progress_).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {}", tmp.string()));
    out << j.dump() << '\n';
  }
  std::filesystem::rename(tmp, progress_);
}

// -- factory -----------------------------------------------------------------

KernelFactory make_toy_factory(const WorkflowConfig& cfg, std::shared_ptr<SimClock> clock) {
  const ResultsLayout layout(cfg.result_dir);
  KernelFactory f;
  f.predictor = [cfg, clock, layout](std::uint32_t rank) -> std::unique_ptr<Predictor> {
    return std::make_unique<ToyPredictor>(rank, toy_initial_model(cfg.seed, rank), clock, cfg.pred_latency,
                                          layout.prediction_state(rank));
  };
  f.generator = [cfg, clock, layout](std::uint32_t rank) -> std::unique_ptr<Generator> {
    return std::make_unique<ToyGenerator>(rank, cfg.seed, cfg.gen_limit + rank, clock, cfg.gen_latency,
                                          layout.generator_data(rank));
  };
  f.oracle = [cfg, clock, layout](std::uint32_t rank) -> std::unique_ptr<Oracle> {
    return std::make_unique<ToyOracle>(rank, ToyGroundTruth(cfg.seed, cfg.noise_scale), clock, cfg.oracle_latency,
                                       layout.oracle_log(rank));
  };
  f.trainer = [cfg, clock, layout](std::uint32_t rank) -> std::unique_ptr<Trainer> {
    ToyTrainerOptions opt;
    opt.val_split = cfg.val_split;
    opt.step = cfg.train_step;
    opt.max_epochs = cfg.train_max_epochs;
    opt.epoch_latency = cfg.train_epoch_latency;
    opt.time_budget = cfg.train_time_budget;
    return std::make_unique<ToyTrainer>(rank, toy_initial_model(cfg.seed, rank), cfg.seed, opt, clock,
                                        layout.retrain_history(rank));
  };
  f.selection = [threshold = cfg.selection_threshold](const std::vector<Sample>& inputs, const CommitteeBatch& b) {
    return prediction_check(inputs, b, threshold);
  };
  f.adjust = [threshold = cfg.selection_threshold](const std::vector<Sample>& entries, const CommitteeBatch& b) {
    return adjust_order(entries, b, threshold);
  };
  if (auto real = std::dynamic_pointer_cast<RealClock>(clock)) {
    f.abandon_work = [real] { real->interrupt(); };
  }
  return f;
}

}  // namespace pal
