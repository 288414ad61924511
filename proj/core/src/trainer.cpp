#include "ovepg/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "ovepg/errors.hpp"
#include "ovepg/ove.hpp"

namespace ovepg {

namespace {

constexpr std::uint64_t kShuffleStream = 0x73687566666c65ULL;
constexpr std::uint64_t kStepStream = 0x7374657073ULL;
constexpr std::size_t kEvalChunk = 4096;
constexpr std::size_t kPlateauWindow = 5;
constexpr double kPlateauTolerance = 1e-5;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::string_view to_string(Schedule s) noexcept {
  return s == Schedule::cosine ? "cosine" : "constant";
}

Schedule parse_schedule(std::string_view text) {
  if (text == "cosine") return Schedule::cosine;
  if (text == "constant") return Schedule::constant;
  throw ParameterError("unknown schedule '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  objective.validate();
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ParameterError("learning rate must be positive");
  if (epochs < 1) throw ParameterError("epochs must be at least 1");
  if (objective.chains > 64) throw ParameterError("chain count M must be at most 64");
}

void sgd_step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size()) throw InputError("sgd_step: parameter and gradient sizes differ");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

double cosine_lr(std::size_t step, std::size_t total_steps, double base_lr) {
  if (total_steps == 0 || step >= total_steps) return 0.0;
  const double t = static_cast<double>(step) / static_cast<double>(total_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

double accuracy(const Logits& logits, const OneHotLabels& labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw InputError("accuracy: logits and labels differ in length");
  }
  if (labels.size() == 0) return 0.0;
  const auto pred = argmax_rows(logits);
  std::size_t hits = 0;
  for (std::size_t n = 0; n < pred.size(); ++n) hits += pred[n] == labels[n] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double evaluate(const Model& model, const Dataset& data) {
  if (model.output_width() != data.classes()) {
    throw InputError("model has " + std::to_string(model.output_width()) + " outputs, data has " +
                     std::to_string(data.classes()) + " classes");
  }
  if (data.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
    const std::size_t len = std::min(kEvalChunk, data.size() - start);
    const Matrix x = data.inputs.middleRows(static_cast<Eigen::Index>(start),
                                            static_cast<Eigen::Index>(len));
    const auto pred = argmax_rows(model.predict(x));
    for (std::size_t i = 0; i < len; ++i) hits += pred[i] == data.labels[start + i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double harmonic_mean(double a, double b) {
  if (a < 0.0 || b < 0.0) throw ParameterError("harmonic mean inputs must be non-negative");
  if (a + b == 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(RngState{seed, kShuffleStream}.child(epoch));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  return order;
}

TrainReport train(ModelPair& pair, const Dataset& data, const TrainConfig& cfg, EvalSets eval,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  Model& model = pair.tuned();
  if (model.output_width() != data.classes()) {
    throw InputError("model has " + std::to_string(model.output_width()) + " outputs, data has " +
                     std::to_string(data.classes()) + " classes");
  }
  if (static_cast<std::size_t>(data.inputs.cols()) != model.input_width()) {
    throw InputError("data width " + std::to_string(data.inputs.cols()) +
                     " does not match model input " + std::to_string(model.input_width()));
  }
  if (data.size() == 0) throw InputError("training set is empty");

  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = data.size();
  const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
  const std::size_t batches = (n + batch - 1) / batch;
  const bool needs_prior = cfg.objective.objective == Objective::ove_pg || cfg.objective.beta > 0.0;

  TrainReport report;
  report.config = cfg;
  report.total_steps = cfg.epochs * batches;

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = epoch_order(n, cfg.seed, epoch);
    EpochRecord rec;
    rec.epoch = epoch + 1;
    std::size_t hits = 0;
    for (std::size_t b = 0; b < batches; ++b, ++step) {
      const std::size_t start = b * batch;
      const std::span<const std::size_t> rows(order.data() + start, std::min(batch, n - start));
      const Dataset mb = data.gather(rows);
      const ForwardResult fwd = model.forward(mb.inputs);
      const Logits mu = needs_prior ? pair.prior().predict(mb.inputs) : fwd.logits;
      const double lr = cfg.schedule == Schedule::cosine ? cosine_lr(step, report.total_steps, cfg.lr)
                                                         : cfg.lr;
      const StepResult res =
          elbo_step(fwd.logits, mu, mb.labels, cfg.objective, RngState{cfg.seed, kStepStream}.child(step));
      if (!std::isfinite(res.loss.total) || !res.gradient.allFinite()) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(rec.epoch) + " step " +
                             std::to_string(step));
      }
      const ParamGradients grads = model.backward(fwd.cache, res.gradient);
      if (!all_finite(grads.values)) {
        throw NumericalError("non-finite parameter gradient at step " + std::to_string(step));
      }
      sgd_step(model.mutable_parameters(), grads.values, lr);

      const auto w = static_cast<double>(rows.size());
      rec.nll += w * res.loss.nll;
      rec.kl += w * res.loss.kl;
      rec.total += w * res.loss.total;
      rec.lr = lr;
      const auto pred = argmax_rows(fwd.logits);
      for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == mb.labels[i] ? 1 : 0;
      if (cfg.record_steps) report.steps.push_back(res.loss);
    }
    rec.nll /= static_cast<double>(n);
    rec.kl /= static_cast<double>(n);
    rec.total /= static_cast<double>(n);
    rec.train_accuracy = static_cast<double>(hits) / static_cast<double>(n);
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec, model);

    if (cfg.early_stop && report.epochs.size() > kPlateauWindow) {
      const double then = report.epochs[report.epochs.size() - 1 - kPlateauWindow].total;
      const double now = rec.total;
      if ((then - now) / std::max(std::abs(then), 1e-300) < kPlateauTolerance) break;
    }
  }

  if (eval.seen) report.seen_accuracy = 100.0 * evaluate(model, *eval.seen);
  if (eval.unseen) report.unseen_accuracy = 100.0 * evaluate(model, *eval.unseen);
  if (report.seen_accuracy && report.unseen_accuracy) {
    report.harmonic = harmonic_mean(*report.seen_accuracy, *report.unseen_accuracy);
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace ovepg
