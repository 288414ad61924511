#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ovepg/data.hpp"
#include "ovepg/models.hpp"
#include "ovepg/objective.hpp"

namespace ovepg {

enum class Schedule { constant, cosine };

std::string_view to_string(Schedule s) noexcept;
Schedule parse_schedule(std::string_view text);

struct TrainConfig {
  ObjectiveConfig objective{};
  double lr = 0.002;
  Schedule schedule = Schedule::cosine;
  std::size_t epochs = 10;
  /// Zero means full batch.
  std::size_t batch_size = 4;
  std::uint64_t seed = 0;
  /// Stop when the epoch loss improves by less than 1e-5 (relative) over five
  /// consecutive epochs.
  bool early_stop = false;
  /// Keep every step's loss breakdown in the report.
  bool record_steps = false;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double nll = 0.0;
  double kl = 0.0;
  double total = 0.0;
  double lr = 0.0;
  double train_accuracy = 0.0;
};

struct TrainReport {
  TrainConfig config;
  std::vector<EpochRecord> epochs;
  std::vector<LossBreakdown> steps;
  std::size_t total_steps = 0;
  /// Accuracies in percent.
  std::optional<double> seen_accuracy;
  std::optional<double> unseen_accuracy;
  std::optional<double> harmonic;
  double wall_time_s = 0.0;
};

struct EvalSets {
  const Dataset* seen = nullptr;
  const Dataset* unseen = nullptr;
};

using EpochCallback = std::function<void(const EpochRecord&, const Model&)>;

/// Mini-batch SGD on the tuned member of the pair. Shuffling depends only on
/// (seed, epoch) and step noise on (seed, step), so identical inputs give
/// identical reports apart from wall time.
TrainReport train(ModelPair& pair, const Dataset& data, const TrainConfig& cfg,
                  EvalSets eval = {}, const EpochCallback& on_epoch = {});

/// p -= lr * g elementwise.
void sgd_step(std::span<double> params, std::span<const double> grads, double lr);

/// base_lr (1 + cos(pi step / total)) / 2; steps past the end give 0.
double cosine_lr(std::size_t step, std::size_t total_steps, double base_lr);

/// Fraction of samples whose argmax logit (lowest index on ties) matches.
double evaluate(const Model& model, const Dataset& data);
double accuracy(const Logits& logits, const OneHotLabels& labels);

/// 2ab / (a + b), 0 when both are zero.
double harmonic_mean(double a, double b);

/// Permutation of [0, n) for the given epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

}  // namespace ovepg
