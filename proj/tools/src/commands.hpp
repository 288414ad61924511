#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "run_output.hpp"

namespace CLI {
class App;
}

namespace ovepg::cli {

struct CommonFlags {
  std::uint64_t seed = 1;
  std::string out = "runs";
};

struct TrainFlags {
  std::string objective = "ove_pg";
  double alpha = 100.0;
  double beta = 0.3;
  std::size_t chains = 4;
  std::string omega_mode = "mean";
  double lr = 0.002;
  std::string schedule = "cosine";
  std::size_t epochs = 10;
  std::size_t batch_size = 4;
  std::size_t pg_terms = 200;
  bool early_stop = false;
  bool zero_noise = false;
};

struct Synth1dFlags {
  CommonFlags common;
  TrainFlags train;
  std::size_t n_per_class = 500;
  std::size_t test_per_class = 1000;
  std::size_t degree = 3;
  std::size_t curve_every = 0;
};

struct PretrainFlags {
  CommonFlags common;
  TrainFlags train;
  std::string train_images, train_labels, test_images, test_labels;
  std::string hidden = "64";
  std::string activation = "relu";
  std::size_t classes = 10;
  std::size_t train_limit = 0;
  bool transpose = false;
};

struct FinetuneFlags {
  CommonFlags common;
  TrainFlags train;
  std::string prior;
  std::string mnist_test_images, mnist_test_labels;
  std::string emnist_train_images, emnist_train_labels, emnist_test_images, emnist_test_labels;
  std::size_t subset = 100;
  bool emnist_transpose = true;
  std::string grid = "0.1:0.7:0.1";
  std::string objectives = "softmax,ove_pg";
};

struct PgCheckFlags {
  CommonFlags common;
  std::string b = "1,2";
  std::string c = "0,0.1,0.5,1,2,4";
  std::size_t draws = 200000;
  std::size_t pg_terms = 200;
  bool no_tail_correction = false;
  double tolerance = 0.02;
};

struct OveInspectFlags {
  CommonFlags common;
  std::string logits = "1,2,3";
  std::size_t label = 0;
};

struct EvalFlags {
  CommonFlags common;
  std::string model;
  std::string member = "model";
  std::string images, labels;
  bool transpose = false;
  std::size_t classes = 0;
};

/// Registers every subcommand on `app` and runs the one that was parsed.
class Commands {
 public:
  explicit Commands(CLI::App& app);

  int run(const std::string& name, const Json& config, const std::vector<std::string>& config_files,
          std::ostream& out, std::ostream& err);

 private:
  /// Checks flag values so that bad input fails before a run directory exists.
  void validate(const std::string& name) const;
  int synth1d(RunOutput& run, std::ostream& out);
  int pretrain(RunOutput& run, std::ostream& out);
  int finetune(RunOutput& run, std::ostream& out);
  int sweep_beta(RunOutput& run, std::ostream& out);
  int pg_check(RunOutput& run, std::ostream& out, std::ostream& err);
  int ove_inspect(RunOutput& run, std::ostream& out);
  int eval(RunOutput& run, std::ostream& out);

  Synth1dFlags synth_;
  PretrainFlags pretrain_;
  FinetuneFlags finetune_;
  FinetuneFlags sweep_;
  PgCheckFlags pg_;
  OveInspectFlags inspect_;
  EvalFlags eval_;
};

}  // namespace ovepg::cli
