#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ovepg/cli.hpp"
#include "ovepg/data.hpp"
#include "ovepg/errors.hpp"
#include "ovepg/models.hpp"
#include "ovepg/ove.hpp"
#include "ovepg/pg.hpp"
#include "ovepg/trainer.hpp"

namespace ovepg::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMlpNote =
    "The image experiments use a fully connected network (default 784-64-10, relu) as the "
    "backbone in place of a vision transformer.";

// Offset between the synth1d training seed and its held-out test seed.
constexpr std::uint64_t kSynthTestSeedOffset = 1000003;

std::string data_path(const char* file) {
  const char* root = std::getenv("OVEPG_DATA_DIR");
  return (fs::path(root && *root ? root : ".") / file).string();
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, sep)) {
    const auto a = item.find_first_not_of(' ');
    const auto b = item.find_last_not_of(' ');
    if (a != std::string::npos) parts.push_back(item.substr(a, b - a + 1));
  }
  return parts;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse '" + text + "' in " + what + " as a number");
  }
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> v;
  for (const auto& p : split(text, ',')) v.push_back(parse_double(p, what));
  if (v.empty()) throw UsageError(what + " is empty");
  return v;
}

/// "lo:hi:step" (inclusive) or a comma list.
std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_doubles(text, "--grid");
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw UsageError("--grid expects lo:hi:step");
  const double lo = parse_double(parts[0], "--grid");
  const double hi = parse_double(parts[1], "--grid");
  const double step = parse_double(parts[2], "--grid");
  if (!(step > 0.0) || hi < lo) throw UsageError("--grid needs lo <= hi and step > 0");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) {
    // Round to 12 decimals so 0.1 + 2 * 0.1 prints as 0.3.
    grid.push_back(std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12);
  }
  return grid;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--seed", f.seed, "Random seed for data, initialisation and training");
  sub->add_option("--out", f.out, "Root directory for run outputs");
}

void add_train(CLI::App* sub, TrainFlags& f) {
  sub->add_option("--objective", f.objective, "softmax | ove | ove_pg");
  sub->add_option("--alpha", f.alpha, "Prior precision over logits");
  sub->add_option("--beta", f.beta, "Weight of the squared distance to the prior logits");
  sub->add_option("--chains", f.chains, "Monte-Carlo chains per step (1-64)");
  sub->add_option("--omega-mode", f.omega_mode, "mean | sample");
  sub->add_option("--lr", f.lr, "Base learning rate");
  sub->add_option("--schedule", f.schedule, "constant | cosine");
  sub->add_option("--epochs", f.epochs, "Epoch budget");
  sub->add_option("--batch-size", f.batch_size, "Mini-batch size, 0 for full batch");
  sub->add_option("--pg-terms", f.pg_terms, "Terms in the truncated PG series");
  sub->add_flag("--early-stop", f.early_stop, "Stop when the epoch loss plateaus");
  sub->add_flag("--zero-noise", f.zero_noise, "Use the posterior mean instead of a draw");
}

TrainConfig to_train_config(const TrainFlags& f, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.objective.objective = parse_objective(f.objective);
  cfg.objective.alpha = f.alpha;
  cfg.objective.beta = f.beta;
  cfg.objective.chains = f.chains;
  cfg.objective.omega_mode = parse_omega_mode(f.omega_mode);
  cfg.objective.truncation.num_terms = f.pg_terms;
  cfg.objective.zero_noise = f.zero_noise;
  cfg.lr = f.lr;
  cfg.schedule = parse_schedule(f.schedule);
  cfg.epochs = f.epochs;
  cfg.batch_size = f.batch_size;
  cfg.seed = seed;
  cfg.early_stop = f.early_stop;
  cfg.validate();
  return cfg;
}

Json epoch_json(const EpochRecord& r) {
  return {{"epoch", r.epoch}, {"nll", r.nll}, {"kl", r.kl}, {"total", r.total},
          {"lr", r.lr},       {"train_accuracy", r.train_accuracy}};
}

Json train_config_json(const TrainConfig& c) {
  return {{"objective", to_string(c.objective.objective)},
          {"alpha", c.objective.alpha},
          {"beta", c.objective.beta},
          {"chains", c.objective.chains},
          {"omega_mode", to_string(c.objective.omega_mode)},
          {"pg_terms", c.objective.truncation.num_terms},
          {"zero_noise", c.objective.zero_noise},
          {"lr", c.lr},
          {"schedule", to_string(c.schedule)},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"early_stop", c.early_stop}};
}

Json report_json(const TrainReport& r) {
  Json j;
  j["config"] = train_config_json(r.config);
  j["epochs_run"] = r.epochs.size();
  j["total_steps"] = r.total_steps;
  j["final_epoch"] = r.epochs.empty() ? Json() : epoch_json(r.epochs.back());
  j["seen_accuracy"] = r.seen_accuracy ? Json(*r.seen_accuracy) : Json();
  j["unseen_accuracy"] = r.unseen_accuracy ? Json(*r.unseen_accuracy) : Json();
  j["harmonic_mean"] = r.harmonic ? Json(*r.harmonic) : Json();
  return j;
}

Json model_json(const Model& m) {
  Json j;
  if (const auto* p = std::get_if<PolySpec>(&m.spec())) {
    j = {{"kind", "poly"}, {"degree", p->degree}, {"classes", p->classes}};
  } else {
    const auto& s = std::get<MlpSpec>(m.spec());
    j = {{"kind", "mlp"}, {"layers", s.layers}, {"activation", to_string(s.hidden)}};
  }
  j["parameter_count"] = m.parameters().size();
  return j;
}

Dataset load_checked(RunOutput& run, const std::string& images, const std::string& labels,
                     const IdxOptions& options) {
  Dataset d = load_idx(images, labels, options);
  run.add_input(images);
  run.add_input(labels);
  return d;
}

Matrix curve_grid() {
  Matrix grid(241, 1);
  for (Eigen::Index i = 0; i < grid.rows(); ++i) grid(i, 0) = -6.0 + 0.05 * static_cast<double>(i);
  return grid;
}

void write_curve_rows(std::ostream& csv, std::size_t epoch, const Model& model, const Matrix& grid) {
  const Matrix p = softmax_probability(model.predict(grid));
  for (Eigen::Index i = 0; i < grid.rows(); ++i) {
    csv << epoch << ',' << short_number(grid(i, 0));
    for (Eigen::Index c = 0; c < p.cols(); ++c) csv << ',' << format_number(p(i, c));
    csv << '\n';
  }
}

struct FinetuneData {
  Dataset mnist_test;
  Dataset emnist_train;
  Dataset emnist_test;
};

FinetuneData load_finetune_data(RunOutput& run, const FinetuneFlags& f, std::size_t classes) {
  IdxOptions plain{.transpose = false, .classes = classes};
  IdxOptions emnist{.transpose = f.emnist_transpose, .classes = classes};
  FinetuneData d{load_checked(run, f.mnist_test_images, f.mnist_test_labels, plain),
                 load_checked(run, f.emnist_train_images, f.emnist_train_labels, emnist),
                 load_checked(run, f.emnist_test_images, f.emnist_test_labels, emnist)};
  d.emnist_train = subset_per_class(d.emnist_train, f.subset);
  return d;
}

Model load_prior(RunOutput& run, const std::string& path) {
  if (path.empty()) throw UsageError("--prior is required (a checkpoint written by pretrain)");
  Model m = load_model(path);
  run.add_input(path);
  return m;
}

Json finetune_row(const TrainReport& r, const TrainConfig& cfg) {
  return {{"objective", to_string(cfg.objective.objective)},
          {"beta", cfg.objective.beta},
          {"mnist_accuracy", *r.seen_accuracy},
          {"emnist_accuracy", *r.unseen_accuracy},
          {"harmonic_mean", *r.harmonic}};
}

void add_finetune_flags(CLI::App* sub, FinetuneFlags& f) {
  add_common(sub, f.common);
  add_train(sub, f.train);
  sub->add_option("--prior", f.prior, "Model checkpoint from pretrain, used as the frozen prior");
  f.mnist_test_images = data_path("t10k-images-idx3-ubyte");
  f.mnist_test_labels = data_path("t10k-labels-idx1-ubyte");
  f.emnist_train_images = data_path("emnist-digits-train-images-idx3-ubyte");
  f.emnist_train_labels = data_path("emnist-digits-train-labels-idx1-ubyte");
  f.emnist_test_images = data_path("emnist-digits-test-images-idx3-ubyte");
  f.emnist_test_labels = data_path("emnist-digits-test-labels-idx1-ubyte");
  sub->add_option("--mnist-test-images", f.mnist_test_images, "MNIST test images (seen domain)");
  sub->add_option("--mnist-test-labels", f.mnist_test_labels, "MNIST test labels");
  sub->add_option("--emnist-train-images", f.emnist_train_images, "EMNIST-digits training images");
  sub->add_option("--emnist-train-labels", f.emnist_train_labels, "EMNIST-digits training labels");
  sub->add_option("--emnist-test-images", f.emnist_test_images, "EMNIST-digits test images");
  sub->add_option("--emnist-test-labels", f.emnist_test_labels, "EMNIST-digits test labels");
  sub->add_option("--subset", f.subset, "Fine-tune on the first k EMNIST samples of each class");
  sub->add_flag("--emnist-transpose,!--no-emnist-transpose", f.emnist_transpose,
                "Transpose EMNIST images to MNIST orientation");
}

}  // namespace

Commands::Commands(CLI::App& app) {
  {
    auto* sub = app.add_subcommand(
        "synth1d", "Three-class 1D Gaussian task with a cubic polynomial basis; writes curves.csv");
    synth_.train.beta = 0.0;
    synth_.train.lr = 0.02;
    synth_.train.epochs = 5000;
    synth_.train.batch_size = 0;
    add_common(sub, synth_.common);
    add_train(sub, synth_.train);
    sub->add_option("--n-per-class", synth_.n_per_class, "Training samples per class");
    sub->add_option("--test-per-class", synth_.test_per_class, "Held-out samples per class");
    sub->add_option("--degree", synth_.degree, "Polynomial degree (features x..x^degree)");
    sub->add_option("--curve-every", synth_.curve_every,
                    "Also write curves every N epochs (0 writes only the final curves)");
  }
  {
    auto* sub = app.add_subcommand("pretrain", std::string("Train the prior model on MNIST. ") + kMlpNote);
    pretrain_.train.objective = "softmax";
    pretrain_.train.beta = 0.0;
    pretrain_.train.lr = 0.05;
    pretrain_.train.epochs = 3;
    pretrain_.train.batch_size = 32;
    pretrain_.train_images = data_path("train-images-idx3-ubyte");
    pretrain_.train_labels = data_path("train-labels-idx1-ubyte");
    pretrain_.test_images = data_path("t10k-images-idx3-ubyte");
    pretrain_.test_labels = data_path("t10k-labels-idx1-ubyte");
    add_common(sub, pretrain_.common);
    add_train(sub, pretrain_.train);
    sub->add_option("--train-images", pretrain_.train_images, "IDX image file for training");
    sub->add_option("--train-labels", pretrain_.train_labels, "IDX label file for training");
    sub->add_option("--test-images", pretrain_.test_images, "IDX image file for evaluation");
    sub->add_option("--test-labels", pretrain_.test_labels, "IDX label file for evaluation");
    sub->add_option("--hidden", pretrain_.hidden, "Comma-separated hidden layer widths");
    sub->add_option("--activation", pretrain_.activation, "Hidden activation: relu | tanh");
    sub->add_option("--classes", pretrain_.classes, "Number of classes");
    sub->add_option("--train-limit", pretrain_.train_limit, "Use only the first N training samples (0 = all)");
    sub->add_flag("--transpose", pretrain_.transpose, "Transpose images on load");
  }
  {
    auto* sub = app.add_subcommand(
        "finetune", std::string("Fine-tune a pretrained prior on an EMNIST-digits subset and report "
                                "MNIST / EMNIST accuracy and their harmonic mean. ") + kMlpNote);
    add_finetune_flags(sub, finetune_);
  }
  {
    auto* sub = app.add_subcommand(
        "sweep-beta", std::string("Run finetune over a grid of beta values for each objective. ") + kMlpNote);
    add_finetune_flags(sub, sweep_);
    sub->add_option("--grid", sweep_.grid, "Beta grid as lo:hi:step (inclusive) or a comma list");
    sub->add_option("--objectives", sweep_.objectives, "Comma-separated objectives to compare");
  }
  {
    auto* sub = app.add_subcommand(
        "pg-check", "Compare Monte-Carlo PG(b, c) means with the closed form; exit 3 on deviation");
    add_common(sub, pg_.common);
    sub->add_option("--b", pg_.b, "Comma-separated shape values");
    sub->add_option("--c", pg_.c, "Comma-separated tilt values");
    sub->add_option("--draws", pg_.draws, "Draws per (b, c) pair");
    sub->add_option("--pg-terms", pg_.pg_terms, "Terms in the truncated series");
    sub->add_flag("--no-tail-correction", pg_.no_tail_correction, "Drop the expected-tail correction");
    sub->add_option("--tolerance", pg_.tolerance, "Maximum relative deviation of the sample mean");
  }
  {
    auto* sub = app.add_subcommand(
        "ove-inspect", "Print the pairwise tensors and OVE / softmax probabilities for one logit vector");
    add_common(sub, inspect_.common);
    sub->add_option("--logits", inspect_.logits, "Comma-separated logits (class count = length)");
    sub->add_option("--label", inspect_.label, "True class index");
  }
  {
    auto* sub = app.add_subcommand("eval", "Accuracy of a saved model on an IDX dataset");
    add_common(sub, eval_.common);
    sub->add_option("--model", eval_.model, "Checkpoint file")->required();
    sub->add_option("--member", eval_.member,
                    "model for a single checkpoint; prior or tuned for a finetune pair");
    sub->add_option("--images", eval_.images, "IDX image file")->required();
    sub->add_option("--labels", eval_.labels, "IDX label file")->required();
    sub->add_flag("--transpose", eval_.transpose, "Transpose images on load");
    sub->add_option("--classes", eval_.classes, "Class count (0 = model output width)");
  }
}

int Commands::run(const std::string& name, const Json& config,
                  const std::vector<std::string>& config_files, std::ostream& out,
                  std::ostream& err) {
  std::uint64_t seed = 0;
  std::string root;
  if (name == "synth1d") seed = synth_.common.seed, root = synth_.common.out;
  if (name == "pretrain") seed = pretrain_.common.seed, root = pretrain_.common.out;
  if (name == "finetune") seed = finetune_.common.seed, root = finetune_.common.out;
  if (name == "sweep-beta") seed = sweep_.common.seed, root = sweep_.common.out;
  if (name == "pg-check") seed = pg_.common.seed, root = pg_.common.out;
  if (name == "ove-inspect") seed = inspect_.common.seed, root = inspect_.common.out;
  if (name == "eval") seed = eval_.common.seed, root = eval_.common.out;

  validate(name);
  RunOutput run(root, name, config, seed);
  for (const auto& f : config_files) run.add_input(f);
  run.write_manifest(false);
  out << "run directory: " << run.dir().string() << '\n';

  int code = 0;
  if (name == "synth1d") code = synth1d(run, out);
  if (name == "pretrain") code = pretrain(run, out);
  if (name == "finetune") code = finetune(run, out);
  if (name == "sweep-beta") code = sweep_beta(run, out);
  if (name == "pg-check") code = pg_check(run, out, err);
  if (name == "ove-inspect") code = ove_inspect(run, out);
  if (name == "eval") code = eval(run, out);
  run.write_manifest(true);
  return code;
}

void Commands::validate(const std::string& name) const {
  if (name == "synth1d") {
    to_train_config(synth_.train, synth_.common.seed);
    if (synth_.n_per_class < 1 || synth_.test_per_class < 1) {
      throw ParameterError("sample counts must be positive");
    }
    ovepg::validate(ModelSpec{PolySpec{synth_.degree, 3}});
  }
  if (name == "pretrain") {
    to_train_config(pretrain_.train, pretrain_.common.seed);
    parse_activation(pretrain_.activation);
    for (const auto& h : split(pretrain_.hidden, ',')) parse_double(h, "--hidden");
  }
  if (name == "finetune") to_train_config(finetune_.train, finetune_.common.seed);
  if (name == "sweep-beta") {
    for (double b : parse_grid(sweep_.grid)) {
      TrainFlags t = sweep_.train;
      t.beta = b;
      for (const auto& o : split(sweep_.objectives, ',')) {
        t.objective = o;
        to_train_config(t, sweep_.common.seed);
      }
    }
    if (split(sweep_.objectives, ',').empty()) throw UsageError("--objectives is empty");
  }
  if (name == "pg-check") {
    parse_doubles(pg_.b, "--b");
    parse_doubles(pg_.c, "--c");
    if (pg_.draws < 1) throw ParameterError("--draws must be positive");
    if (!(pg_.tolerance > 0.0)) throw ParameterError("--tolerance must be positive");
  }
  if (name == "ove-inspect") parse_doubles(inspect_.logits, "--logits");
  if (name == "eval" && eval_.member != "model" && eval_.member != "prior" && eval_.member != "tuned") {
    throw UsageError("--member must be model, prior or tuned");
  }
}

int Commands::synth1d(RunOutput& run, std::ostream& out) {
  const auto& f = synth_;
  const TrainConfig cfg = to_train_config(f.train, f.common.seed);
  if (f.n_per_class < 1 || f.test_per_class < 1) throw ParameterError("sample counts must be positive");
  const Dataset train_set = gen_1d_synth(f.n_per_class, f.common.seed);
  const Dataset test_set = gen_1d_synth(f.test_per_class, f.common.seed + kSynthTestSeedOffset);
  ModelPair pair = freeze_as_prior(init_model(PolySpec{f.degree, 3}, f.common.seed));
  const Matrix grid = curve_grid();

  std::ofstream csv(run.path("curves.csv"), std::ios::trunc);
  csv << "epoch,x,p_class0,p_class1,p_class2\n";
  run.add_output("curves.csv");
  std::size_t last_curve = 0;
  const TrainReport report = train(pair, train_set, cfg, {&train_set, &test_set},
                                   [&](const EpochRecord& rec, const Model& model) {
                                     run.metric(epoch_json(rec));
                                     if (f.curve_every > 0 && rec.epoch % f.curve_every == 0) {
                                       write_curve_rows(csv, rec.epoch, model, grid);
                                       last_curve = rec.epoch;
                                     }
                                   });
  if (last_curve != report.epochs.size()) {
    write_curve_rows(csv, report.epochs.size(), pair.tuned(), grid);
  }
  csv.close();

  const Logits mu_theta = pair.tuned().predict(train_set.inputs);
  const Logits mu = pair.prior().predict(train_set.inputs);
  const double distance = (mu_theta - mu).squaredNorm();

  Json j = report_json(report);
  j["task"] = "synth1d";
  j["n_per_class"] = f.n_per_class;
  j["test_per_class"] = f.test_per_class;
  j["model"] = model_json(pair.tuned());
  j["train_accuracy"] = *report.seen_accuracy;
  j["test_accuracy"] = *report.unseen_accuracy;
  j["prior_distance"] = distance;
  j["prior_distance_per_sample"] = distance / static_cast<double>(train_set.size());
  std::vector<double> params(pair.tuned().parameters().begin(), pair.tuned().parameters().end());
  j["parameters"] = params;
  run.write_json("report.json", j);
  run.add_output("report.json");
  save_pair(run.path("pair.bin").string(), pair);
  run.add_output("pair.bin");

  out << "synth1d " << f.train.objective << ": test accuracy " << std::fixed << std::setprecision(2)
      << *report.unseen_accuracy << "%, final nll " << std::setprecision(6) << report.epochs.back().nll
      << ", squared distance to prior " << distance << '\n';
  return kOk;
}

int Commands::pretrain(RunOutput& run, std::ostream& out) {
  const auto& f = pretrain_;
  const TrainConfig cfg = to_train_config(f.train, f.common.seed);
  const IdxOptions options{.transpose = f.transpose, .classes = f.classes};
  Dataset train_set = load_checked(run, f.train_images, f.train_labels, options);
  const Dataset test_set = load_checked(run, f.test_images, f.test_labels, options);
  if (f.train_limit > 0 && f.train_limit < train_set.size()) {
    std::vector<std::size_t> rows(f.train_limit);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    train_set = train_set.gather(rows);
  }

  MlpSpec spec;
  spec.layers.push_back(static_cast<std::size_t>(train_set.inputs.cols()));
  for (const auto& h : split(f.hidden, ',')) {
    spec.layers.push_back(static_cast<std::size_t>(parse_double(h, "--hidden")));
  }
  spec.layers.push_back(f.classes);
  spec.hidden = parse_activation(f.activation);
  ModelPair pair = freeze_as_prior(init_model(spec, f.common.seed));

  const TrainReport report = train(pair, train_set, cfg, {&test_set, nullptr},
                                   [&](const EpochRecord& rec, const Model&) {
                                     run.metric(epoch_json(rec));
                                     out << "epoch " << rec.epoch << " loss " << rec.total << '\n';
                                   });
  save_model(run.path("model.bin").string(), pair.tuned());
  run.add_output("model.bin");

  Json j = report_json(report);
  j["task"] = "pretrain";
  j["backbone_note"] = kMlpNote;
  j["model"] = model_json(pair.tuned());
  j["train_samples"] = train_set.size();
  j["test_accuracy"] = *report.seen_accuracy;
  run.write_json("report.json", j);
  run.add_output("report.json");
  out << "pretrain: test accuracy " << std::fixed << std::setprecision(2) << *report.seen_accuracy
      << "%, checkpoint " << run.path("model.bin").string() << '\n';
  return kOk;
}

int Commands::finetune(RunOutput& run, std::ostream& out) {
  const auto& f = finetune_;
  const TrainConfig cfg = to_train_config(f.train, f.common.seed);
  const Model prior = load_prior(run, f.prior);
  const FinetuneData data = load_finetune_data(run, f, prior.output_width());

  ModelPair pair = freeze_as_prior(prior);
  const double prior_seen = 100.0 * evaluate(pair.prior(), data.mnist_test);
  const double prior_unseen = 100.0 * evaluate(pair.prior(), data.emnist_test);
  const TrainReport report = train(pair, data.emnist_train, cfg, {&data.mnist_test, &data.emnist_test},
                                   [&](const EpochRecord& rec, const Model&) { run.metric(epoch_json(rec)); });
  save_pair(run.path("pair.bin").string(), pair);
  run.add_output("pair.bin");

  Json j = report_json(report);
  j["task"] = "finetune";
  j["backbone_note"] = kMlpNote;
  j["model"] = model_json(pair.tuned());
  j["finetune_samples"] = data.emnist_train.size();
  j["result"] = finetune_row(report, cfg);
  j["prior_mnist_accuracy"] = prior_seen;
  j["prior_emnist_accuracy"] = prior_unseen;
  run.write_json("report.json", j);
  run.add_output("report.json");
  out << std::fixed << std::setprecision(2) << "finetune " << f.train.objective << " beta "
      << f.train.beta << ": MNIST " << *report.seen_accuracy << "%, EMNIST " << *report.unseen_accuracy
      << "%, harmonic mean " << *report.harmonic << '\n';
  return kOk;
}

int Commands::sweep_beta(RunOutput& run, std::ostream& out) {
  const auto& f = sweep_;
  const auto betas = parse_grid(f.grid);
  std::vector<Objective> objectives;
  for (const auto& o : split(f.objectives, ',')) objectives.push_back(parse_objective(o));
  if (objectives.empty()) throw UsageError("--objectives is empty");

  const Model prior = load_prior(run, f.prior);
  const FinetuneData data = load_finetune_data(run, f, prior.output_width());
  fs::create_directories(run.path("reports"));

  Json rows = Json::array();
  std::ofstream csv(run.path("summary.csv"), std::ios::trunc);
  csv << "objective,beta,mnist_accuracy,emnist_accuracy,harmonic_mean\n";
  run.add_output("summary.csv");
  for (Objective obj : objectives) {
    for (double beta : betas) {
      TrainFlags t = f.train;
      t.objective = std::string(to_string(obj));
      t.beta = beta;
      const TrainConfig cfg = to_train_config(t, f.common.seed);
      ModelPair pair = freeze_as_prior(prior);
      const TrainReport report =
          train(pair, data.emnist_train, cfg, {&data.mnist_test, &data.emnist_test},
                [&](const EpochRecord& rec, const Model&) {
                  Json line = epoch_json(rec);
                  line["objective"] = to_string(obj);
                  line["beta"] = beta;
                  run.metric(line);
                });
      const Json row = finetune_row(report, cfg);
      rows.push_back(row);
      Json single = report_json(report);
      single["task"] = "finetune";
      single["result"] = row;
      const std::string name =
          "reports/" + std::string(to_string(obj)) + "-beta" + short_number(beta) + ".json";
      run.write_json(name, single);
      run.add_output(name);
      csv << to_string(obj) << ',' << short_number(beta) << ',' << format_number(*report.seen_accuracy)
          << ',' << format_number(*report.unseen_accuracy) << ',' << format_number(*report.harmonic)
          << '\n';
      out << std::fixed << std::setprecision(2) << to_string(obj) << " beta " << beta << ": MNIST "
          << *report.seen_accuracy << "%, EMNIST " << *report.unseen_accuracy << "%, HM "
          << *report.harmonic << '\n';
    }
  }
  csv.close();

  Json j;
  j["task"] = "sweep-beta";
  j["backbone_note"] = kMlpNote;
  j["betas"] = betas;
  j["finetune_samples"] = data.emnist_train.size();
  j["prior_mnist_accuracy"] = 100.0 * evaluate(prior, data.mnist_test);
  j["prior_emnist_accuracy"] = 100.0 * evaluate(prior, data.emnist_test);
  j["rows"] = rows;
  // For each beta present for both objectives: does ove_pg match or beat softmax?
  Json comparison = Json::array();
  for (double beta : betas) {
    const Json* soft = nullptr;
    const Json* pg = nullptr;
    for (const auto& r : rows) {
      if (r["beta"].get<double>() != beta) continue;
      if (r["objective"] == "softmax") soft = &r;
      if (r["objective"] == "ove_pg") pg = &r;
    }
    if (soft && pg) {
      comparison.push_back({{"beta", beta},
                            {"softmax_harmonic_mean", (*soft)["harmonic_mean"]},
                            {"ove_pg_harmonic_mean", (*pg)["harmonic_mean"]},
                            {"ove_pg_at_least_softmax", (*pg)["harmonic_mean"].get<double>() >=
                                                            (*soft)["harmonic_mean"].get<double>()}});
    }
  }
  j["harmonic_mean_comparison"] = comparison;
  run.write_json("report.json", j);
  run.add_output("report.json");
  return kOk;
}

int Commands::pg_check(RunOutput& run, std::ostream& out, std::ostream& err) {
  const auto& f = pg_;
  const auto bs = parse_doubles(f.b, "--b");
  const auto cs = parse_doubles(f.c, "--c");
  if (f.draws < 1) throw ParameterError("--draws must be positive");
  if (!(f.tolerance > 0.0)) throw ParameterError("--tolerance must be positive");
  const TruncationPolicy policy{f.pg_terms, !f.no_tail_correction};

  Json rows = Json::array();
  std::size_t failures = 0;
  std::size_t index = 0;
  for (double b : bs) {
    for (double c : cs) {
      const std::vector<double> tilts(f.draws, c);
      const auto draws = sample_pg(b, tilts, policy, RngState{f.common.seed, index++});
      double sum = 0.0;
      for (double d : draws) sum += d;
      const double mean = sum / static_cast<double>(draws.size());
      const double target = pg_mean(b, c);
      const double rel = std::abs(mean - target) / target;
      const bool pass = rel <= f.tolerance;
      failures += pass ? 0 : 1;
      Json row{{"b", b}, {"c", c}, {"draws", f.draws}, {"sample_mean", mean},
               {"pg_mean", target}, {"relative_error", rel}, {"pass", pass}};
      run.metric(row);
      rows.push_back(row);
      out << "PG(" << b << ", " << c << "): sample mean " << std::setprecision(6) << mean
          << " vs " << target << " (rel. error " << rel << ") " << (pass ? "ok" : "FAIL") << '\n';
    }
  }
  Json j{{"task", "pg-check"},
         {"pg_terms", f.pg_terms},
         {"tail_correction", !f.no_tail_correction},
         {"tolerance", f.tolerance},
         {"rows", rows},
         {"failures", failures}};
  run.write_json("report.json", j);
  run.add_output("report.json");
  if (failures > 0) {
    Json line{{"error", "numerical"},
              {"code", static_cast<int>(kNumericalError)},
              {"message", std::to_string(failures) + " of " + std::to_string(rows.size()) +
                              " PG moment checks exceed tolerance"}};
    err << line.dump() << '\n';
    return kNumericalError;
  }
  return kOk;
}

int Commands::ove_inspect(RunOutput& run, std::ostream& out) {
  const auto& f = inspect_;
  const auto values = parse_doubles(f.logits, "--logits");
  const std::size_t C = values.size();
  if (C < 2) throw ParameterError("need at least two logits");
  if (f.label >= C) throw ParameterError("--label must be below the class count");
  Matrix logits(1, static_cast<Eigen::Index>(C));
  for (std::size_t c = 0; c < C; ++c) logits(0, static_cast<Eigen::Index>(c)) = values[c];

  const ATensor a = build_a_tensor(C);
  const PairwiseTensor psi = build_psi(logits);
  const PairwiseTensor kappa = build_kappa(OneHotLabels({f.label}, C));
  auto nested = [C](auto&& at) {
    Json blocks = Json::array();
    for (std::size_t i = 0; i < C; ++i) {
      Json block = Json::array();
      for (std::size_t j = 0; j < C; ++j) {
        Json row = Json::array();
        for (std::size_t k = 0; k < C; ++k) row.push_back(at(i, j, k));
        block.push_back(row);
      }
      blocks.push_back(block);
    }
    return blocks;
  };
  auto square = [C](const PairwiseTensor& t) {
    Json m = Json::array();
    for (std::size_t i = 0; i < C; ++i) {
      Json row = Json::array();
      for (std::size_t j = 0; j < C; ++j) row.push_back(t(0, i, j));
      m.push_back(row);
    }
    return m;
  };
  const Matrix ove_scores = ove_log_scores(psi);
  const Matrix soft = softmax_probability(logits);
  std::vector<double> ove_p(C), soft_p(C);
  for (std::size_t c = 0; c < C; ++c) {
    ove_p[c] = std::exp(ove_scores(0, static_cast<Eigen::Index>(c)));
    soft_p[c] = soft(0, static_cast<Eigen::Index>(c));
  }
  Json j{{"task", "ove-inspect"},
         {"logits", values},
         {"label", f.label},
         {"a_tensor", nested([&](std::size_t i, std::size_t jj, std::size_t k) { return int(a(i, jj, k)); })},
         {"psi", square(psi)},
         {"kappa", square(kappa)},
         {"ove_probability", ove_p},
         {"softmax_probability", soft_p},
         {"predicted_class", argmax_rows(logits).front()}};
  run.write_json("report.json", j);
  run.add_output("report.json");
  out << j.dump(2) << '\n';
  return kOk;
}

int Commands::eval(RunOutput& run, std::ostream& out) {
  const auto& f = eval_;
  std::optional<Model> model;
  if (f.member == "model") {
    model = load_model(f.model);
  } else if (f.member == "prior" || f.member == "tuned") {
    ModelPair pair = load_pair(f.model);
    model = f.member == "prior" ? pair.prior() : pair.tuned();
  } else {
    throw UsageError("--member must be model, prior or tuned");
  }
  run.add_input(f.model);
  const std::size_t classes = f.classes == 0 ? model->output_width() : f.classes;
  const Dataset data = load_checked(run, f.images, f.labels, {.transpose = f.transpose, .classes = classes});
  const double acc = 100.0 * evaluate(*model, data);
  Json j{{"task", "eval"}, {"model", model_json(*model)}, {"member", f.member},
         {"samples", data.size()}, {"accuracy", acc}};
  run.write_json("report.json", j);
  run.add_output("report.json");
  out << "accuracy " << std::fixed << std::setprecision(2) << acc << "% on " << data.size() << " samples\n";
  return kOk;
}

}  // namespace ovepg::cli
