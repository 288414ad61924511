#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ovepg/tensor.hpp"

namespace ovepg {

enum class Activation { relu, tanh, identity };

std::string_view to_string(Activation a) noexcept;
Activation parse_activation(std::string_view text);

/// Linear classifier over the features (x, x^2, ..., x^degree).
struct PolySpec {
  std::size_t degree = 3;
  std::size_t classes = 3;

  friend bool operator==(const PolySpec&, const PolySpec&) = default;
};

/// Fully connected stack; `layers` runs input -> hidden... -> classes.
struct MlpSpec {
  std::vector<std::size_t> layers;
  Activation hidden = Activation::relu;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

using ModelSpec = std::variant<PolySpec, MlpSpec>;

std::size_t parameter_count(const ModelSpec& spec);
void validate(const ModelSpec& spec);

/// Intermediate values of one forward pass, tied to the model instance and
/// parameter generation that produced them.
struct ForwardCache {
  std::uint64_t model_id = 0;
  std::uint64_t generation = 0;
  /// Input to each layer (for poly: the feature matrix).
  std::vector<Matrix> inputs;
  /// Pre-activation of each hidden layer.
  std::vector<Matrix> preactivations;
};

struct ForwardResult {
  Logits logits;
  ForwardCache cache;
};

/// Gradients laid out exactly like Model::parameters().
struct ParamGradients {
  std::vector<double> values;
};

/// A logit-producing model with all parameters in one flat buffer.
///
/// Poly layout: degree x classes weights, row-major. MLP layout: for each
/// layer, an in x out row-major weight block followed by its out biases.
class Model {
 public:
  Model(ModelSpec spec, std::vector<double> parameters);
  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  const ModelSpec& spec() const noexcept { return spec_; }
  bool is_poly() const noexcept { return std::holds_alternative<PolySpec>(spec_); }
  std::size_t input_width() const noexcept;
  std::size_t output_width() const noexcept;

  std::span<const double> parameters() const noexcept { return params_; }
  /// Mutable access; invalidates caches from earlier forward passes.
  std::span<double> mutable_parameters() noexcept;

  std::uint64_t id() const noexcept { return id_; }
  std::uint64_t generation() const noexcept { return generation_; }

  ForwardResult forward(const Matrix& x) const;
  /// Logits only, without keeping a cache.
  Logits predict(const Matrix& x) const;
  ParamGradients backward(const ForwardCache& cache, const Matrix& logit_grad) const;

 private:
  ModelSpec spec_;
  std::vector<double> params_;
  std::uint64_t id_;
  std::uint64_t generation_ = 0;
};

Model init_model(const ModelSpec& spec, std::uint64_t seed);

/// Feature map (x, x^2, ..., x^degree) for an n x 1 input.
Matrix poly_features(const Matrix& x, std::size_t degree);

Logits poly_forward(const Model& model, const Matrix& x);
ForwardResult mlp_forward(const Model& model, const Matrix& x);
ParamGradients model_backward(const Model& model, const ForwardCache& cache,
                              const Matrix& logit_grad);

/// A frozen prior and a trainable copy with identical architecture.
class ModelPair {
 public:
  ModelPair(Model prior, Model tuned);

  const Model& prior() const noexcept { return *prior_; }
  Model& tuned() noexcept { return tuned_; }
  const Model& tuned() const noexcept { return tuned_; }

 private:
  std::shared_ptr<const Model> prior_;
  Model tuned_;
};

ModelPair freeze_as_prior(const Model& model);

/// Checkpoint format: the line "OVEPG-MODEL-1", a one-line JSON header with
/// the architecture and parameter count, then the parameters as little-endian
/// float64.
void save_model(std::ostream& out, const Model& model);
Model load_model(std::istream& in);
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

/// A pair is the prior record followed by the tuned record.
void save_pair(std::ostream& out, const ModelPair& pair);
ModelPair load_pair(std::istream& in);
void save_pair(const std::string& path, const ModelPair& pair);
ModelPair load_pair(const std::string& path);

}  // namespace ovepg
