#include "ovepg/models.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "ovepg/errors.hpp"
#include "ovepg/rng.hpp"

namespace ovepg {

namespace {

constexpr std::string_view kModelMagic = "OVEPG-MODEL-1";

std::uint64_t next_model_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

using ConstMap = Eigen::Map<const Matrix>;
using RowMap = Eigen::Map<const Eigen::RowVectorXd>;

double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::tanh: return std::tanh(z);
    case Activation::identity: return z;
  }
  return z;
}

// Derivative expressed through the pre-activation z and output a.
double activate_grad(Activation act, double z, double a) {
  switch (act) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - a * a;
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

// Offset of layer l's weight block in the flat MLP buffer.
std::size_t layer_offset(const MlpSpec& spec, std::size_t layer) {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += spec.layers[l] * spec.layers[l + 1] + spec.layers[l + 1];
  return off;
}

}  // namespace

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "unknown";
}

Activation parse_activation(std::string_view text) {
  if (text == "relu") return Activation::relu;
  if (text == "tanh") return Activation::tanh;
  if (text == "identity") return Activation::identity;
  throw ParameterError("unknown activation '" + std::string(text) + "'");
}

void validate(const ModelSpec& spec) {
  if (const auto* poly = std::get_if<PolySpec>(&spec)) {
    if (poly->degree < 1) throw ParameterError("polynomial degree must be at least 1");
    if (poly->classes < 2) throw ParameterError("model needs at least two classes");
    return;
  }
  const auto& mlp = std::get<MlpSpec>(spec);
  if (mlp.layers.size() < 2) throw ParameterError("MLP needs input and output widths");
  for (auto w : mlp.layers) {
    if (w == 0) throw ParameterError("MLP layer widths must be positive");
  }
  if (mlp.layers.back() < 2) throw ParameterError("model needs at least two classes");
}

std::size_t parameter_count(const ModelSpec& spec) {
  validate(spec);
  if (const auto* poly = std::get_if<PolySpec>(&spec)) return poly->degree * poly->classes;
  const auto& mlp = std::get<MlpSpec>(spec);
  return layer_offset(mlp, mlp.layers.size() - 1);
}

Model::Model(ModelSpec spec, std::vector<double> parameters)
    : spec_(std::move(spec)), params_(std::move(parameters)), id_(next_model_id()) {
  if (params_.size() != parameter_count(spec_)) {
    throw InputError("model expects " + std::to_string(parameter_count(spec_)) +
                     " parameters, got " + std::to_string(params_.size()));
  }
  for (double p : params_) {
    if (!std::isfinite(p)) throw InputError("model parameters must be finite");
  }
}

Model::Model(const Model& other)
    : spec_(other.spec_), params_(other.params_), id_(next_model_id()) {}

Model& Model::operator=(const Model& other) {
  if (this != &other) {
    spec_ = other.spec_;
    params_ = other.params_;
    id_ = next_model_id();
    generation_ = 0;
  }
  return *this;
}

std::size_t Model::input_width() const noexcept {
  if (const auto* mlp = std::get_if<MlpSpec>(&spec_)) return mlp->layers.front();
  return 1;
}

std::size_t Model::output_width() const noexcept {
  if (const auto* mlp = std::get_if<MlpSpec>(&spec_)) return mlp->layers.back();
  return std::get<PolySpec>(spec_).classes;
}

std::span<double> Model::mutable_parameters() noexcept {
  ++generation_;
  return params_;
}

Matrix poly_features(const Matrix& x, std::size_t degree) {
  if (x.cols() != 1) throw InputError("polynomial model expects scalar inputs (n x 1)");
  Matrix phi(x.rows(), static_cast<Eigen::Index>(degree));
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    double p = 1.0;
    for (std::size_t d = 0; d < degree; ++d) {
      p *= x(n, 0);
      phi(n, static_cast<Eigen::Index>(d)) = p;
    }
  }
  return phi;
}

ForwardResult Model::forward(const Matrix& x) const {
  ForwardResult out;
  out.cache.model_id = id_;
  out.cache.generation = generation_;
  if (const auto* poly = std::get_if<PolySpec>(&spec_)) {
    Matrix phi = poly_features(x, poly->degree);
    const ConstMap w(params_.data(), static_cast<Eigen::Index>(poly->degree),
                     static_cast<Eigen::Index>(poly->classes));
    out.logits = phi * w;
    out.cache.inputs.push_back(std::move(phi));
    return out;
  }
  const auto& mlp = std::get<MlpSpec>(spec_);
  if (static_cast<std::size_t>(x.cols()) != mlp.layers.front()) {
    throw InputError("MLP expects input width " + std::to_string(mlp.layers.front()) + ", got " +
                     std::to_string(x.cols()));
  }
  const std::size_t num_layers = mlp.layers.size() - 1;
  out.cache.inputs.reserve(num_layers);
  out.cache.preactivations.reserve(num_layers - 1);
  Matrix a = x;
  std::size_t off = 0;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const auto in = static_cast<Eigen::Index>(mlp.layers[l]);
    const auto width = static_cast<Eigen::Index>(mlp.layers[l + 1]);
    const ConstMap w(params_.data() + off, in, width);
    const RowMap b(params_.data() + off + mlp.layers[l] * mlp.layers[l + 1], width);
    off += mlp.layers[l] * mlp.layers[l + 1] + mlp.layers[l + 1];
    Matrix z = a * w;
    z.rowwise() += b;
    out.cache.inputs.push_back(std::move(a));
    if (l + 1 == num_layers) {
      out.logits = std::move(z);
    } else {
      a = z.unaryExpr([act = mlp.hidden](double v) { return activate(act, v); });
      out.cache.preactivations.push_back(std::move(z));
    }
  }
  return out;
}

Logits Model::predict(const Matrix& x) const { return forward(x).logits; }

ParamGradients Model::backward(const ForwardCache& cache, const Matrix& logit_grad) const {
  if (cache.model_id != id_ || cache.generation != generation_) {
    throw UsageError("forward cache does not belong to the current model parameters");
  }
  ParamGradients grads{std::vector<double>(params_.size(), 0.0)};
  if (cache.inputs.empty()) throw UsageError("empty forward cache");
  if (logit_grad.rows() != cache.inputs.front().rows() ||
      static_cast<std::size_t>(logit_grad.cols()) != output_width()) {
    throw InputError("logit gradient shape does not match the forward pass");
  }
  if (const auto* poly = std::get_if<PolySpec>(&spec_)) {
    Eigen::Map<Matrix> dw(grads.values.data(), static_cast<Eigen::Index>(poly->degree),
                          static_cast<Eigen::Index>(poly->classes));
    dw.noalias() = cache.inputs.front().transpose() * logit_grad;
    return grads;
  }
  const auto& mlp = std::get<MlpSpec>(spec_);
  const std::size_t num_layers = mlp.layers.size() - 1;
  Matrix g = logit_grad;
  for (std::size_t l = num_layers; l-- > 0;) {
    const auto in = static_cast<Eigen::Index>(mlp.layers[l]);
    const auto width = static_cast<Eigen::Index>(mlp.layers[l + 1]);
    const std::size_t off = layer_offset(mlp, l);
    Eigen::Map<Matrix> dw(grads.values.data() + off, in, width);
    Eigen::Map<Eigen::RowVectorXd> db(grads.values.data() + off + mlp.layers[l] * mlp.layers[l + 1],
                                      width);
    const Matrix& input = cache.inputs[l];
    dw.noalias() = input.transpose() * g;
    db = g.colwise().sum();
    if (l == 0) break;
    const ConstMap w(params_.data() + off, in, width);
    Matrix upstream = g * w.transpose();
    const Matrix& z = cache.preactivations[l - 1];
    for (Eigen::Index i = 0; i < upstream.size(); ++i) {
      upstream.data()[i] *= activate_grad(mlp.hidden, z.data()[i], input.data()[i]);
    }
    g = std::move(upstream);
  }
  return grads;
}

Model init_model(const ModelSpec& spec, std::uint64_t seed) {
  std::vector<double> params(parameter_count(spec), 0.0);
  Rng rng(RngState{seed, 0x6d6f64656cULL});
  auto fill = [&](double* w, std::size_t count, std::size_t fan_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) w[i] = scale * (2.0 * rng.uniform() - 1.0);
  };
  if (const auto* poly = std::get_if<PolySpec>(&spec)) {
    fill(params.data(), params.size(), poly->degree);
  } else {
    const auto& mlp = std::get<MlpSpec>(spec);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < mlp.layers.size(); ++l) {
      fill(params.data() + off, mlp.layers[l] * mlp.layers[l + 1], mlp.layers[l]);
      off += mlp.layers[l] * mlp.layers[l + 1] + mlp.layers[l + 1];
    }
  }
  return Model(spec, std::move(params));
}

Logits poly_forward(const Model& model, const Matrix& x) {
  if (!model.is_poly()) throw InputError("poly_forward on a non-polynomial model");
  return model.forward(x).logits;
}

ForwardResult mlp_forward(const Model& model, const Matrix& x) {
  if (model.is_poly()) throw InputError("mlp_forward on a polynomial model");
  return model.forward(x);
}

ParamGradients model_backward(const Model& model, const ForwardCache& cache,
                              const Matrix& logit_grad) {
  return model.backward(cache, logit_grad);
}

ModelPair::ModelPair(Model prior, Model tuned)
    : prior_(std::make_shared<const Model>(std::move(prior))), tuned_(std::move(tuned)) {
  if (!(prior_->spec() == tuned_.spec())) {
    throw InputError("prior and tuned models have different architectures");
  }
}

ModelPair freeze_as_prior(const Model& model) { return ModelPair(model, model); }

void save_model(std::ostream& out, const Model& model) {
  nlohmann::json header;
  if (const auto* poly = std::get_if<PolySpec>(&model.spec())) {
    header["kind"] = "poly";
    header["degree"] = poly->degree;
    header["classes"] = poly->classes;
  } else {
    const auto& mlp = std::get<MlpSpec>(model.spec());
    header["kind"] = "mlp";
    header["layers"] = mlp.layers;
    header["activation"] = std::string(to_string(mlp.hidden));
  }
  header["param_count"] = model.parameters().size();
  header["dtype"] = "float64-le";
  out << kModelMagic << '\n' << header.dump() << '\n';
  for (double p : model.parameters()) {
    auto bits = std::bit_cast<std::uint64_t>(p);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
  if (!out) throw LoadError(LoadErrorKind::io, "failed writing model");
}

Model load_model(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic)) throw LoadError(LoadErrorKind::truncated, "empty model stream");
  if (magic != kModelMagic) throw LoadError(LoadErrorKind::bad_magic, "not an OVEPG model");
  std::string line;
  if (!std::getline(in, line)) throw LoadError(LoadErrorKind::truncated, "missing model header");
  ModelSpec spec;
  std::size_t count = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    const auto kind = header.at("kind").get<std::string>();
    if (kind == "poly") {
      spec = PolySpec{header.at("degree").get<std::size_t>(), header.at("classes").get<std::size_t>()};
    } else if (kind == "mlp") {
      spec = MlpSpec{header.at("layers").get<std::vector<std::size_t>>(),
                     parse_activation(header.at("activation").get<std::string>())};
    } else {
      throw LoadError(LoadErrorKind::bad_header, "unknown model kind '" + kind + "'");
    }
    count = header.at("param_count").get<std::size_t>();
    if (count != parameter_count(spec)) {
      throw LoadError(LoadErrorKind::bad_header, "parameter count disagrees with architecture");
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(LoadErrorKind::bad_header, e.what());
  } catch (const ParameterError& e) {
    throw LoadError(LoadErrorKind::bad_header, e.what());
  }
  std::vector<double> params(count);
  for (auto& p : params) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw LoadError(LoadErrorKind::truncated, "model parameter block");
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    p = std::bit_cast<double>(bits);
  }
  return Model(std::move(spec), std::move(params));
}

void save_model(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError(LoadErrorKind::io, "cannot open " + path + " for writing");
  save_model(out, model);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(LoadErrorKind::io, "cannot open " + path);
  return load_model(in);
}

void save_pair(std::ostream& out, const ModelPair& pair) {
  save_model(out, pair.prior());
  save_model(out, pair.tuned());
}

ModelPair load_pair(std::istream& in) {
  Model prior = load_model(in);
  Model tuned = load_model(in);
  return ModelPair(std::move(prior), std::move(tuned));
}

void save_pair(const std::string& path, const ModelPair& pair) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError(LoadErrorKind::io, "cannot open " + path + " for writing");
  save_pair(out, pair);
}

ModelPair load_pair(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(LoadErrorKind::io, "cannot open " + path);
  return load_pair(in);
}

}  // namespace ovepg
