#include "ovepg/objective.hpp"

#include <cmath>
#include <string>

#include "ovepg/errors.hpp"
#include "ovepg/ove.hpp"

namespace ovepg {

std::string_view to_string(Objective objective) noexcept {
  switch (objective) {
    case Objective::softmax: return "softmax";
    case Objective::ove: return "ove";
    case Objective::ove_pg: return "ove_pg";
  }
  return "unknown";
}

std::string_view to_string(OmegaMode mode) noexcept {
  return mode == OmegaMode::mean ? "mean" : "sample";
}

Objective parse_objective(std::string_view text) {
  if (text == "softmax") return Objective::softmax;
  if (text == "ove") return Objective::ove;
  if (text == "ove_pg" || text == "ove-pg") return Objective::ove_pg;
  throw ParameterError("unknown objective '" + std::string(text) + "'");
}

OmegaMode parse_omega_mode(std::string_view text) {
  if (text == "mean") return OmegaMode::mean;
  if (text == "sample") return OmegaMode::sample;
  throw ParameterError("unknown omega mode '" + std::string(text) + "'");
}

void ObjectiveConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be non-negative");
  if (chains < 1) throw ParameterError("chain count M must be at least 1");
  if (truncation.num_terms < 1) throw ParameterError("PG truncation needs at least one term");
  if (!std::isfinite(nll_weight)) throw ParameterError("nll weight must be finite");
}

namespace {

void check_labels(const Logits& logits, const OneHotLabels& labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size() ||
      static_cast<std::size_t>(logits.cols()) != labels.classes()) {
    throw InputError("logits are " + std::to_string(logits.rows()) + "x" +
                     std::to_string(logits.cols()) + " but labels are " +
                     std::to_string(labels.size()) + "x" + std::to_string(labels.classes()));
  }
}

// Gradient of nll_loss with respect to psi_draw, pushed onto the logits through
// d psi[n,i,j] / d f[n,k] = delta_ik - delta_jk. `scale` carries the per-entry
// chain rule factor d psi_draw / d psi_theta (1 without the posterior).
template <class ScaleFn>
void accumulate_ove_gradient(const PairwiseTensor& psi, const OneHotLabels& labels, double weight,
                             ScaleFn scale, Matrix& grad) {
  const std::size_t n = labels.size();
  const std::size_t C = labels.classes();
  const double inv_n = weight / static_cast<double>(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t y = labels[s];
    const auto row = static_cast<Eigen::Index>(s);
    for (std::size_t j = 0; j < C; ++j) {
      if (j == y) continue;
      const double g = -sigmoid(-psi(s, y, j)) * inv_n * scale(s, y, j);
      grad(row, static_cast<Eigen::Index>(y)) += g;
      grad(row, static_cast<Eigen::Index>(j)) -= g;
    }
  }
}

}  // namespace

double nll_loss(const PairwiseTensor& psi_draw, const OneHotLabels& labels) {
  if (psi_draw.samples() != labels.size() || psi_draw.classes() != labels.classes()) {
    throw InputError("nll_loss: psi and label shapes differ");
  }
  if (labels.size() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const std::size_t y = labels[s];
    for (std::size_t j = 0; j < labels.classes(); ++j) {
      if (j != y) total -= log_sigmoid(psi_draw(s, y, j));
    }
  }
  return total / static_cast<double>(labels.size());
}

double kl_penalty(const Logits& mu_theta, const Logits& mu, double beta) {
  if (mu_theta.rows() != mu.rows() || mu_theta.cols() != mu.cols()) {
    throw InputError("kl_penalty: logit shapes differ");
  }
  if (!(beta >= 0.0)) throw ParameterError("beta must be non-negative");
  if (beta == 0.0) return 0.0;
  return beta * (mu_theta - mu).squaredNorm();
}

double softmax_nll(const Logits& logits, const OneHotLabels& labels) {
  check_labels(logits, labels);
  if (labels.size() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index n = 0; n < logits.rows(); ++n) {
    const double top = logits.row(n).maxCoeff();
    const double lse = top + std::log((logits.row(n).array() - top).exp().sum());
    total += lse - logits(n, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(n)]));
  }
  return total / static_cast<double>(labels.size());
}

StepResult elbo_step(const Logits& mu_theta, const Logits& mu, const OneHotLabels& labels,
                     const ObjectiveConfig& cfg, const RngState& rng) {
  cfg.validate();
  check_labels(mu_theta, labels);
  if (mu.rows() != mu_theta.rows() || mu.cols() != mu_theta.cols()) {
    throw InputError("prior and tuned logits differ in shape");
  }
  require_finite(mu_theta, "tuned logits");
  require_finite(mu, "prior logits");

  const std::size_t n = labels.size();
  StepResult out;
  out.gradient = Matrix::Zero(mu_theta.rows(), mu_theta.cols());
  auto& loss = out.loss;

  switch (cfg.objective) {
    case Objective::softmax: {
      const double nll = cfg.nll_weight * softmax_nll(mu_theta, labels);
      loss.per_chain_nll = {nll};
      if (n > 0) {
        Matrix p = softmax_probability(mu_theta);
        for (std::size_t s = 0; s < n; ++s) {
          p(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(labels[s])) -= 1.0;
        }
        out.gradient += p * (cfg.nll_weight / static_cast<double>(n));
      }
      break;
    }
    case Objective::ove: {
      const PairwiseTensor psi = build_psi(mu_theta);
      loss.per_chain_nll = {cfg.nll_weight * nll_loss(psi, labels)};
      accumulate_ove_gradient(
          psi, labels, cfg.nll_weight,
          [](std::size_t, std::size_t, std::size_t) { return 1.0; }, out.gradient);
      break;
    }
    case Objective::ove_pg: {
      const PriorPrecision alpha(cfg.alpha);
      const double half_alpha = 0.5 * cfg.alpha;
      const PairwiseTensor psi_prior = build_psi(mu);
      const PairwiseTensor psi_theta = build_psi(mu_theta);
      const PairwiseTensor kappa = build_kappa(labels);
      PairwiseTensor omega_mean;
      if (cfg.omega_mode == OmegaMode::mean) {
        omega_mean = omega_update(psi_prior, OmegaMode::mean, cfg.truncation, rng);
      }
      loss.per_chain_nll.reserve(cfg.chains);
      Matrix chain_grad(mu_theta.rows(), mu_theta.cols());
      for (std::size_t m = 0; m < cfg.chains; ++m) {
        const RngState chain = rng.child(m);
        const PairwiseTensor omega =
            cfg.omega_mode == OmegaMode::mean
                ? omega_mean
                : omega_update(psi_prior, OmegaMode::sample, cfg.truncation, chain.child(0));
        const PosteriorGaussian post = posterior_params(psi_theta, omega, kappa, alpha);
        const PsiDraw draw =
            cfg.zero_noise
                ? sample_psi(post, PairwiseTensor(n, labels.classes(), PairwiseRole::noise))
                : sample_psi(post, chain.child(1));
        loss.per_chain_nll.push_back(cfg.nll_weight * nll_loss(draw.psi, labels));
        chain_grad.setZero();
        accumulate_ove_gradient(
            draw.psi, labels, cfg.nll_weight,
            [&](std::size_t s, std::size_t i, std::size_t j) {
              return post.variance(s, i, j) * half_alpha;
            },
            chain_grad);
        out.gradient += chain_grad;
      }
      out.gradient /= static_cast<double>(cfg.chains);
      break;
    }
  }

  double sum = 0.0;
  for (double v : loss.per_chain_nll) sum += v;
  loss.nll = sum / static_cast<double>(loss.per_chain_nll.size());
  loss.kl = kl_penalty(mu_theta, mu, cfg.beta);
  if (cfg.beta > 0.0) out.gradient += 2.0 * cfg.beta * (mu_theta - mu);
  loss.total = loss.nll + loss.kl;
  return out;
}

}  // namespace ovepg
