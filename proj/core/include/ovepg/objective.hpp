#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "ovepg/pg.hpp"
#include "ovepg/posterior.hpp"
#include "ovepg/rng.hpp"
#include "ovepg/tensor.hpp"

namespace ovepg {

enum class Objective { softmax, ove, ove_pg };

std::string_view to_string(Objective objective) noexcept;
std::string_view to_string(OmegaMode mode) noexcept;
Objective parse_objective(std::string_view text);
OmegaMode parse_omega_mode(std::string_view text);

struct ObjectiveConfig {
  Objective objective = Objective::ove_pg;
  double alpha = 100.0;
  double beta = 0.3;
  std::size_t chains = 4;
  OmegaMode omega_mode = OmegaMode::mean;
  TruncationPolicy truncation{};
  /// Replace posterior noise by zeros, so each chain uses the posterior mean.
  bool zero_noise = false;
  /// Scales the likelihood term; zero leaves only the KL pull.
  double nll_weight = 1.0;

  void validate() const;
};

struct LossBreakdown {
  double nll = 0.0;
  double kl = 0.0;
  double total = 0.0;
  std::vector<double> per_chain_nll;
};

struct StepResult {
  LossBreakdown loss;
  /// d total / d mu_theta, n x C.
  Matrix gradient;
};

/// Mean over samples of -sum_{j != y_n} log sigma(psi[n, y_n, j]).
double nll_loss(const PairwiseTensor& psi_draw, const OneHotLabels& labels);

/// beta * sum (mu_theta - mu)^2 over all entries.
double kl_penalty(const Logits& mu_theta, const Logits& mu, double beta);

/// Mean cross-entropy of the softmax of the logits.
double softmax_nll(const Logits& logits, const OneHotLabels& labels);

/// One objective evaluation with its gradient with respect to mu_theta.
///
/// For ove_pg, chain m draws its auxiliaries from rng.child(m).child(0) and its
/// posterior noise from rng.child(m).child(1); the returned loss and gradient
/// are averages over chains plus the KL term. The other modes ignore the
/// chain count and report a single per-chain entry.
StepResult elbo_step(const Logits& mu_theta, const Logits& mu, const OneHotLabels& labels,
                     const ObjectiveConfig& cfg, const RngState& rng);

}  // namespace ovepg
