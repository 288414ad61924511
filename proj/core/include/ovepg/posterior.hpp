#pragma once

#include "ovepg/pg.hpp"
#include "ovepg/rng.hpp"
#include "ovepg/tensor.hpp"

namespace ovepg {

enum class OmegaMode { mean, sample };

/// Prior precision over logits.
class PriorPrecision {
 public:
  explicit PriorPrecision(double alpha);
  double value() const noexcept { return alpha_; }

 private:
  double alpha_;
};

/// Diagonal Gaussian over the pairwise differences of the fine-tuned logits.
struct PosteriorGaussian {
  PairwiseTensor mean;
  PairwiseTensor variance;
};

struct PsiDraw {
  PairwiseTensor psi;
  PairwiseTensor noise;
};

/// PG(1, psi) auxiliaries from the frozen prior's pairwise differences, either
/// drawn or fixed at their expectation.
PairwiseTensor omega_update(const PairwiseTensor& psi_prior, OmegaMode mode,
                            const TruncationPolicy& policy, const RngState& rng);

/// variance = 1 / (alpha/2 + omega), mean = variance * (alpha/2 * psi_theta + kappa),
/// elementwise.
PosteriorGaussian posterior_params(const PairwiseTensor& psi_theta,
                                   const PairwiseTensor& omega,
                                   const PairwiseTensor& kappa, PriorPrecision alpha);

/// psi = mean + sqrt(variance) * noise with standard-normal noise.
PsiDraw sample_psi(const PosteriorGaussian& post, const RngState& rng);

/// Same draw with caller-supplied noise (zero noise returns the mean).
PsiDraw sample_psi(const PosteriorGaussian& post, PairwiseTensor noise);

}  // namespace ovepg
