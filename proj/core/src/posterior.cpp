#include "ovepg/posterior.hpp"

#include <cmath>
#include <string>

#include "ovepg/errors.hpp"

namespace ovepg {

PriorPrecision::PriorPrecision(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ParameterError("prior precision alpha must be positive, got " + std::to_string(alpha));
  }
}

PairwiseTensor omega_update(const PairwiseTensor& psi_prior, OmegaMode mode,
                            const TruncationPolicy& policy, const RngState& rng) {
  if (psi_prior.role() != PairwiseRole::psi) throw InputError("omega_update expects a psi tensor");
  PairwiseTensor omega(psi_prior.samples(), psi_prior.classes(), PairwiseRole::omega);
  auto out = omega.values();
  const auto psi = psi_prior.values();
  if (mode == OmegaMode::mean) {
    for (std::size_t e = 0; e < psi.size(); ++e) out[e] = pg_mean(1.0, psi[e]);
  } else {
    const auto draws = sample_pg(1.0, psi, policy, rng);
    std::copy(draws.begin(), draws.end(), out.begin());
  }
  return omega;
}

PosteriorGaussian posterior_params(const PairwiseTensor& psi_theta,
                                   const PairwiseTensor& omega,
                                   const PairwiseTensor& kappa, PriorPrecision alpha) {
  if (!psi_theta.same_shape(omega) || !psi_theta.same_shape(kappa)) {
    throw InputError("posterior_params: psi, omega and kappa shapes differ");
  }
  if (omega.role() != PairwiseRole::omega || kappa.role() != PairwiseRole::kappa) {
    throw InputError("posterior_params: unexpected tensor roles");
  }
  const double half_alpha = 0.5 * alpha.value();
  PosteriorGaussian post{
      PairwiseTensor(psi_theta.samples(), psi_theta.classes(), PairwiseRole::psi),
      PairwiseTensor(psi_theta.samples(), psi_theta.classes(), PairwiseRole::variance)};
  const auto psi = psi_theta.values();
  const auto w = omega.values();
  const auto k = kappa.values();
  auto mean = post.mean.values();
  auto var = post.variance.values();
  for (std::size_t e = 0; e < psi.size(); ++e) {
    var[e] = 1.0 / (half_alpha + w[e]);
    mean[e] = var[e] * (half_alpha * psi[e] + k[e]);
  }
  return post;
}

PsiDraw sample_psi(const PosteriorGaussian& post, const RngState& rng) {
  PairwiseTensor noise(post.mean.samples(), post.mean.classes(), PairwiseRole::noise);
  Rng gen(rng);
  for (double& z : noise.values()) z = gen.normal();
  return sample_psi(post, std::move(noise));
}

PsiDraw sample_psi(const PosteriorGaussian& post, PairwiseTensor noise) {
  if (!post.mean.same_shape(post.variance) || !post.mean.same_shape(noise)) {
    throw InputError("sample_psi: noise shape differs from the posterior");
  }
  PsiDraw draw{PairwiseTensor(post.mean.samples(), post.mean.classes(), PairwiseRole::psi),
               std::move(noise)};
  const auto mean = post.mean.values();
  const auto var = post.variance.values();
  const auto z = draw.noise.values();
  auto out = draw.psi.values();
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = mean[e] + std::sqrt(var[e]) * z[e];
  return draw;
}

}  // namespace ovepg
