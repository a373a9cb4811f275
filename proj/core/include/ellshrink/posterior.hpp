#pragma once

#include "ellshrink/statcore.hpp"

namespace ellshrink {

// Marginal posterior of theta under the flat / Jeffreys prior: a
// p-variate Student t centred at ybar with N - p degrees of freedom and
// density kernel [1 + N (theta - ybar)^T S^{-1} (theta - ybar)]^{-N/2}.
//
// Matching the kernel to the standard t_nu(mu, Lambda) form gives
// nu = N - p and Lambda = S / (N (N - p)); the normalising constant is
//   Gamma(N/2) N^{p/2} / (Gamma((N-p)/2) pi^{p/2} |S|^{1/2}).
class PosteriorT {
 public:
  PosteriorT(Vector center, SpdMatrix scatter, Eigen::Index n_obs);
  explicit PosteriorT(const SufficientStats& stats);

  const Vector& center() const noexcept { return center_; }
  const SpdMatrix& scatter() const noexcept { return scatter_; }
  Eigen::Index n_obs() const noexcept { return n_obs_; }
  Eigen::Index dim() const noexcept { return center_.size(); }
  Eigen::Index dof() const noexcept { return n_obs_ - dim(); }
  double log_normalizer() const noexcept { return log_norm_; }

 private:
  Vector center_;
  SpdMatrix scatter_;
  Eigen::Index n_obs_;
  double log_norm_;
};

double posterior_logpdf(const Vector& theta, const PosteriorT& post);

// Tensor-product Gauss-Legendre integral of the density, `nodes` points
// per axis, after mapping each standardised coordinate u to atan(u/sqrt(nu))
// so the whole space is covered. Only p <= 3 (DimensionTooLarge otherwise).
double posterior_normalization_check(const PosteriorT& post, int nodes = 96);

}  // namespace ellshrink
