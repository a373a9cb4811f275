#include "ellshrink/posterior.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "ellshrink/error.hpp"
#include "parallel.hpp"

namespace ellshrink {

namespace {

double log_normalizer_for(Eigen::Index n, Eigen::Index p, double log_det_s) {
  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  return std::lgamma(0.5 * nd) - std::lgamma(0.5 * (nd - pd)) + 0.5 * pd * std::log(nd / std::numbers::pi) -
         0.5 * log_det_s;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
}

}  // namespace

PosteriorT::PosteriorT(Vector center, SpdMatrix scatter, Eigen::Index n_obs)
    : center_(std::move(center)), scatter_(std::move(scatter)), n_obs_(n_obs), log_norm_(0.0) {
  if (center_.size() != scatter_.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("center has dimension {}, scatter has {}", center_.size(), scatter_.dim()));
  }
  if (n_obs_ <= center_.size()) {
    throw Error(ErrorCode::InvalidParameter,
                fmt::format("posterior needs N > p, got N = {}, p = {}", n_obs_, center_.size()));
  }
  log_norm_ = log_normalizer_for(n_obs_, dim(), scatter_.log_det());
}

PosteriorT::PosteriorT(const SufficientStats& stats) : PosteriorT(stats.ybar, stats.scatter, stats.n_obs) {}

double posterior_logpdf(const Vector& theta, const PosteriorT& post) {
  if (theta.size() != post.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("theta has dimension {}, posterior has {}", theta.size(), post.dim()));
  }
  const double n = static_cast<double>(post.n_obs());
  const double q = post.scatter().quad_form_inv(theta - post.center());
  return post.log_normalizer() - 0.5 * n * std::log1p(n * q);
}

double posterior_normalization_check(const PosteriorT& post, int nodes) {
  const auto p = post.dim();
  if (p > 3) {
    throw Error(ErrorCode::DimensionTooLarge, fmt::format("tensor quadrature supports p <= 3, got {}", p));
  }
  if (nodes < 2) throw Error(ErrorCode::InvalidParameter, "need at least two quadrature nodes per axis");

  const double n = static_cast<double>(post.n_obs());
  const double nu = static_cast<double>(post.dof());
  const double sqrt_nu = std::sqrt(nu);
  // theta = center + C u with C C^T = S / (N nu), so u is standard t_nu.
  const Matrix c = post.scatter().cholesky() / std::sqrt(n * nu);
  const double log_det_c = c.diagonal().array().log().sum();

  std::vector<double> x, w;
  gauss_legendre(nodes, x, w);
  const double half_pi = 0.5 * std::numbers::pi;
  // Per-axis node: phi = (pi/2) x, u = sqrt(nu) tan(phi), du = sqrt(nu) sec^2(phi) (pi/2) dx.
  std::vector<double> u(x.size()), jac(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double phi = half_pi * x[i];
    const double sec = 1.0 / std::cos(phi);
    u[i] = sqrt_nu * std::tan(phi);
    jac[i] = w[i] * half_pi * sqrt_nu * sec * sec;
  }

  const auto m = static_cast<std::size_t>(nodes);
  std::size_t total = 1;
  for (Eigen::Index d = 0; d < p; ++d) total *= m;

  detail::CompensatedSum sum;
  Vector z(p);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    double weight = 1.0;
    for (Eigen::Index d = 0; d < p; ++d) {
      const auto idx = rem % m;
      rem /= m;
      z(d) = u[idx];
      weight *= jac[idx];
    }
    const Vector theta = post.center() + c * z;
    sum.add(weight * std::exp(posterior_logpdf(theta, post) + log_det_c));
  }
  return sum.value();
}

}  // namespace ellshrink
