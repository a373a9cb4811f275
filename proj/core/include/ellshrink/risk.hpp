#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ellshrink/elliptical.hpp"
#include "ellshrink/estimators.hpp"
#include "ellshrink/statcore.hpp"

namespace ellshrink {

// Invariant quadratic loss N (estimate - theta)^T Sigma^{-1} (estimate - theta).
double loss(const Vector& estimate, const Vector& theta, const SpdMatrix& sigma, Eigen::Index n_obs);

// Location model Y_i = theta + eps_i, i = 1..N, with eps drawn from the
// elliptical law given by `mixing` and `sigma`. Requires N > p >= 3.
struct Scenario {
  Scenario(int n_obs, SpdMatrix sigma, Vector theta, MixingMeasure mixing, std::string label = {});

  int p() const noexcept { return static_cast<int>(sigma.dim()); }

  int n_obs;
  SpdMatrix sigma;
  Vector theta;
  MixingMeasure mixing;
  std::string label;
};

struct RiskEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  std::string estimator;
  std::string scenario;
};

struct MonteCarloOptions {
  // Worker threads; results do not depend on this value.
  unsigned threads = 1;
};

// Replicate k draws its dataset from substream(seed, k): one mixing scale
// t, then N rows theta + eps_i with eps_i ~ N(0, Sigma / t).
Dataset draw_dataset(const Scenario& scn, std::uint64_t seed, std::uint64_t replicate);

// Monte Carlo risk with reps >= 100 replicates. Requires a probability
// mixing measure; bit-reproducible for fixed inputs and any thread count.
RiskEstimate mc_risk(const Scenario& scn, const EstimatorSpec& est, std::int64_t reps, std::uint64_t seed,
                     const MonteCarloOptions& opts = {});

// Risk under a (possibly signed) DiscreteAtoms mixing measure, combined
// as sum_k w_k R_k from conditional runs at each atom. Every atom reuses
// the same seed. SE is sqrt(sum_k w_k^2 SE_k^2).
RiskEstimate mc_risk_signed(const Scenario& scn, const EstimatorSpec& est, std::int64_t reps, std::uint64_t seed,
                            const MonteCarloOptions& opts = {});

// Common-random-numbers estimate of R(a) - R(b): both estimators see the
// same dataset in every replicate and the SE is that of the differences.
RiskEstimate paired_risk_difference(const Scenario& scn, const EstimatorSpec& a, const EstimatorSpec& b,
                                    std::int64_t reps, std::uint64_t seed, const MonteCarloOptions& opts = {});

// Paired difference under a (possibly signed) DiscreteAtoms measure,
// combined across atoms the same way as mc_risk_signed.
RiskEstimate paired_risk_difference_signed(const Scenario& scn, const EstimatorSpec& a, const EstimatorSpec& b,
                                           std::int64_t reps, std::uint64_t seed,
                                           const MonteCarloOptions& opts = {});

// Sample mean and standard error of a sequence, compensated summation.
struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
};
MeanSe mean_and_se(const std::vector<double>& values);

// Stein-type identities for x ~ N(theta, alpha Sigma) independent of
// S ~ Wishart(beta Sigma, n), with F = x^T S^{-1} x and q = x^T Sigma^{-1} x:
//
//   cross:      E[x^T Sigma^{-1} (x - theta) r(F) / F]
//                 = beta alpha (n-p+1) {(p-2) E[r(F)/q] + 2 E[r'(F)]}
//   quadratic:  E[q r^2(F) / F^2] = beta^2 (n-p+1)(n-p+3) E[r^2(F)/q]
//
// Left and right sides are estimated from independent draws.
struct SteinIdentityParams {
  double alpha = 0.05;
  double beta = 1.0;
  int dof = 19;
  SpdMatrix sigma = SpdMatrix::identity(5);
  Vector theta = Vector::Zero(5);
  ShrinkageFunction r = ShrinkageFunction::constant(1.0);
  std::int64_t reps = 200000;
  std::uint64_t seed = 1;
  // Multiplies both right-hand sides; 1 leaves the identities untouched.
  double perturb = 1.0;
  MonteCarloOptions mc;
};

struct IdentityCheck {
  std::string name;
  MeanSe lhs;
  MeanSe rhs;
  double z = 0.0;  // (lhs - rhs) / combined SE
  bool pass = false;
};

struct SteinIdentityReport {
  IdentityCheck cross;
  IdentityCheck quadratic;
  // Diagnostic only: the cross-term left side against the Stein identity
  // taken conditionally on S, alpha E[(p-2) r(F)/F + 2 r'(F)]. Not part of
  // passed().
  IdentityCheck cross_conditional;

  bool passed() const noexcept { return cross.pass && quadratic.pass; }
};

SteinIdentityReport stein_identity_check(const SteinIdentityParams& params);

// G_r(w) = -[r(w) - (p-2)]^2 / ((n-p-1) w) + 4 r'(w); requires n > p + 1.
double g_r(double omega, const ShrinkageFunction& r, int n, int p);

// CSV rows: scenario,estimator,p,N,mixing,theta_norm,reps,seed,risk,std_error
struct RiskRow {
  RiskEstimate estimate;
  int p = 0;
  int n_obs = 0;
  std::string mixing;
  double theta_norm = 0.0;
};

std::string risk_csv_header();
std::string format_risk_csv_row(const RiskRow& row);
// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);
// Decimal with 17 significant digits, as used by the CSV writers.
std::string format_decimal(double v);

}  // namespace ellshrink
