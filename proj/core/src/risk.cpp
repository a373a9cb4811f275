#include "ellshrink/risk.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "ellshrink/error.hpp"
#include "parallel.hpp"

namespace ellshrink {

namespace {

constexpr std::int64_t kMinReps = 100;
constexpr double kBand = 3.0;

void check_reps(std::int64_t reps) {
  if (reps < kMinReps) {
    throw Error(ErrorCode::InvalidParameter, fmt::format("need at least {} replicates, got {}", kMinReps, reps));
  }
}

RiskEstimate make_estimate(const MeanSe& m, std::int64_t reps, std::uint64_t seed, std::string estimator,
                           std::string scenario) {
  return RiskEstimate{m.mean, m.std_error, reps, seed, std::move(estimator), std::move(scenario)};
}

// Re-tags a library error with the replicate that raised it.
[[noreturn]] void rethrow_with_replicate(const Error& e, std::int64_t k) {
  throw Error(e.code(), fmt::format("replicate {}: {}", k, e.what()));
}

}  // namespace

double loss(const Vector& estimate, const Vector& theta, const SpdMatrix& sigma, Eigen::Index n_obs) {
  if (estimate.size() != theta.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("estimate has dimension {}, theta has {}", estimate.size(), theta.size()));
  }
  return static_cast<double>(n_obs) * sigma.quad_form_inv(estimate - theta);
}

Scenario::Scenario(int n_obs_, SpdMatrix sigma_, Vector theta_, MixingMeasure mixing_, std::string label_)
    : n_obs(n_obs_), sigma(std::move(sigma_)), theta(std::move(theta_)), mixing(std::move(mixing_)),
      label(std::move(label_)) {
  if (p() < 3) throw Error(ErrorCode::InvalidParameter, fmt::format("scenario needs p >= 3, got {}", p()));
  if (n_obs <= p()) {
    throw Error(ErrorCode::InvalidParameter, fmt::format("scenario needs N > p, got N = {}, p = {}", n_obs, p()));
  }
  if (theta.size() != sigma.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("theta has dimension {}, sigma has {}", theta.size(), sigma.dim()));
  }
  if (label.empty()) {
    label = fmt::format("p{}_N{}_{}_theta{}", p(), n_obs, mixing.label(), format_decimal(theta.norm()));
  }
}

Dataset draw_dataset(const Scenario& scn, std::uint64_t seed, std::uint64_t replicate) {
  auto rng = substream(seed, replicate);
  Matrix rows = sample_errors(scn.mixing, scn.sigma, scn.n_obs, rng);
  rows.rowwise() += scn.theta.transpose();
  return Dataset(std::move(rows));
}

MeanSe mean_and_se(const std::vector<double>& values) {
  const auto n = values.size();
  if (n == 0) return {};
  detail::CompensatedSum sum;
  for (double v : values) sum.add(v);
  const double mean = sum.value() / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  detail::CompensatedSum ss;
  for (double v : values) ss.add((v - mean) * (v - mean));
  const double var = ss.value() / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

RiskEstimate mc_risk(const Scenario& scn, const EstimatorSpec& est, std::int64_t reps, std::uint64_t seed,
                     const MonteCarloOptions& opts) {
  check_reps(reps);
  if (!scn.mixing.is_probability()) {
    throw Error(ErrorCode::SignedMeasureSampling,
                fmt::format("'{}' is a signed measure; use mc_risk_signed", scn.mixing.label()));
  }
  std::vector<double> losses(static_cast<std::size_t>(reps));
  detail::for_each_replicate(reps, opts.threads, [&](std::int64_t k) {
    try {
      const auto stats = sufficient_stats(draw_dataset(scn, seed, static_cast<std::uint64_t>(k)));
      losses[static_cast<std::size_t>(k)] = loss(apply_estimator(est, stats), scn.theta, scn.sigma, scn.n_obs);
    } catch (const Error& e) {
      rethrow_with_replicate(e, k);
    }
  });
  return make_estimate(mean_and_se(losses), reps, seed, est.label, scn.label);
}

namespace {

const DiscreteAtoms& require_atoms(const Scenario& scn) {
  const auto* atoms = std::get_if<DiscreteAtoms>(&scn.mixing.kind());
  if (atoms == nullptr) {
    throw Error(ErrorCode::InvalidParameter,
                fmt::format("signed-measure risk needs an atoms: mixing measure, got '{}'", scn.mixing.label()));
  }
  return *atoms;
}

// sum_k w_k R_k over atoms, each R_k from a conditional run at t_k.
template <class Run>
RiskEstimate combine_over_atoms(const Scenario& scn, Run&& run) {
  detail::CompensatedSum value;
  detail::CompensatedSum variance;
  RiskEstimate last;
  for (const auto& atom : require_atoms(scn).atoms) {
    const Scenario conditional(scn.n_obs, scn.sigma, scn.theta, MixingMeasure::point_mass(atom.t), scn.label);
    last = run(conditional);
    value.add(atom.weight * last.value);
    variance.add(atom.weight * atom.weight * last.std_error * last.std_error);
  }
  last.value = value.value();
  last.std_error = std::sqrt(variance.value());
  return last;
}

}  // namespace

RiskEstimate mc_risk_signed(const Scenario& scn, const EstimatorSpec& est, std::int64_t reps, std::uint64_t seed,
                            const MonteCarloOptions& opts) {
  return combine_over_atoms(scn, [&](const Scenario& c) { return mc_risk(c, est, reps, seed, opts); });
}

RiskEstimate paired_risk_difference_signed(const Scenario& scn, const EstimatorSpec& a, const EstimatorSpec& b,
                                           std::int64_t reps, std::uint64_t seed, const MonteCarloOptions& opts) {
  return combine_over_atoms(scn,
                            [&](const Scenario& c) { return paired_risk_difference(c, a, b, reps, seed, opts); });
}

RiskEstimate paired_risk_difference(const Scenario& scn, const EstimatorSpec& a, const EstimatorSpec& b,
                                    std::int64_t reps, std::uint64_t seed, const MonteCarloOptions& opts) {
  check_reps(reps);
  if (!scn.mixing.is_probability()) {
    throw Error(ErrorCode::SignedMeasureSampling,
                fmt::format("'{}' is a signed measure and cannot drive a paired comparison", scn.mixing.label()));
  }
  std::vector<double> diffs(static_cast<std::size_t>(reps));
  detail::for_each_replicate(reps, opts.threads, [&](std::int64_t k) {
    try {
      const auto stats = sufficient_stats(draw_dataset(scn, seed, static_cast<std::uint64_t>(k)));
      const double la = loss(apply_estimator(a, stats), scn.theta, scn.sigma, scn.n_obs);
      const double lb = loss(apply_estimator(b, stats), scn.theta, scn.sigma, scn.n_obs);
      diffs[static_cast<std::size_t>(k)] = la - lb;
    } catch (const Error& e) {
      rethrow_with_replicate(e, k);
    }
  });
  return make_estimate(mean_and_se(diffs), reps, seed, a.label + " - " + b.label, scn.label);
}

namespace {

IdentityCheck compare(std::string name, const std::vector<double>& lhs, const std::vector<double>& rhs) {
  IdentityCheck c;
  c.name = std::move(name);
  c.lhs = mean_and_se(lhs);
  c.rhs = mean_and_se(rhs);
  const double se = std::hypot(c.lhs.std_error, c.rhs.std_error);
  const double diff = c.lhs.mean - c.rhs.mean;
  c.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
  c.pass = std::abs(diff) <= kBand * se;
  return c;
}

}  // namespace

SteinIdentityReport stein_identity_check(const SteinIdentityParams& prm) {
  const auto p = prm.sigma.dim();
  if (p < 3) throw Error(ErrorCode::InvalidParameter, fmt::format("identity check needs p >= 3, got {}", p));
  if (prm.dof < p) {
    throw Error(ErrorCode::DofTooSmall, fmt::format("identity check needs n >= p, got n = {}, p = {}", prm.dof, p));
  }
  if (prm.theta.size() != p) {
    throw Error(ErrorCode::DimensionMismatch, fmt::format("theta has dimension {}, sigma has {}", prm.theta.size(), p));
  }
  if (!(prm.alpha > 0.0) || !(prm.beta > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "alpha and beta must be positive");
  }
  check_reps(prm.reps);

  const double m = static_cast<double>(prm.dof - p + 1);
  const double pm2 = static_cast<double>(p - 2);
  const double cross_const = prm.perturb * prm.beta * prm.alpha * m;
  const double quad_const = prm.perturb * prm.beta * prm.beta * m * (m + 2.0);
  const SpdMatrix wishart_scale(prm.beta * prm.sigma.matrix());
  const double sqrt_alpha = std::sqrt(prm.alpha);

  struct Draw {
    Vector x;
    double f;  // x^T S^{-1} x
    double q;  // x^T Sigma^{-1} x
  };
  auto draw = [&](Substream& rng) {
    std::normal_distribution<double> normal;
    Vector z(p);
    for (Eigen::Index i = 0; i < p; ++i) z(i) = normal(rng);
    Vector x = prm.theta + sqrt_alpha * (prm.sigma.cholesky() * z);
    const SpdMatrix s = sample_wishart(wishart_scale, prm.dof, rng);
    const double f = s.quad_form_inv(x);
    const double q = prm.sigma.quad_form_inv(x);
    return Draw{std::move(x), f, q};
  };

  const auto n = static_cast<std::size_t>(prm.reps);
  std::vector<double> cross_l(n), cross_r(n), quad_l(n), quad_r(n), cond_r(n);
  detail::for_each_replicate(prm.reps, prm.mc.threads, [&](std::int64_t k) {
    const auto i = static_cast<std::size_t>(k);
    {
      auto rng = substream(prm.seed, static_cast<std::uint64_t>(k), 0);
      const auto d = draw(rng);
      const double rf = prm.r(d.f);
      const double cross = prm.sigma.solve(d.x).dot(d.x - prm.theta);
      cross_l[i] = cross * rf / d.f;
      quad_l[i] = d.q * rf * rf / (d.f * d.f);
    }
    {
      auto rng = substream(prm.seed, static_cast<std::uint64_t>(k), 1);
      const auto d = draw(rng);
      const double rf = prm.r(d.f);
      const double drf = prm.r.derivative(d.f);
      cross_r[i] = cross_const * (pm2 * rf / d.q + 2.0 * drf);
      quad_r[i] = quad_const * rf * rf / d.q;
      cond_r[i] = prm.perturb * prm.alpha * (pm2 * rf / d.f + 2.0 * drf);
    }
  });

  SteinIdentityReport report;
  report.cross = compare("cross", cross_l, cross_r);
  report.quadratic = compare("quadratic", quad_l, quad_r);
  report.cross_conditional = compare("cross_conditional", cross_l, cond_r);
  return report;
}

double g_r(double omega, const ShrinkageFunction& r, int n, int p) {
  if (n <= p + 1) throw Error(ErrorCode::InvalidParameter, fmt::format("G_r needs n > p + 1, got n = {}, p = {}", n, p));
  if (!(omega > 0.0)) throw Error(ErrorCode::InvalidParameter, fmt::format("G_r needs omega > 0, got {}", omega));
  const double gap = r(omega) - (p - 2);
  return -gap * gap / ((n - p - 1) * omega) + 4.0 * r.derivative(omega);
}

std::string format_decimal(double v) { return fmt::format("{:.17g}", v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string risk_csv_header() { return "scenario,estimator,p,N,mixing,theta_norm,reps,seed,risk,std_error"; }

std::string format_risk_csv_row(const RiskRow& row) {
  const auto& e = row.estimate;
  return fmt::format("{},{},{},{},{},{},{},{},{},{}", csv_field(e.scenario), csv_field(e.estimator), row.p,
                     row.n_obs, csv_field(row.mixing), format_decimal(row.theta_norm), e.reps, e.seed,
                     format_decimal(e.value), format_decimal(e.std_error));
}

}  // namespace ellshrink
