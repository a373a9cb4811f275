#include "ellshrink/elliptical.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "ellshrink/error.hpp"
#include "text.hpp"

namespace ellshrink {

namespace {

constexpr double kWeightSumTol = 1e-12;

std::string format_number(double v) { return fmt::format("{}", v); }

}  // namespace

MixingMeasure::MixingMeasure(Kind kind, bool is_probability, std::string label)
    : kind_(std::move(kind)), is_probability_(is_probability), label_(std::move(label)) {}

MixingMeasure MixingMeasure::point_mass(double t0) {
  if (!(t0 > 0.0) || !std::isfinite(t0)) {
    throw Error(ErrorCode::InvalidParameter, fmt::format("point mass location must be positive, got {}", t0));
  }
  std::string label = t0 == 1.0 ? "gaussian" : fmt::format("atoms:{}=1", format_number(t0));
  return MixingMeasure(PointMass{t0}, true, std::move(label));
}

MixingMeasure MixingMeasure::gamma_rate(double shape, double rate) {
  if (!(shape > 1.0) || !std::isfinite(shape)) {
    throw Error(ErrorCode::InvalidParameter,
                fmt::format("gamma mixing needs shape > 1 for a finite E[1/t], got {}", shape));
  }
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::InvalidParameter, fmt::format("gamma mixing needs rate > 0, got {}", rate));
  }
  std::string label = shape == rate ? fmt::format("t:{}", format_number(2.0 * shape))
                                    : fmt::format("gamma:{},{}", format_number(shape), format_number(rate));
  return MixingMeasure(GammaRate{shape, rate}, true, std::move(label));
}

MixingMeasure MixingMeasure::student_t(double nu) {
  if (!(nu > 2.0)) {
    throw Error(ErrorCode::InvalidParameter, fmt::format("t mixing needs nu > 2, got {}", nu));
  }
  return gamma_rate(0.5 * nu, 0.5 * nu);
}

MixingMeasure MixingMeasure::atoms(std::vector<Atom> atoms) {
  if (atoms.empty()) throw Error(ErrorCode::InvalidParameter, "atom list is empty");
  double total = 0.0;
  bool nonnegative = true;
  for (const auto& a : atoms) {
    if (!(a.t > 0.0) || !std::isfinite(a.t)) {
      throw Error(ErrorCode::InvalidParameter, fmt::format("atom location must be positive, got {}", a.t));
    }
    if (!std::isfinite(a.weight)) throw Error(ErrorCode::InvalidParameter, "atom weight is not finite");
    total += a.weight;
    nonnegative = nonnegative && a.weight >= 0.0;
  }
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t j = i + 1; j < atoms.size(); ++j)
      if (atoms[i].t == atoms[j].t) {
        throw Error(ErrorCode::InvalidParameter, fmt::format("duplicate atom location {}", atoms[i].t));
      }
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw Error(ErrorCode::InvalidParameter, fmt::format("atom weights sum to {:.17g}, expected 1", total));
  }
  std::string label = "atoms:";
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) label += ',';
    label += format_number(atoms[i].t) + "=" + format_number(atoms[i].weight);
  }
  return MixingMeasure(DiscreteAtoms{std::move(atoms)}, nonnegative, std::move(label));
}

MixingMeasure make_mixing_measure(std::string_view spec) {
  spec = detail::trim(spec);
  if (spec == "gaussian") return MixingMeasure::gaussian();
  if (detail::starts_with(spec, "t:")) {
    auto nu = detail::parse_double(spec.substr(2));
    if (!nu) throw Error(ErrorCode::InvalidParameter, fmt::format("bad degrees of freedom in '{}'", spec));
    return MixingMeasure::student_t(*nu);
  }
  if (detail::starts_with(spec, "atoms:")) {
    std::vector<Atom> atoms;
    for (auto item : detail::split(spec.substr(6), ',')) {
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorCode::InvalidParameter, fmt::format("atom '{}' is not of the form t=w", item));
      }
      auto t = detail::parse_double(item.substr(0, eq));
      auto w = detail::parse_double(item.substr(eq + 1));
      if (!t || !w) throw Error(ErrorCode::InvalidParameter, fmt::format("atom '{}' is not numeric", item));
      atoms.push_back({*t, *w});
    }
    return MixingMeasure::atoms(std::move(atoms));
  }
  throw Error(ErrorCode::InvalidParameter, fmt::format("unknown mixing spec '{}'", spec));
}

double inverse_scale_mean(const MixingMeasure& w) {
  struct Visitor {
    double operator()(const PointMass& m) const { return 1.0 / m.t0; }
    double operator()(const GammaRate& g) const {
      if (!(g.shape > 1.0)) {
        throw Error(ErrorCode::DivergentMoment, fmt::format("E[1/t] diverges for gamma shape {}", g.shape));
      }
      return g.rate / (g.shape - 1.0);
    }
    double operator()(const DiscreteAtoms& d) const {
      double m1 = 0.0;
      for (const auto& a : d.atoms) m1 += a.weight / a.t;
      return m1;
    }
  };
  return std::visit(Visitor{}, w.kind());
}

double sample_mixing_scale(const MixingMeasure& w, Substream& rng) {
  if (!w.is_probability()) {
    throw Error(ErrorCode::SignedMeasureSampling,
                fmt::format("'{}' has negative weights and cannot be sampled", w.label()));
  }
  struct Visitor {
    Substream& rng;
    double operator()(const PointMass& m) const { return m.t0; }
    double operator()(const GammaRate& g) const {
      std::gamma_distribution<double> gamma(g.shape, 1.0 / g.rate);
      return gamma(rng);
    }
    double operator()(const DiscreteAtoms& d) const {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      const double u = unif(rng);
      double cum = 0.0;
      for (const auto& a : d.atoms) {
        cum += a.weight;
        if (u < cum) return a.t;
      }
      // Round-off can leave the cumulative sum a hair under 1.
      for (auto it = d.atoms.rbegin(); it != d.atoms.rend(); ++it)
        if (it->weight > 0.0) return it->t;
      return d.atoms.back().t;
    }
  };
  return std::visit(Visitor{rng}, w.kind());
}

Matrix sample_errors_given_scale(double t, const SpdMatrix& sigma, Eigen::Index n, Substream& rng) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "need at least one error vector");
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidParameter, fmt::format("scale t must be positive, got {}", t));
  const Eigen::Index p = sigma.dim();
  std::normal_distribution<double> normal;
  Matrix z(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) z(i, j) = normal(rng);
  // Row i becomes (L z_i)^T / sqrt(t).
  Matrix out = z * sigma.cholesky().transpose();
  out /= std::sqrt(t);
  return out;
}

Matrix sample_errors(const MixingMeasure& w, const SpdMatrix& sigma, Eigen::Index n, Substream& rng) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "need at least one error vector");
  const double t = sample_mixing_scale(w, rng);
  return sample_errors_given_scale(t, sigma, n, rng);
}

SpdMatrix sample_wishart(const SpdMatrix& scale, Eigen::Index dof, Substream& rng) {
  const Eigen::Index p = scale.dim();
  if (dof < p) {
    throw Error(ErrorCode::DofTooSmall, fmt::format("Wishart needs dof >= p, got dof = {}, p = {}", dof, p));
  }
  std::normal_distribution<double> normal;
  Matrix a = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    std::chi_squared_distribution<double> chi2(static_cast<double>(dof - i));
    a(i, i) = std::sqrt(chi2(rng));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = normal(rng);
  }
  const Matrix la = scale.cholesky() * a;
  Matrix w = la * la.transpose();
  return SpdMatrix(0.5 * (w + w.transpose()));
}

}  // namespace ellshrink
