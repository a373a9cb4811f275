#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ellshrink/rng.hpp"
#include "ellshrink/statcore.hpp"

namespace ellshrink {

// Mixing measures W on (0, inf). A draw t ~ W scales the conditional
// covariance of an error vector to Sigma / t.

struct PointMass {
  double t0;
};

// Gamma law in (shape, rate) form. GammaRate(nu/2, nu/2) gives the
// multivariate t with nu degrees of freedom.
struct GammaRate {
  double shape;
  double rate;
};

struct Atom {
  double t;
  double weight;
};

// Finite list of atoms. Weights sum to one but may be negative, in which
// case the measure is signed and only usable through per-atom evaluation.
struct DiscreteAtoms {
  std::vector<Atom> atoms;
};

class MixingMeasure {
 public:
  using Kind = std::variant<PointMass, GammaRate, DiscreteAtoms>;

  // Validating constructors; all throw InvalidParameter on bad input.
  static MixingMeasure point_mass(double t0);
  static MixingMeasure gamma_rate(double shape, double rate);
  static MixingMeasure student_t(double nu);
  static MixingMeasure atoms(std::vector<Atom> atoms);
  static MixingMeasure gaussian() { return point_mass(1.0); }

  const Kind& kind() const noexcept { return kind_; }
  bool is_probability() const noexcept { return is_probability_; }
  // The grammar string that reproduces this measure.
  const std::string& label() const noexcept { return label_; }

 private:
  MixingMeasure(Kind kind, bool is_probability, std::string label);

  Kind kind_;
  bool is_probability_;
  std::string label_;
};

// Grammar: `gaussian` | `t:<nu>` (nu > 2) | `atoms:<t1>=<w1>,<t2>=<w2>,...`
MixingMeasure make_mixing_measure(std::string_view spec);

// m1 = integral of t^{-1} W(dt); Cov(eps_i) = m1 * Sigma.
double inverse_scale_mean(const MixingMeasure& w);

// One draw t ~ W. Throws SignedMeasureSampling for a signed measure.
double sample_mixing_scale(const MixingMeasure& w, Substream& rng);

// N x p matrix of rows distributed N(0, Sigma / t) for a fixed scale t.
Matrix sample_errors_given_scale(double t, const SpdMatrix& sigma, Eigen::Index n, Substream& rng);

// Two-stage draw: a single t ~ W shared by all N rows, then the rows
// conditionally normal with covariance Sigma / t.
Matrix sample_errors(const MixingMeasure& w, const SpdMatrix& sigma, Eigen::Index n, Substream& rng);

// Wishart(scale, dof) via the Bartlett factor: chi-distributed diagonal,
// standard normal strictly-lower entries. Throws DofTooSmall if dof < p.
SpdMatrix sample_wishart(const SpdMatrix& scale, Eigen::Index dof, Substream& rng);

}  // namespace ellshrink
