#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>

#include "ellshrink/elliptical.hpp"
#include "ellshrink/error.hpp"
#include "oracles.hpp"

using namespace ellshrink;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ellshrink::Error");
  return ErrorCode::InvalidParameter;
}

void check_second_moment(const Matrix& rows, const Matrix& target) {
  const auto m = oracle::second_moment(rows);
  for (Eigen::Index i = 0; i < target.rows(); ++i)
    for (Eigen::Index j = 0; j < target.cols(); ++j) {
      INFO("entry (" << i << "," << j << "): " << m.mean(i, j) << " vs " << target(i, j) << ", se "
                     << m.se(i, j));
      CHECK(std::abs(m.mean(i, j) - target(i, j)) <= 3.0 * m.se(i, j));
    }
}

// One row per replicate, each from its own substream, so every row has its own t.
Matrix independent_rows(const MixingMeasure& w, const SpdMatrix& sigma, int count, std::uint64_t seed) {
  Matrix rows(count, sigma.dim());
  for (int k = 0; k < count; ++k) {
    auto rng = substream(seed, static_cast<std::uint64_t>(k));
    rows.row(k) = sample_errors(w, sigma, 1, rng).row(0);
  }
  return rows;
}

}  // namespace

TEST_CASE("mixing measure construction") {
  const auto g = MixingMeasure::gaussian();
  CHECK(g.is_probability());
  CHECK(std::holds_alternative<PointMass>(g.kind()));

  const auto t6 = MixingMeasure::gamma_rate(3, 3);
  CHECK(t6.is_probability());
  const auto t6b = make_mixing_measure("t:6");
  CHECK(std::get<GammaRate>(t6b.kind()).shape == 3.0);
  CHECK(std::get<GammaRate>(t6b.kind()).rate == 3.0);

  const auto signed_w = MixingMeasure::atoms({{1, 1.3}, {2, -0.3}});
  CHECK_FALSE(signed_w.is_probability());
  CHECK(make_mixing_measure("atoms:1=1.3,2=-0.3").label() == signed_w.label());
  CHECK(make_mixing_measure(signed_w.label()).label() == signed_w.label());
}

TEST_CASE("mixing measure validation") {
  CHECK(code_of([] { MixingMeasure::point_mass(0); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { MixingMeasure::gamma_rate(1.0, 2.0); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { MixingMeasure::gamma_rate(2.0, 0.0); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { MixingMeasure::student_t(2.0); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { MixingMeasure::atoms({{1, 0.5}, {2, 0.4}}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { MixingMeasure::atoms({{1, 0.5}, {1, 0.5}}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { MixingMeasure::atoms({{-1, 0.5}, {1, 0.5}}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { make_mixing_measure("laplace"); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { make_mixing_measure("atoms:1"); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("inverse scale mean") {
  CHECK(inverse_scale_mean(MixingMeasure::gaussian()) == 1.0);
  CHECK(inverse_scale_mean(MixingMeasure::atoms({{0.5, 0.5}, {2, 0.5}})) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(inverse_scale_mean(MixingMeasure::atoms({{1, 1.3}, {2, -0.3}})) == doctest::Approx(1.15).epsilon(1e-15));

  // Quadrature of t^{-1} against the Gamma(shape 3, rate 3) density.
  const boost::math::gamma_distribution<double> law(3.0, 1.0 / 3.0);
  boost::math::quadrature::exp_sinh<double> integrator;
  const double m1 = integrator.integrate([&](double t) { return boost::math::pdf(law, t) / t; });
  CHECK(m1 == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(inverse_scale_mean(MixingMeasure::gamma_rate(3, 3)) == doctest::Approx(m1).epsilon(1e-12));
  CHECK(inverse_scale_mean(MixingMeasure::student_t(6)) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("gaussian rows have covariance sigma") {
  auto rng = substream(101, 0);
  const auto rows = sample_errors(MixingMeasure::gaussian(), SpdMatrix::identity(2), 100000, rng);
  check_second_moment(rows, Matrix::Identity(2, 2));
}

TEST_CASE("mixture covariance is m1 times sigma") {
  const SpdMatrix sigma = spd_ar1(2, 0.5);
  SUBCASE("gamma") {
    const auto rows = independent_rows(MixingMeasure::gamma_rate(3, 3), SpdMatrix::identity(2), 100000, 202);
    check_second_moment(rows, 1.5 * Matrix::Identity(2, 2));
  }
  SUBCASE("two atoms") {
    const auto w = MixingMeasure::atoms({{0.5, 0.5}, {2, 0.5}});
    const auto rows = independent_rows(w, sigma, 100000, 203);
    check_second_moment(rows, inverse_scale_mean(w) * sigma.matrix());
  }
}

TEST_CASE("rows are conditionally normal given the scale") {
  const SpdMatrix sigma = spd_ar1(3, -0.4);
  auto rng = substream(303, 0);
  const auto rows = sample_errors_given_scale(4.0, sigma, 100000, rng);
  check_second_moment(rows, sigma.matrix() / 4.0);
}

TEST_CASE("one scale is shared across a dataset") {
  // With a single t per dataset, the row norms of a t:3 dataset are far
  // more alike than rows drawn with separate scales.
  const auto w = MixingMeasure::student_t(3);
  auto rng = substream(404, 0);
  const Matrix many = sample_errors(w, SpdMatrix::identity(2), 20000, rng);
  const double mean_sq = many.rowwise().squaredNorm().mean();
  // Given t, E|e|^2 = 2/t, so the sample average pins 2/t to within a few percent.
  auto probe = substream(404, 0);
  const double t = sample_mixing_scale(w, probe);
  CHECK(mean_sq == doctest::Approx(2.0 / t).epsilon(0.05));
}

TEST_CASE("t:6 Mahalanobis norms follow the F law") {
  const int p = 3, count = 20000;
  const SpdMatrix sigma = spd_ar1(p, 0.3);
  const auto rows = independent_rows(MixingMeasure::student_t(6), sigma, count, 505);
  std::vector<double> f(count);
  for (int k = 0; k < count; ++k) f[k] = sigma.quad_form_inv(rows.row(k).transpose()) / p;
  std::sort(f.begin(), f.end());
  const boost::math::fisher_f_distribution<double> law(p, 6);
  double d = 0.0;
  for (int k = 0; k < count; ++k) {
    const double c = boost::math::cdf(law, f[k]);
    d = std::max({d, std::abs(c - static_cast<double>(k) / count), std::abs(c - static_cast<double>(k + 1) / count)});
  }
  // Kolmogorov-Smirnov critical value at the 1% level.
  CHECK(d < 1.63 / std::sqrt(static_cast<double>(count)));
}

TEST_CASE("signed measures are never sampled") {
  const auto w = MixingMeasure::atoms({{1, 1.3}, {2, -0.3}});
  auto rng = substream(1, 0);
  CHECK(code_of([&] { sample_mixing_scale(w, rng); }) == ErrorCode::SignedMeasureSampling);
  CHECK(code_of([&] { sample_errors(w, SpdMatrix::identity(2), 7, rng); }) == ErrorCode::SignedMeasureSampling);
}

TEST_CASE("wishart mean") {
  auto check_mean = [](const SpdMatrix& scale, Eigen::Index dof, int draws, std::uint64_t seed) {
    const auto p = scale.dim();
    Matrix sum = Matrix::Zero(p, p), sum2 = Matrix::Zero(p, p);
    for (int k = 0; k < draws; ++k) {
      auto rng = substream(seed, static_cast<std::uint64_t>(k));
      const Matrix w = sample_wishart(scale, dof, rng).matrix() / static_cast<double>(dof);
      sum += w;
      sum2 += w.cwiseProduct(w);
    }
    const Matrix mean = sum / draws;
    const Matrix se = ((sum2 / draws - mean.cwiseProduct(mean)) / (draws - 1.0)).cwiseSqrt();
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < p; ++j) CHECK(std::abs(mean(i, j) - scale.matrix()(i, j)) <= 3.0 * se(i, j));
  };
  check_mean(SpdMatrix::identity(3), 10, 100000, 606);
  check_mean(spd_diagonal({2.0, 2.0}), 5, 100000, 607);
  check_mean(spd_ar1(3, 0.6), 4, 100000, 608);
}

TEST_CASE("wishart draws are positive definite at the smallest dof") {
  for (int k = 0; k < 2000; ++k) {
    auto rng = substream(707, static_cast<std::uint64_t>(k));
    const auto w = sample_wishart(SpdMatrix::identity(2), 2, rng);
    REQUIRE(w.matrix().determinant() > 0.0);
  }
  auto rng = substream(707, 0);
  CHECK(code_of([&] { sample_wishart(SpdMatrix::identity(2), 1, rng); }) == ErrorCode::DofTooSmall);
}
