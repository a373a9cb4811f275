// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is 0 only if every selected criterion passes.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ellshrink/conditions.hpp"
#include "ellshrink/experiment.hpp"
#include "ellshrink/posterior.hpp"
#include "ellshrink/risk.hpp"

using namespace ellshrink;

namespace {

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;

  void require(bool ok, std::string line) {
    pass = pass && ok;
    details.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", std::move(line)));
  }
};

constexpr std::int64_t kReps = 200000;

Scenario gaussian_scenario(int p, int n, Vector theta = {}) {
  if (theta.size() == 0) theta = Vector::Zero(p);
  return Scenario(n, SpdMatrix::identity(p), std::move(theta), MixingMeasure::gaussian());
}

std::string describe(const RiskEstimate& r, double target) {
  return fmt::format("{:.6f} +- {:.6f} vs {} (z = {:+.2f})", r.value, r.std_error, target,
                     (r.value - target) / r.std_error);
}

Outcome gaussian_calibration() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const auto r = mc_risk(gaussian_scenario(5, 20), EstimatorSpec::mean(), kReps, 1, {1});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(std::abs(r.value - 5.0) <= 3.0 * r.std_error, "risk " + describe(r, 5.0));
  o.require(secs < 30.0, fmt::format("single-threaded runtime {:.2f} s (< 30 s)", secs));
  o.summary = "gaussian mean risk = p";
  return o;
}

Outcome elliptical_calibration() {
  Outcome o;
  const Scenario scn(20, SpdMatrix::identity(5), Vector::Zero(5), MixingMeasure::student_t(6));
  const auto r = mc_risk(scn, EstimatorSpec::mean(), kReps, 2);
  o.require(std::abs(r.value - 7.5) <= 3.0 * r.std_error, "risk " + describe(r, 7.5));
  o.summary = "t:6 mean risk = p m1";
  return o;
}

Outcome shrinkage_dominance() {
  Outcome o;
  const auto r = alam_thompson_r(5, 20, 1.0);
  const auto at = EstimatorSpec::baranchik(r);
  for (double norm : {0.0, 1.0, 2.0, 5.0, 10.0}) {
    Vector theta = Vector::Zero(5);
    theta(0) = norm;
    const auto d = paired_risk_difference(gaussian_scenario(5, 20, theta), EstimatorSpec::mean(), at, kReps, 3);
    const double z = d.value / d.std_error;
    if (norm == 0.0) {
      o.require(z >= 5.0, fmt::format("|theta| = 0: R(mean) - R(at) = {:.6g} +- {:.3g}, z = {:.1f} (>= 5)", d.value,
                                      d.std_error, z));
    } else {
      o.require(z >= -3.0, fmt::format("|theta| = {}: R(mean) - R(at) = {:.6g} +- {:.3g}, z = {:.1f} (>= -3)", norm,
                                       d.value, d.std_error, z));
    }
  }
  // An r that clears the minimax conditions with margin must not lose to the mean.
  const auto mm = check_minimax_conditions(r, 5, 20);
  const double bound = 2.0 * 3.0 / (20.0 * 17.0);
  const double sup = r(1e12);
  o.require(!mm.any_fail() && sup < bound,
            fmt::format("minimax conditions hold with margin (sup r = {:.6g} < {:.6g})", sup, bound));
  o.summary = "alam-thompson beats the mean at the origin, never loses";
  return o;
}

Outcome stein_identities() {
  Outcome o;
  struct Case {
    std::string name;
    ShrinkageFunction r;
    double theta1;
  };
  const std::vector<Case> cases{{"r = 1, theta = 0", ShrinkageFunction::constant(1.0), 0.0},
                                {"r = 1, theta = 2 e1", ShrinkageFunction::constant(1.0), 2.0},
                                {"r = alam-thompson(c=1), theta = 2 e1", alam_thompson_r(5, 20, 1.0), 2.0}};
  std::uint64_t seed = 4;
  for (const auto& c : cases) {
    SteinIdentityParams params;
    params.r = c.r;
    params.theta(0) = c.theta1;
    params.reps = kReps;
    params.seed = seed++;
    const auto rep = stein_identity_check(params);
    for (const auto* id : {&rep.cross, &rep.quadratic, &rep.cross_conditional}) {
      const std::string line = fmt::format("{}: {:<17} lhs {:.6g} +- {:.2g}, rhs {:.6g} +- {:.2g}, z = {:+.2f}",
                                           c.name, id->name, id->lhs.mean, id->lhs.std_error, id->rhs.mean,
                                           id->rhs.std_error, id->z);
      if (id == &rep.cross_conditional) {
        o.details.push_back("info " + line);
      } else {
        o.require(id->pass, line);
      }
    }
  }
  o.summary = "cross and quadratic stein identities within 3 combined SE";
  return o;
}

Outcome condition_ground_truth() {
  Outcome o;
  auto expect = [&](const ConditionReport& rep, const std::string& fn, const std::string& id, Verdict want) {
    const auto* e = rep.find(id);
    const bool ok = e && e->verdict == want;
    o.require(ok, fmt::format("{}: {} is {} (expected {})", fn, id, e ? to_string(e->verdict) : "missing",
                              to_string(want)));
  };
  const auto at = alam_thompson_r(5, 20, 1.0);
  const auto at_mm = check_minimax_conditions(at, 5, 20);
  const auto at_nc = check_necessary_conditions(at, 5, 20);
  for (const auto* id : {"minimax.i", "minimax.ii"}) expect(at_mm, "alam-thompson", id, Verdict::Pass);
  for (const auto* id : {"dominance.i", "dominance.ii", "dominance.iii"})
    expect(at_nc, "alam-thompson", id, Verdict::Pass);
  const auto* lim = at_nc.find("dominance.iii");
  const double limit = lim && lim->witness_value ? *lim->witness_value : NAN;
  o.require(std::abs(limit - 3.0 / 340.0) <= 1e-8, fmt::format("alam-thompson: tail limit {:.10f} vs 3/340", limit));

  const auto k3 = ShrinkageFunction::constant(3.0);
  expect(check_minimax_conditions(k3, 5, 20), "r = 3", "minimax.ii", Verdict::Fail);
  expect(check_necessary_conditions(k3, 5, 20), "r = 3", "dominance.iii", Verdict::Fail);

  const ShrinkageFunction ex("exp(-x)", [](double x) { return std::exp(-x); });
  expect(check_minimax_conditions(ex, 5, 20), "exp(-x)", "minimax.i", Verdict::Fail);

  const ShrinkageFunction lg("log(1+x)", [](double x) { return std::log1p(x); });
  expect(check_necessary_conditions(lg, 5, 20), "log(1+x)", "dominance.ii", Verdict::Fail);
  o.summary = "condition checker ground truth";
  return o;
}

Outcome signed_linearity() {
  Outcome o;
  const Scenario scn(20, SpdMatrix::identity(5), Vector::Zero(5), MixingMeasure::atoms({{1, 1.3}, {2, -0.3}}));
  const auto r = mc_risk_signed(scn, EstimatorSpec::mean(), kReps, 6);
  o.require(std::abs(r.value - 5.75) <= 3.0 * r.std_error, "signed risk " + describe(r, 5.75));

  const Scenario one(20, SpdMatrix::identity(5), Vector::Zero(5), MixingMeasure::atoms({{1, 1}}));
  const auto a = mc_risk_signed(one, EstimatorSpec::mean(), 20000, 6);
  const auto b = mc_risk(gaussian_scenario(5, 20), EstimatorSpec::mean(), 20000, 6);
  o.require(a.value == b.value && a.std_error == b.std_error,
            fmt::format("single atom {:.17g} / gaussian {:.17g} bit-identical", a.value, b.value));
  o.summary = "signed mixing measure is linear in the atoms";
  return o;
}

Outcome posterior_normalization() {
  Outcome o;
  const std::pair<int, double> cases[] = {{1, 1e-4}, {2, 1e-2}};
  for (const auto& [p, tol] : cases) {
    auto rng = substream(7, static_cast<std::uint64_t>(p));
    const int n = 10;
    const Matrix rows = sample_errors(MixingMeasure::gaussian(), SpdMatrix::identity(p), n, rng);
    const auto stats = sufficient_stats(Dataset(rows));
    const PosteriorT post(stats);
    const double integral = posterior_normalization_check(post);
    o.require(std::abs(integral - 1.0) <= tol,
              fmt::format("p = {}: integral {:.10f} (tolerance {:g})", p, integral, tol));

    const double mode = posterior_logpdf(stats.ybar, post);
    bool symmetric = true, below_mode = true;
    std::mt19937_64 g(static_cast<std::uint64_t>(p));
    std::uniform_int_distribution<int> step(-64, 64);
    // Dyadic centre and offsets so centre +- v is exact.
    Vector centre(p);
    for (int d = 0; d < p; ++d) centre(d) = 0.5 + d;
    const PosteriorT shifted(centre, stats.scatter, n);
    for (int k = 0; k < 1000; ++k) {
      Vector v(p);
      for (auto& x : v) x = step(g) / 64.0;
      if (v.isZero()) continue;
      symmetric = symmetric && posterior_logpdf(centre + v, shifted) == posterior_logpdf(centre - v, shifted);
      below_mode = below_mode && posterior_logpdf(stats.ybar + v, post) < mode;
    }
    o.require(symmetric, fmt::format("p = {}: logpdf(c + v) == logpdf(c - v) on 1000 offsets", p));
    o.require(below_mode && mode == post.log_normalizer(), fmt::format("p = {}: mode at ybar", p));
  }
  o.summary = "posterior density integrates to one";
  return o;
}

Outcome equivariance() {
  Outcome o;
  const int p = 4, n = 12;
  std::mt19937_64 g(8);
  std::normal_distribution<double> nd;
  const std::vector<EstimatorSpec> estimators{EstimatorSpec::mean(), EstimatorSpec::james_stein(),
                                              EstimatorSpec::baranchik(alam_thompson_r(p, n, 1.0))};
  double worst_est = 0.0, worst_loss = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    Matrix a(p, p);
    for (auto& v : a.reshaped()) v = nd(g);
    a += 3.0 * Matrix::Identity(p, p);
    Vector theta(p);
    for (auto& v : theta) v = nd(g);
    const Scenario scn(n, spd_ar1(p, 0.4), theta, MixingMeasure::student_t(5));
    const Dataset data = draw_dataset(scn, 8, k);
    const auto s1 = sufficient_stats(data);
    const auto s2 = sufficient_stats(Dataset(data.rows() * a.transpose()));
    const SpdMatrix sigma2(a * scn.sigma.matrix() * a.transpose());
    for (const auto& est : estimators) {
      const Vector d1 = apply_estimator(est, s1);
      const Vector d2 = apply_estimator(est, s2);
      worst_est = std::max(worst_est, (d2 - a * d1).norm() / (a * d1).norm());
      const double l1 = loss(d1, theta, scn.sigma, n);
      const double l2 = loss(d2, a * theta, sigma2, n);
      worst_loss = std::max(worst_loss, std::abs(l1 - l2) / std::max(1.0, l1));
    }
  }
  o.require(worst_est <= 1e-10, fmt::format("estimator equivariance, worst relative error {:.3g}", worst_est));
  o.require(worst_loss <= 1e-10, fmt::format("joint loss invariance, worst relative error {:.3g}", worst_loss));
  o.summary = "affine equivariance on 100 random instances";
  return o;
}

Outcome determinism() {
  Outcome o;
  const char* const configs[] = {
      "p = 5\nN = 20\nestimators = mean, js, baranchik:at,c=1\ncompare = true\nreps = 5000\nseed = 9\n",
      "p = 4\nN = 12\nsigma = ar1:0.5\ntheta = ray:ones:0,3\nmixing = t:5\n"
      "estimators = mean, js+, baranchik:at,c=0.5\ncompare = true\nreps = 3000\nseed = 10\n",
      "p = 5\nN = 20\nmixing = atoms:1=1.3,2=-0.3\nestimators = mean, baranchik:at,c=1\ncompare = true\n"
      "reps = 3000\nseed = 11\n"};
  int idx = 0;
  for (const char* text : configs) {
    const auto cfg = parse_config(text);
    auto csv = [&](unsigned threads) {
      std::ostringstream out;
      run_risk(cfg, out, threads);
      return out.str();
    };
    const auto a = csv(1), b = csv(1), c = csv(3), d = csv(8);
    o.require(a == b && a == c && a == d,
              fmt::format("config {}: {} bytes identical at 1, 1, 3 and 8 threads", ++idx, a.size()));
  }
  o.summary = "byte-identical CSVs across runs and thread counts";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ellshrink acceptance suite"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria{
      gaussian_calibration, elliptical_calibration, shrinkage_dominance,     stein_identities, condition_ground_truth,
      signed_linearity,     posterior_normalization, equivariance, determinism};
  if (selected.empty())
    for (int i = 1; i <= 9; ++i) selected.push_back(i);

  bool all = true;
  for (int id : selected) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[static_cast<std::size_t>(id - 1)]();
    } catch (const std::exception& e) {
      out.pass = false;
      out.summary = fmt::format("threw: {}", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << fmt::format("criterion {}: {}  {} ({:.1f} s)\n", id, out.pass ? "PASS" : "FAIL", out.summary, secs);
    for (const auto& d : out.details) std::cout << "    " << d << '\n';
    all = all && out.pass;
  }
  return all ? 0 : 1;
}
