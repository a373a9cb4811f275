#include "ellshrink/estimators.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ellshrink/error.hpp"
#include "text.hpp"

namespace ellshrink {

ShrinkageFunction::ShrinkageFunction(std::string name, Fn value, std::optional<Fn> derivative,
                                     std::map<std::string, double> params)
    : name_(std::move(name)), value_(std::move(value)), derivative_(std::move(derivative)),
      params_(std::move(params)) {
  if (!value_) throw Error(ErrorCode::InvalidParameter, "shrinkage function has no value callable");
}

ShrinkageFunction ShrinkageFunction::constant(double k) {
  if (!(k >= 0.0) || !std::isfinite(k)) {
    throw Error(ErrorCode::InvalidParameter, fmt::format("constant shrinkage must be >= 0, got {}", k));
  }
  return ShrinkageFunction(
      fmt::format("const(k={})", k), [k](double) { return k; }, [](double) { return 0.0; }, {{"k", k}});
}

double ShrinkageFunction::finite_difference(double x) const {
  const double h = std::max(1e-6, 1e-6 * x);
  if (x - h < 0.0) return (value_(x + h) - value_(x)) / h;
  return (value_(x + h) - value_(x - h)) / (2.0 * h);
}

double ShrinkageFunction::derivative(double x) const {
  return derivative_ ? (*derivative_)(x) : finite_difference(x);
}

ShrinkageFunction alam_thompson_r(int p, int n_obs, double c) {
  if (p < 3) throw Error(ErrorCode::InvalidParameter, fmt::format("Alam-Thompson needs p >= 3, got {}", p));
  if (n_obs <= p) throw Error(ErrorCode::InvalidParameter, fmt::format("Alam-Thompson needs N > p, got N = {}", n_obs));
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(ErrorCode::InvalidParameter, fmt::format("Alam-Thompson needs c > 0, got {}", c));
  }
  const double b = 1.0 / (static_cast<double>(n_obs) * static_cast<double>(n_obs - p + 2));
  const double k = (p - 2) * b;
  return ShrinkageFunction(
      fmt::format("alam_thompson(c={})", c),
      [k, c](double x) { return k * x / (x + c); },
      [k, c](double x) { return k * c / ((x + c) * (x + c)); },
      {{"b", b}, {"c", c}, {"p", p}, {"N", n_obs}});
}

EstimatorSpec EstimatorSpec::mean() { return {EstimatorKind::Mean, std::nullopt, false, "mean"}; }

EstimatorSpec EstimatorSpec::james_stein(bool positive_part) {
  return {EstimatorKind::JamesStein, std::nullopt, positive_part, positive_part ? "js+" : "js"};
}

EstimatorSpec EstimatorSpec::baranchik(ShrinkageFunction r, bool positive_part) {
  std::string label = "baranchik:" + r.name() + (positive_part ? "+" : "");
  return {EstimatorKind::Baranchik, std::move(r), positive_part, std::move(label)};
}

namespace {

// Parses the `key=value` list after `baranchik:<family>,`.
double baranchik_param(std::string_view spec, std::string_view rest, std::string_view key) {
  for (auto item : detail::split(rest, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) continue;
    if (detail::trim(item.substr(0, eq)) != key) continue;
    if (auto v = detail::parse_double(item.substr(eq + 1))) return *v;
    throw Error(ErrorCode::BadSpec, fmt::format("'{}': value of {} is not numeric", spec, key));
  }
  throw Error(ErrorCode::BadSpec, fmt::format("'{}': missing parameter {}=<value>", spec, key));
}

void require_p3(std::string_view spec, int p) {
  if (p < 3) throw Error(ErrorCode::BadSpec, fmt::format("'{}' needs p >= 3, got p = {}", spec, p));
}

}  // namespace

ShrinkageFunction parse_shrinkage(std::string_view spec, int p, int n_obs) {
  spec = detail::trim(spec);
  if (spec == "mean") return ShrinkageFunction::constant(0.0);
  if (spec == "js" || spec == "js+") {
    require_p3(spec, p);
    return ShrinkageFunction::constant(p - 2.0);
  }
  if (detail::starts_with(spec, "baranchik:")) {
    require_p3(spec, p);
    const auto body = spec.substr(10);
    const auto comma = body.find(',');
    const auto family = detail::trim(body.substr(0, comma));
    const auto rest = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
    try {
      if (family == "at") return alam_thompson_r(p, n_obs, baranchik_param(spec, rest, "c"));
      if (family == "const") return ShrinkageFunction::constant(baranchik_param(spec, rest, "k"));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::BadSpec) throw;
      throw Error(ErrorCode::BadSpec, fmt::format("'{}': {}", spec, e.what()));
    }
    throw Error(ErrorCode::BadSpec, fmt::format("'{}': unknown Baranchik family '{}'", spec, family));
  }
  throw Error(ErrorCode::BadSpec, fmt::format("unknown estimator spec '{}'", spec));
}

EstimatorSpec parse_estimator(std::string_view spec, int p, int n_obs) {
  spec = detail::trim(spec);
  EstimatorSpec out;
  if (spec == "mean") {
    out = EstimatorSpec::mean();
  } else if (spec == "js" || spec == "js+") {
    require_p3(spec, p);
    out = EstimatorSpec::james_stein(spec == "js+");
  } else {
    out = EstimatorSpec::baranchik(parse_shrinkage(spec, p, n_obs));
  }
  out.label = std::string(spec);
  return out;
}

Vector estimate_mean(const SufficientStats& stats) { return stats.ybar; }

Vector estimate_baranchik(const SufficientStats& stats, const ShrinkageFunction& r, bool positive_part) {
  if (stats.dim() < 3) {
    throw Error(ErrorCode::InvalidParameter, fmt::format("Baranchik estimators need p >= 3, got {}", stats.dim()));
  }
  const double f = stats.scatter.quad_form_inv(stats.ybar);
  if (f == 0.0) {
    spdlog::debug("Baranchik estimator at ybar = 0; returning ybar unchanged");
    return stats.ybar;
  }
  double factor = 1.0 - r(f) / f;
  if (positive_part) factor = std::max(factor, 0.0);
  return factor * stats.ybar;
}

Vector estimate_james_stein(const SufficientStats& stats, bool positive_part) {
  return estimate_baranchik(stats, ShrinkageFunction::constant(static_cast<double>(stats.dim()) - 2.0),
                            positive_part);
}

Vector apply_estimator(const EstimatorSpec& spec, const SufficientStats& stats) {
  switch (spec.kind) {
    case EstimatorKind::Mean: return estimate_mean(stats);
    case EstimatorKind::JamesStein: return estimate_james_stein(stats, spec.positive_part);
    case EstimatorKind::Baranchik:
      if (!spec.shrinkage) throw Error(ErrorCode::InvalidParameter, "Baranchik spec without a shrinkage function");
      return estimate_baranchik(stats, *spec.shrinkage, spec.positive_part);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown estimator kind");
}

}  // namespace ellshrink
