#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "ellshrink/statcore.hpp"

namespace ellshrink {

// A shrinkage function r : [0, inf) -> [0, inf) with derivative access.
//
// When no closed-form derivative is supplied, derivative() falls back to
// a centred difference with step h = max(1e-6, 1e-6 x), switching to a
// forward difference when x - h would leave the domain.
class ShrinkageFunction {
 public:
  using Fn = std::function<double(double)>;

  ShrinkageFunction(std::string name, Fn value, std::optional<Fn> derivative = std::nullopt,
                    std::map<std::string, double> params = {});

  static ShrinkageFunction constant(double k);

  double operator()(double x) const { return value_(x); }
  double value(double x) const { return value_(x); }
  double derivative(double x) const;
  double finite_difference(double x) const;
  bool has_closed_form_derivative() const noexcept { return derivative_.has_value(); }

  const std::string& name() const noexcept { return name_; }
  const std::map<std::string, double>& params() const noexcept { return params_; }

 private:
  std::string name_;
  Fn value_;
  std::optional<Fn> derivative_;
  std::map<std::string, double> params_;
};

// Generalised Alam-Thompson function r(x) = (p-2) b x / (x + c) with
// b = 1 / (N (N - p + 2)). Increasing from r(0) = 0 to the asymptote b(p-2).
ShrinkageFunction alam_thompson_r(int p, int n_obs, double c);

enum class EstimatorKind { Mean, JamesStein, Baranchik };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Mean;
  std::optional<ShrinkageFunction> shrinkage;  // set for Baranchik
  bool positive_part = false;
  std::string label;

  static EstimatorSpec mean();
  static EstimatorSpec james_stein(bool positive_part = false);
  static EstimatorSpec baranchik(ShrinkageFunction r, bool positive_part = false);
};

// Grammar: `mean` | `js` | `js+` | `baranchik:at,c=<c>` | `baranchik:const,k=<k>`.
// p and N are needed to bind the Alam-Thompson constant b.
// Throws BadSpec on malformed input; Baranchik-type specs need p >= 3.
EstimatorSpec parse_estimator(std::string_view spec, int p, int n_obs);

// Shrinkage function named by the same grammar (`mean` maps to r = 0,
// `js` to r = p - 2).
ShrinkageFunction parse_shrinkage(std::string_view spec, int p, int n_obs);

Vector estimate_mean(const SufficientStats& stats);

// [1 - r(F)/F] ybar with F = ybar^T S^{-1} ybar; the factor is clamped at
// zero from below when positive_part is set. ybar = 0 is returned as is.
Vector estimate_baranchik(const SufficientStats& stats, const ShrinkageFunction& r, bool positive_part = false);

// Baranchik with the constant r = p - 2.
Vector estimate_james_stein(const SufficientStats& stats, bool positive_part = false);

Vector apply_estimator(const EstimatorSpec& spec, const SufficientStats& stats);

}  // namespace ellshrink
