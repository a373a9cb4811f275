#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ellshrink/estimators.hpp"

namespace ellshrink {

// Numerical checks of the minimaxity and dominance conditions on a
// shrinkage function r. Sampling a grid can refute a condition but not
// prove it, so "pass" always means "not refuted on the points examined".

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);

struct ConditionEntry {
  std::string id;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<double> witness_x;
  std::optional<double> witness_value;
  std::string detail;
};

struct ConditionReport {
  std::vector<ConditionEntry> entries;

  bool any_fail() const noexcept;
  const ConditionEntry* find(const std::string& id) const noexcept;
  void append(const ConditionReport& other);
};

// All slack values used by the checkers live here.
struct CheckTolerances {
  double monotone_value_slack = 1e-12;
  double derivative_slack = 1e-10;
  double bound_slack = 1e-12;
  double limit_band = 1e-8;
  std::size_t limit_window = 5;
  double schwartz_cap = 1e12;
  double schwartz_half_agreement = 0.10;
  std::size_t schwartz_min_samples = 10000;
};

// Log-uniform grid on [lo, hi] with `points` points (default 81 on [1e-4, 1e4]).
std::vector<double> default_minimax_grid(double lo = 1e-4, double hi = 1e4, std::size_t points = 81);

// x_j = first * ratio^j, j = 0..count-1 (default 10 * 2^j, j = 0..40).
std::vector<double> default_tail(double first = 10.0, double ratio = 2.0, std::size_t count = 41);

// Sufficient minimaxity conditions:
//   minimax.i   r non-decreasing (adjacent values and r' on the grid)
//   minimax.ii  sup r <= 2(p-2) / (N (N-p+2))
ConditionReport check_minimax_conditions(const ShrinkageFunction& r, int p, int n_obs,
                                         const std::vector<double>& grid = default_minimax_grid(),
                                         const CheckTolerances& tol = {});

// Necessary conditions for dominating the James-Stein type estimator:
//   dominance.i    r' >= 0 at arbitrarily large points of the tail
//   dominance.ii   lim x r'(x), if it exists, is 0
//   dominance.iii  lim r(x), when it and the (ii) limit exist, is (p-2)/(N(N-p+2))
ConditionReport check_necessary_conditions(const ShrinkageFunction& r, int p, int n_obs,
                                           const std::vector<double>& tail = default_tail(),
                                           const CheckTolerances& tol = {});

// Integrability of r' and r^2 against the empirical measure of `samples`:
//   schwartz.deriv, schwartz.square
ConditionReport check_schwartz_integrability(const ShrinkageFunction& r, const std::vector<double>& samples,
                                             const CheckTolerances& tol = {});

// Draws of F = ybar^T S^{-1} ybar under the reference scenario: Gaussian
// errors, Sigma = I_p, theta = 0, N observations.
std::vector<double> reference_f_samples(int p, int n_obs, std::size_t count, std::uint64_t seed);

std::string render_report_text(const ConditionReport& report);
// CSV: condition,verdict,witness_x,witness_value,detail
std::string render_report_csv(const ConditionReport& report);

}  // namespace ellshrink
