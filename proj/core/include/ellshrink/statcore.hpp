#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <filesystem>
#include <string_view>
#include <vector>

namespace ellshrink {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Symmetric positive definite matrix with its lower Cholesky factor.
//
// Construction validates symmetry (1e-12 relative to the largest entry)
// and that every Cholesky pivot is positive. There is no fallback: a
// matrix that fails either check is rejected with NotPositiveDefinite.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Matrix& m);

  static SpdMatrix identity(Eigen::Index p);

  Eigen::Index dim() const noexcept { return matrix_.rows(); }
  const Matrix& matrix() const noexcept { return matrix_; }
  // Lower-triangular L with matrix() == L * L^T.
  const Matrix& cholesky() const noexcept { return lower_; }

  // v^T M^{-1} v via one forward substitution against L.
  double quad_form_inv(const Vector& v) const;
  // M^{-1} b via two triangular solves.
  Vector solve(const Vector& b) const;
  double log_det() const noexcept;

 private:
  Matrix matrix_;
  Matrix lower_;
};

inline double quad_form_inv(const Vector& v, const SpdMatrix& m) { return m.quad_form_inv(v); }

// N observations of dimension p, one per row. Requires N > p >= 1.
class Dataset {
 public:
  explicit Dataset(Matrix rows);

  Eigen::Index size() const noexcept { return rows_.rows(); }
  Eigen::Index dim() const noexcept { return rows_.cols(); }
  const Matrix& rows() const noexcept { return rows_; }

 private:
  Matrix rows_;
};

// Sample mean and the uncorrected scatter sum_i (Y_i - ybar)(Y_i - ybar)^T.
struct SufficientStats {
  Vector ybar;
  SpdMatrix scatter;
  Eigen::Index n_obs;

  Eigen::Index dim() const noexcept { return ybar.size(); }
};

// Throws DegenerateScatter when the centred rows do not span R^p.
SufficientStats sufficient_stats(const Dataset& data);

// Sigma specifications: `identity`, `diag:<d1>,<d2>,...`, `ar1:<rho>`,
// `file:<path>` (p lines of p comma-separated decimals, no header).
SpdMatrix spd_from_spec(std::string_view spec, Eigen::Index p);

SpdMatrix spd_identity(Eigen::Index p);
SpdMatrix spd_diagonal(const std::vector<double>& diag);
SpdMatrix spd_ar1(Eigen::Index p, double rho);
SpdMatrix spd_from_csv(const std::filesystem::path& path);

// Plain CSV of decimals, one row per line; blank lines are skipped.
Matrix read_csv_matrix(const std::filesystem::path& path);

}  // namespace ellshrink
