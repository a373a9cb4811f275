#include "ellshrink/statcore.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <fmt/format.h>

#include "ellshrink/error.hpp"
#include "text.hpp"

namespace ellshrink {

namespace {

constexpr double kSymmetryTol = 1e-12;

void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("{}: expected dimension {}, got {}", what, want, got));
  }
}

}  // namespace

SpdMatrix::SpdMatrix(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::NotPositiveDefinite,
                fmt::format("matrix must be square and non-empty, got {}x{}", m.rows(), m.cols()));
  }
  if (!m.allFinite()) throw Error(ErrorCode::NotPositiveDefinite, "matrix has non-finite entries");
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    throw Error(ErrorCode::NotPositiveDefinite,
                fmt::format("matrix is not symmetric (max |M - M^T| = {:.3g})", asym));
  }
  matrix_ = 0.5 * (m + m.transpose());

  // Hand-rolled so the first non-positive pivot is reported by index.
  const Eigen::Index p = matrix_.rows();
  lower_ = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double d = matrix_(j, j) - lower_.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  fmt::format("Cholesky pivot {} is {:.3g}", j, d));
    }
    const double ljj = std::sqrt(d);
    lower_(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < p; ++i) {
      lower_(i, j) = (matrix_(i, j) - lower_.row(i).head(j).dot(lower_.row(j).head(j))) / ljj;
    }
  }
}

SpdMatrix SpdMatrix::identity(Eigen::Index p) { return SpdMatrix(Matrix::Identity(p, p)); }

double SpdMatrix::quad_form_inv(const Vector& v) const {
  require_dim(v.size(), dim(), "quad_form_inv");
  const Vector w = lower_.triangularView<Eigen::Lower>().solve(v);
  return w.squaredNorm();
}

Vector SpdMatrix::solve(const Vector& b) const {
  require_dim(b.size(), dim(), "solve");
  const Vector w = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(w);
}

double SpdMatrix::log_det() const noexcept {
  return 2.0 * lower_.diagonal().array().log().sum();
}

Dataset::Dataset(Matrix rows) : rows_(std::move(rows)) {
  if (rows_.cols() < 1) throw Error(ErrorCode::InvalidParameter, "dataset needs p >= 1 columns");
  if (rows_.rows() <= rows_.cols()) {
    throw Error(ErrorCode::InvalidParameter,
                fmt::format("dataset needs N > p, got N = {}, p = {}", rows_.rows(), rows_.cols()));
  }
}

SufficientStats sufficient_stats(const Dataset& data) {
  const Matrix& y = data.rows();
  Vector ybar = y.colwise().mean().transpose();
  const Matrix centred = y.rowwise() - ybar.transpose();
  Matrix scatter = Matrix::Zero(y.cols(), y.cols());
  scatter.selfadjointView<Eigen::Lower>().rankUpdate(centred.transpose());
  scatter.triangularView<Eigen::StrictlyUpper>() = scatter.transpose();
  try {
    return SufficientStats{std::move(ybar), SpdMatrix(scatter), data.size()};
  } catch (const Error& e) {
    throw Error(ErrorCode::DegenerateScatter, e.what());
  }
}

SpdMatrix spd_identity(Eigen::Index p) {
  if (p < 1) throw Error(ErrorCode::BadSpec, "identity needs p >= 1");
  return SpdMatrix::identity(p);
}

SpdMatrix spd_diagonal(const std::vector<double>& diag) {
  if (diag.empty()) throw Error(ErrorCode::BadSpec, "diagonal needs at least one entry");
  Vector d(static_cast<Eigen::Index>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) d(static_cast<Eigen::Index>(i)) = diag[i];
  return SpdMatrix(d.asDiagonal().toDenseMatrix());
}

SpdMatrix spd_ar1(Eigen::Index p, double rho) {
  if (p < 1) throw Error(ErrorCode::BadSpec, "ar1 needs p >= 1");
  if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::BadSpec, fmt::format("ar1 needs |rho| < 1, got {}", rho));
  Matrix m(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  return SpdMatrix(m);
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadSpec, fmt::format("cannot open '{}'", path.string()));
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<double> row;
    for (auto field : detail::split(line, ',')) {
      auto v = detail::parse_double(field);
      if (!v) {
        throw Error(ErrorCode::BadSpec,
                    fmt::format("{}:{}: '{}' is not a decimal number", path.string(), lineno, field));
      }
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::BadSpec, fmt::format("{}:{}: ragged row ({} fields, expected {})",
                                                  path.string(), lineno, row.size(), rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::BadSpec, fmt::format("'{}' is empty", path.string()));
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

SpdMatrix spd_from_csv(const std::filesystem::path& path) {
  const Matrix m = read_csv_matrix(path);
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::BadSpec, fmt::format("'{}' holds a {}x{} matrix, expected square",
                                                path.string(), m.rows(), m.cols()));
  }
  return SpdMatrix(m);
}

SpdMatrix spd_from_spec(std::string_view spec, Eigen::Index p) {
  spec = detail::trim(spec);
  SpdMatrix out = [&]() -> SpdMatrix {
    if (spec == "identity") return spd_identity(p);
    if (detail::starts_with(spec, "ar1:")) {
      auto rho = detail::parse_double(spec.substr(4));
      if (!rho) throw Error(ErrorCode::BadSpec, fmt::format("bad ar1 coefficient in '{}'", spec));
      return spd_ar1(p, *rho);
    }
    if (detail::starts_with(spec, "diag:")) {
      std::vector<double> d;
      for (auto f : detail::split(spec.substr(5), ',')) {
        auto v = detail::parse_double(f);
        if (!v) throw Error(ErrorCode::BadSpec, fmt::format("bad diagonal entry '{}'", f));
        d.push_back(*v);
      }
      return spd_diagonal(d);
    }
    if (detail::starts_with(spec, "file:")) return spd_from_csv(std::filesystem::path(std::string(spec.substr(5))));
    throw Error(ErrorCode::BadSpec, fmt::format("unknown sigma spec '{}'", spec));
  }();
  if (out.dim() != p) {
    throw Error(ErrorCode::BadSpec, fmt::format("sigma spec '{}' has dimension {}, expected {}", spec, out.dim(), p));
  }
  return out;
}

}  // namespace ellshrink
