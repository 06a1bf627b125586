#ifndef MEDIANFORGE_CORE_HPP
#define MEDIANFORGE_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace medianforge {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A preference vector in R^d.
using Point = Eigen::VectorXd;

enum class Errc {
  zero_vector,
  dimension_mismatch,
  at_voter_point,
  not_spd,
  degenerate_dimension,
  majority_attack,
  bracket_failure,
  invalid_argument,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::zero_vector: return "ZeroVector";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::at_voter_point: return "AtVoterPoint";
    case Errc::not_spd: return "NotSPD";
    case Errc::degenerate_dimension: return "DegenerateDimension";
    case Errc::majority_attack: return "MajorityAttack";
    case Errc::bracket_failure: return "BracketFailure";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require_same_dim(Index a, Index b, const char* where) {
  if (a != b) {
    throw Error(Errc::dimension_mismatch, std::string(where) + ": " + std::to_string(a) +
                                              " vs " + std::to_string(b));
  }
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Symmetric positive-definite matrix. Symmetry is checked to 1e-12 relative
/// to the largest entry, then enforced exactly; positivity by Cholesky.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Matrix& m) : m_(m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
      throw Error(Errc::not_spd, "matrix must be square and non-empty");
    }
    if (!m.allFinite()) {
      throw Error(Errc::not_spd, "matrix has non-finite entries");
    }
    const double scale = m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw Error(Errc::not_spd, "matrix is not symmetric");
    }
    m_ = 0.5 * (m + m.transpose());
    Eigen::LLT<Matrix> llt(m_);
    if (llt.info() != Eigen::Success) {
      throw Error(Errc::not_spd, "matrix is not positive definite");
    }
    // LLT succeeds on some matrices with tiny negative eigenvalues.
    if (eigenvalues().minCoeff() <= 0.0) {
      throw Error(Errc::not_spd, "matrix is not positive definite");
    }
  }

  static SpdMatrix identity(Index d) { return SpdMatrix(Matrix::Identity(d, d)); }

  static SpdMatrix diagonal(const Vector& diag) { return SpdMatrix(Matrix(diag.asDiagonal())); }

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }

  Vector eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  Matrix inverse() const { return m_.llt().solve(Matrix::Identity(dim(), dim())); }

  bool is_identity(double tol = 0.0) const {
    return (m_ - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff() <= tol;
  }

 private:
  Matrix m_;
};

/// Principal square root of a symmetric positive semi-definite matrix.
inline Matrix sym_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

inline Matrix sym_inv_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector inv = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Dense fully-symmetric d x d x d array (third derivative of a scalar field).
class ThirdDerivTensor {
 public:
  explicit ThirdDerivTensor(Index d) : d_(d), data_(static_cast<std::size_t>(d * d * d), 0.0) {}

  Index dim() const noexcept { return d_; }

  double& operator()(Index i, Index j, Index k) { return data_[offset(i, j, k)]; }
  double operator()(Index i, Index j, Index k) const { return data_[offset(i, j, k)]; }

  /// The symmetric matrix M(j,k) = sum_i T(i,j,k) w(i).
  Matrix contract(const Vector& w) const {
    require_same_dim(w.size(), d_, "ThirdDerivTensor::contract");
    Matrix out = Matrix::Zero(d_, d_);
    for (Index i = 0; i < d_; ++i) {
      if (w(i) == 0.0) continue;
      for (Index j = 0; j < d_; ++j) {
        for (Index k = 0; k < d_; ++k) out(j, k) += (*this)(i, j, k) * w(i);
      }
    }
    return out;
  }

  /// The vector v(i) = sum_{j,k} T(i,j,k) x(j) y(k).
  Vector contract(const Vector& x, const Vector& y) const {
    return contract(x) * y;
  }

  ThirdDerivTensor& operator+=(const ThirdDerivTensor& other) {
    require_same_dim(other.d_, d_, "ThirdDerivTensor::operator+=");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += other.data_[n];
    return *this;
  }

  ThirdDerivTensor& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  bool all_finite() const {
    for (double x : data_) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

 private:
  std::size_t offset(Index i, Index j, Index k) const {
    return static_cast<std::size_t>((i * d_ + j) * d_ + k);
  }

  Index d_;
  std::vector<double> data_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace medianforge

#endif  // MEDIANFORGE_CORE_HPP
