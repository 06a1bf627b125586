#ifndef MEDIANFORGE_VECTOR_CORE_HPP
#define MEDIANFORGE_VECTOR_CORE_HPP

// Closed-form derivatives of the Euclidean, skewed and l_p norms.
//
// Every derivative is undefined at the origin; these functions throw
// Errc::zero_vector there and leave subgradient selection to the solvers.

#include "medianforge/core.hpp"

#include <cmath>

namespace medianforge {

namespace detail {

inline double checked_norm(const Vector& z, const char* where) {
  const double r = z.norm();
  if (!(r > 0.0)) throw Error(Errc::zero_vector, where);
  return r;
}

}  // namespace detail

/// z / |z|_2, the unit force exerted by a voter at -z on the origin.
inline Point unit_vector(const Vector& z) {
  return z / detail::checked_norm(z, "unit_vector at the origin");
}

/// Hessian of |z|_2: (I - u u^T) / |z|_2 with u = z / |z|_2.
inline Matrix euclid_hessian(const Vector& z) {
  const double r = detail::checked_norm(z, "euclid_hessian at the origin");
  const Vector u = z / r;
  Matrix h = -u * u.transpose();
  h.diagonal().array() += 1.0;
  return h / r;
}

/// Third derivative of |z|_2:
///   T(i,j,k) = (3 u_i u_j u_k - d_ij u_k - d_ik u_j - d_jk u_i) / |z|_2^2.
inline ThirdDerivTensor euclid_third_derivative(const Vector& z) {
  const double r = detail::checked_norm(z, "euclid_third_derivative at the origin");
  const Vector u = z / r;
  const Index d = z.size();
  const double inv_r2 = 1.0 / (r * r);
  ThirdDerivTensor t(d);
  // One evaluation per sorted triple, copied to every permutation, so the
  // tensor is exactly symmetric.
  for (Index i = 0; i < d; ++i) {
    for (Index j = i; j < d; ++j) {
      for (Index k = j; k < d; ++k) {
        double v = 3.0 * u(i) * u(j) * u(k);
        if (i == j) v -= u(k);
        if (i == k) v -= u(j);
        if (j == k) v -= u(i);
        v *= inv_r2;
        t(i, j, k) = t(i, k, j) = t(j, i, k) = t(j, k, i) = t(k, i, j) = t(k, j, i) = v;
      }
    }
  }
  return t;
}

/// Hoelder conjugate of p in [1, inf].
inline double dual_exponent(double p) {
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

inline double lp_norm(const Vector& z, double p) {
  if (!(p >= 1.0)) throw Error(Errc::invalid_argument, "lp_norm requires p >= 1");
  if (std::isinf(p)) return z.cwiseAbs().maxCoeff();
  if (p == 1.0) return z.cwiseAbs().sum();
  if (p == 2.0) return z.norm();
  const double m = z.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  return m * std::pow((z.cwiseAbs() / m).array().pow(p).sum(), 1.0 / p);
}

/// A subgradient of |z|_p. For p in (1, inf) this is the gradient and has
/// unit l_q norm; p = 1 emits sign(z) with 0 on zero coordinates; p = inf
/// puts unit mass on the lowest-index coordinate of maximal magnitude.
inline Point lp_gradient(const Vector& z, double p) {
  if (!(p >= 1.0)) throw Error(Errc::invalid_argument, "lp_gradient requires p >= 1");
  const Index d = z.size();
  Point g = Point::Zero(d);
  if (p == 1.0) {
    for (Index i = 0; i < d; ++i) g(i) = (z(i) > 0.0) - (z(i) < 0.0);
    return g;
  }
  if (std::isinf(p)) {
    Index best = 0;
    for (Index i = 1; i < d; ++i) {
      if (std::abs(z(i)) > std::abs(z(best))) best = i;
    }
    g(best) = z(best) < 0.0 ? -1.0 : 1.0;
    return g;
  }
  const double m = z.cwiseAbs().maxCoeff();
  if (!(m > 0.0)) throw Error(Errc::zero_vector, "lp_gradient at the origin");
  // Scale by the max entry so |y_i|^(p-1) neither overflows nor underflows.
  const Vector y = z / m;
  const double norm_p = lp_norm(y, p);
  for (Index i = 0; i < d; ++i) {
    const double a = std::abs(y(i));
    if (a == 0.0) continue;
    g(i) = std::copysign(std::pow(a / norm_p, p - 1.0), y(i));
  }
  return g;
}

/// |z|_Sigma = |Sigma z|_2.
inline double skewed_norm(const Vector& z, const SpdMatrix& sigma) {
  require_same_dim(z.size(), sigma.dim(), "skewed_norm");
  return (sigma.matrix() * z).norm();
}

/// Sigma Sigma z / |z|_Sigma. Its Sigma^{-1}-skewed norm is 1.
inline Point skewed_gradient(const Vector& z, const SpdMatrix& sigma) {
  require_same_dim(z.size(), sigma.dim(), "skewed_gradient");
  const Vector sz = sigma.matrix() * z;
  const double r = detail::checked_norm(sz, "skewed_gradient at the origin");
  return sigma.matrix() * sz / r;
}

/// Sigma * euclid_hessian(Sigma z) * Sigma.
inline Matrix skewed_hessian_of_norm(const Vector& z, const SpdMatrix& sigma) {
  require_same_dim(z.size(), sigma.dim(), "skewed_hessian_of_norm");
  const Matrix& s = sigma.matrix();
  return s * euclid_hessian(s * z) * s;
}

}  // namespace medianforge

#endif  // MEDIANFORGE_VECTOR_CORE_HPP
