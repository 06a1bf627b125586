#ifndef MEDIANFORGE_SKEWNESS_HPP
#define MEDIANFORGE_SKEWNESS_HPP

#include "medianforge/core.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace medianforge {

/// Skew(S) = sup_{x != 0} |x| |S x| / (x^T S x) - 1 together with the
/// eigenvalue bounds that bracket it.
struct SkewnessReport {
  double value = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  /// (1 + L) / (2 sqrt(L)) - 1 with L = lambda_max / lambda_min.
  double lower_bound = 0.0;
  /// L - 1.
  double upper_bound = 0.0;
  /// True when `value` comes from the closed form rather than a search.
  bool certified = true;
};

/// (1 + L) / (2 sqrt(L)) - 1 written as (sqrt(a) - sqrt(b))^2 / (2 sqrt(ab))
/// so that nearly equal eigenvalues do not cancel catastrophically.
inline double two_point_skew(double lambda_min, double lambda_max) {
  const double a = std::sqrt(lambda_min);
  const double b = std::sqrt(lambda_max);
  return (b - a) * (b - a) / (2.0 * a * b);
}

/// Closed form. In eigencoordinates the objective only depends on the
/// weights b_i = x_i^2; at fixed first moment the second moment is largest
/// on the two extreme eigenvalues, so the supremum is attained on
/// span(e_min, e_max) for every dimension.
inline SkewnessReport skewness(const SpdMatrix& s) {
  const Vector ev = s.eigenvalues();
  SkewnessReport r;
  r.lambda_min = ev(0);
  r.lambda_max = ev(ev.size() - 1);
  if (!(r.lambda_min > 0.0)) throw Error(Errc::not_spd, "skewness of a singular matrix");
  r.value = two_point_skew(r.lambda_min, r.lambda_max);
  r.lower_bound = r.value;
  r.upper_bound = r.lambda_max / r.lambda_min - 1.0;
  r.certified = true;
  return r;
}

inline double skewness(const Matrix& s) { return skewness(SpdMatrix(s)).value; }

/// |x| |S x| / (x^T S x) - 1.
inline double skewness_objective(const Matrix& s, const Vector& x) {
  const Vector sx = s * x;
  return x.norm() * sx.norm() / x.dot(sx) - 1.0;
}

struct NumericSkewness {
  double value = 0.0;
  Vector maximizer;
  int starts = 0;
};

/// Multi-start gradient ascent of log(|x| |Sx| / x^T S x) on the unit
/// sphere. Independent of the eigen-decomposition used by `skewness`.
inline NumericSkewness skewness_numeric(const SpdMatrix& spd, int random_starts = 24,
                                        std::uint64_t seed = 0x5eed, int max_iter = 5000) {
  const Matrix& s = spd.matrix();
  const Index d = s.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto log_obj = [&](const Vector& x) {
    const Vector sx = s * x;
    return std::log(x.norm()) + std::log(sx.norm()) - std::log(x.dot(sx));
  };

  NumericSkewness best;
  best.value = -kInf;
  const int total = static_cast<int>(d) + random_starts;
  for (int start = 0; start < total; ++start) {
    Vector x(d);
    if (start < d) {
      // Axis starts are stationary for diagonal S; nudge them off.
      for (Index i = 0; i < d; ++i) x(i) = 0.05 * normal(rng);
      x(start) += 1.0;
    } else {
      for (Index i = 0; i < d; ++i) x(i) = normal(rng);
    }
    x.normalize();
    double f = log_obj(x);
    double step = 1.0;
    for (int it = 0; it < max_iter; ++it) {
      const Vector sx = s * x;
      const double q = x.dot(sx);
      // Degree-0 homogeneous, so the gradient is already tangent at |x| = 1.
      const Vector grad = x / x.squaredNorm() + s * sx / sx.squaredNorm() - 2.0 * sx / q;
      const double gn2 = grad.squaredNorm();
      if (gn2 < 1e-30) break;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        Vector cand = x + step * grad;
        cand.normalize();
        const double fc = log_obj(cand);
        if (fc >= f + 1e-4 * step * gn2) {
          x = cand;
          f = fc;
          moved = true;
          step *= 2.0;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    const double v = skewness_objective(s, x);
    ++best.starts;
    if (v > best.value) {
      best.value = v;
      best.maximizer = x;
    }
  }
  return best;
}

}  // namespace medianforge

#endif  // MEDIANFORGE_SKEWNESS_HPP
