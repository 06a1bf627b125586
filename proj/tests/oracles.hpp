#ifndef MEDIANFORGE_TESTS_ORACLES_HPP
#define MEDIANFORGE_TESTS_ORACLES_HPP

// Reference computations that do not go through the library's solvers.

#include "medianforge/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using medianforge::Index;
using medianforge::Matrix;
using medianforge::Vector;

/// Central-difference gradient of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& z, double h) {
  Vector g(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    Vector a = z;
    Vector b = z;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// Central-difference Jacobian; column i is the derivative along e_i.
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& z, double h) {
  const Vector f0 = f(z);
  Matrix j(f0.size(), z.size());
  for (Index i = 0; i < z.size(); ++i) {
    Vector a = z;
    Vector b = z;
    a(i) += h;
    b(i) -= h;
    j.col(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return j;
}

inline long double loss_ld(const Matrix& pts, const Vector& w, long double x, long double y) {
  long double s = 0.0L;
  for (Index j = 0; j < pts.cols(); ++j) {
    const long double dx = x - static_cast<long double>(pts(0, j));
    const long double dy = y - static_cast<long double>(pts(1, j));
    s += static_cast<long double>(w(j)) * std::sqrt(dx * dx + dy * dy);
  }
  return s;
}

struct GridResult {
  Vector point;
  double resolution = 0.0;
  // Distance within which the true minimizer lies: the best node can sit
  // sqrt(kappa / 2) grid steps away along a flat direction of the loss.
  double radius = 0.0;
};

/// Planar weighted geometric median by brute force: a coarse grid over the
/// bounding box, then repeated finer grids centred on the best node until the
/// spacing reaches `resolution`. Loss evaluated in extended precision.
inline GridResult grid_median_2d(const Matrix& pts, const Vector& w, double resolution = 1e-7) {
  const Vector lo = pts.rowwise().minCoeff();
  const Vector hi = pts.rowwise().maxCoeff();
  const int coarse = 400;
  const double span = std::max((hi - lo).maxCoeff(), 1e-12);
  double step = span / coarse;
  long double bx = lo(0);
  long double by = lo(1);
  long double best = loss_ld(pts, w, bx, by);
  for (int i = 0; i <= coarse; ++i) {
    for (int k = 0; k <= coarse; ++k) {
      const long double x = lo(0) + i * step;
      const long double y = lo(1) + k * step;
      const long double v = loss_ld(pts, w, x, y);
      if (v < best) {
        best = v;
        bx = x;
        by = y;
      }
    }
  }
  const int half = 10;
  while (step > resolution) {
    const long double cx = bx;
    const long double cy = by;
    const double fine = std::max(step / 5.0, resolution);
    for (int i = -half * 5; i <= half * 5; ++i) {
      for (int k = -half * 5; k <= half * 5; ++k) {
        const long double x = cx + i * static_cast<long double>(fine);
        const long double y = cy + k * static_cast<long double>(fine);
        const long double v = loss_ld(pts, w, x, y);
        if (v < best) {
          best = v;
          bx = x;
          by = y;
        }
      }
    }
    step = fine;
  }
  GridResult r;
  r.point = Vector(2);
  r.point << static_cast<double>(bx), static_cast<double>(by);
  r.resolution = step;
  // Hessian by central differences in extended precision.
  const long double h = 1e-4L * std::max(1.0, span);
  auto f = [&](long double dx, long double dy) { return loss_ld(pts, w, bx + dx, by + dy); };
  const long double f0 = f(0, 0);
  const long double hxx = (f(h, 0) - 2 * f0 + f(-h, 0)) / (h * h);
  const long double hyy = (f(0, h) - 2 * f0 + f(0, -h)) / (h * h);
  const long double hxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
  const long double mean = (hxx + hyy) / 2;
  const long double dev = std::sqrt((hxx - hyy) * (hxx - hyy) / 4 + hxy * hxy);
  const long double lo_ev = mean - dev;
  const long double hi_ev = mean + dev;
  const double kappa = lo_ev > 0 ? static_cast<double>(hi_ev / lo_ev) : 1e12;
  r.radius = 1.5 * step * std::sqrt(std::max(kappa, 1.0) / 2.0) + step;
  return r;
}

inline double skew_objective(const Matrix& s, const Vector& x) {
  const Vector sx = s * x;
  return x.norm() * sx.norm() / x.dot(sx) - 1.0;
}

/// Local pattern search on the sphere from x: tries +-step along each
/// coordinate, renormalizes, halves the step on failure.
inline double sphere_pattern_search(const Matrix& s, Vector x, double step, double min_step) {
  x.normalize();
  double f = skew_objective(s, x);
  while (step > min_step) {
    bool improved = false;
    for (Index i = 0; i < x.size(); ++i) {
      for (double sign : {1.0, -1.0}) {
        Vector c = x;
        c(i) += sign * step;
        c.normalize();
        const double fc = skew_objective(s, c);
        if (fc > f) {
          f = fc;
          x = c;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return f;
}

/// max over the unit sphere of |x| |Sx| / x^T S x - 1. In d = 2 and 3 a full
/// angular grid at the given resolution seeds the refinement; in higher
/// dimension random directions do.
inline double sphere_skew(const Matrix& s, double resolution = 1e-3, unsigned seed = 7) {
  const Index d = s.rows();
  std::vector<std::pair<double, Vector>> seeds;
  auto keep = [&](const Vector& x) {
    seeds.emplace_back(skew_objective(s, x), x);
    if (seeds.size() > 64) {
      std::nth_element(seeds.begin(), seeds.begin() + 16, seeds.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      seeds.resize(16);
    }
  };
  const double pi = std::acos(-1.0);
  if (d == 2) {
    for (double t = 0.0; t < pi; t += resolution) {
      Vector x(2);
      x << std::cos(t), std::sin(t);
      keep(x);
    }
  } else if (d == 3) {
    // The objective is even, so the upper hemisphere suffices.
    for (double t = 0.0; t <= pi / 2; t += resolution) {
      const double st = std::sin(t);
      const double dp = st > resolution ? resolution / st : 2.0 * pi;
      for (double p = 0.0; p < 2.0 * pi; p += dp) {
        Vector x(3);
        x << st * std::cos(p), st * std::sin(p), std::cos(t);
        keep(x);
      }
    }
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < 20000; ++k) {
      Vector x(d);
      for (Index i = 0; i < d; ++i) x(i) = normal(rng);
      keep(x.normalized());
    }
  }
  double best = -1.0;
  for (const auto& [v, x] : seeds) best = std::max(best, sphere_pattern_search(s, x, 0.05, 1e-10));
  return best;
}

inline Matrix random_spd(Index d, std::mt19937_64& rng, double cond_spread = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) a(i, j) = normal(rng);
  }
  const Matrix q = a.householderQr().householderQ();
  Vector ev(d);
  std::uniform_real_distribution<double> u(-cond_spread, cond_spread);
  for (Index i = 0; i < d; ++i) ev(i) = std::exp(u(rng));
  Matrix m = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

inline Matrix random_points(Index d, Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix p(d, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < d; ++i) p(i, j) = normal(rng);
  }
  return p;
}

}  // namespace oracle

#endif  // MEDIANFORGE_TESTS_ORACLES_HPP
