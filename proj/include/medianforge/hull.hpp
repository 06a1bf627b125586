#ifndef MEDIANFORGE_HULL_HPP
#define MEDIANFORGE_HULL_HPP

#include "medianforge/core.hpp"

#include <algorithm>
#include <vector>

namespace medianforge {

/// Minimum-norm point of the convex hull of the columns of `pts` (Wolfe's
/// algorithm).
inline Vector min_norm_hull_point(const Matrix& pts, int max_major = 10000) {
  const Index n = pts.cols();
  if (n == 0) throw Error(Errc::invalid_argument, "empty point set");
  const double scale2 = pts.colwise().squaredNorm().maxCoeff();
  if (scale2 == 0.0) return Vector::Zero(pts.rows());
  const double tol = 1e-14 * scale2;

  Index start = 0;
  pts.colwise().squaredNorm().minCoeff(&start);
  std::vector<Index> active{start};
  std::vector<double> lambda{1.0};
  Vector x = pts.col(start);

  for (int major = 0; major < max_major; ++major) {
    Index j = 0;
    (x.transpose() * pts).minCoeff(&j);
    if (x.dot(pts.col(j)) >= x.squaredNorm() - tol) break;
    if (std::find(active.begin(), active.end(), j) != active.end()) break;
    active.push_back(j);
    lambda.push_back(0.0);

    for (int minor = 0; minor < 1000; ++minor) {
      const Index k = static_cast<Index>(active.size());
      Matrix p(pts.rows(), k);
      for (Index i = 0; i < k; ++i) p.col(i) = pts.col(active[static_cast<std::size_t>(i)]);
      // Affine minimizer: argmin |P mu| subject to sum(mu) = 1.
      Matrix kkt = Matrix::Zero(k + 1, k + 1);
      kkt.topLeftCorner(k, k) = p.transpose() * p;
      kkt.block(0, k, k, 1).setOnes();
      kkt.block(k, 0, 1, k).setOnes();
      Vector rhs = Vector::Zero(k + 1);
      rhs(k) = 1.0;
      const Vector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      const Vector mu = sol.head(k);
      if (mu.minCoeff() > 1e-14) {
        for (Index i = 0; i < k; ++i) lambda[static_cast<std::size_t>(i)] = mu(i);
        break;
      }
      double theta = 1.0;
      for (Index i = 0; i < k; ++i) {
        const double li = lambda[static_cast<std::size_t>(i)];
        if (mu(i) <= 1e-14 && li - mu(i) > 0.0) theta = std::min(theta, li / (li - mu(i)));
      }
      std::vector<Index> next_active;
      std::vector<double> next_lambda;
      for (Index i = 0; i < k; ++i) {
        const double li = (1.0 - theta) * lambda[static_cast<std::size_t>(i)] + theta * mu(i);
        if (li > 1e-14) {
          next_active.push_back(active[static_cast<std::size_t>(i)]);
          next_lambda.push_back(li);
        }
      }
      if (next_active.empty()) break;
      active = std::move(next_active);
      lambda = std::move(next_lambda);
      double s = 0.0;
      for (double l : lambda) s += l;
      for (double& l : lambda) l /= s;
    }
    x = Vector::Zero(pts.rows());
    for (std::size_t i = 0; i < active.size(); ++i) x += lambda[i] * pts.col(active[i]);
  }
  return x;
}

/// Euclidean distance from z to the convex hull of the columns of `pts`.
inline double hull_distance(const Matrix& pts, const Vector& z) {
  require_same_dim(z.size(), pts.rows(), "hull_distance");
  return min_norm_hull_point(pts.colwise() - z).norm();
}

}  // namespace medianforge

#endif  // MEDIANFORGE_HULL_HPP
