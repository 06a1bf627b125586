#ifndef MEDIANFORGE_MEDIAN_SOLVERS_HPP
#define MEDIANFORGE_MEDIAN_SOLVERS_HPP

// Aggregation rules over weighted voter profiles: average, coordinate-wise
// median and the (skewed) geometric median, plus the derivatives of the
// average-of-distances loss L(z) = sum_j w_j |z - x_j|_2 (weights sum to 1).

#include "medianforge/core.hpp"
#include "medianforge/profile.hpp"
#include "medianforge/vector_core.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace medianforge {

struct MedianResult {
  Point point;
  double loss = 0.0;
  /// Norm of the minimum-norm subgradient of L at `point`.
  double grad_norm = 0.0;
  /// Bound on |point - exact minimizer|_2; +inf when the Hessian there is
  /// singular or unavailable.
  double additive_bound = kInf;
  int iterations = 0;
  /// The profile spans an affine space of dimension <= 1; the minimizer may
  /// not be unique and `point` is one of them.
  bool degenerate_dimension = false;
  bool at_voter_point = false;
};

struct GeometricMedianOptions {
  double tol_grad = 1e-10;
  int max_iterations = 20000;
  /// Newton takes over once the gradient norm drops below this ...
  double newton_switch = 1e-3;
  /// ... or after this many Weiszfeld steps, whichever comes first.
  int max_weiszfeld_steps = 50;
  /// Extra Newton steps after convergence, kept only if they reduce the
  /// gradient norm.
  int polish_steps = 3;
  std::optional<Point> initial;
};

namespace detail {

inline bool coincides(double r, const Vector& z, const Vector& x) {
  if (r == 0.0) return true;
  const double scale = std::max(z.cwiseAbs().maxCoeff(), x.cwiseAbs().maxCoeff());
  return r <= 1e-14 * scale;
}

struct Evaluation {
  Vector grad;                  // sum over non-coincident voters of w (z - x) / r
  Vector pull_sum;              // sum over non-coincident voters of (w / r) x
  double inv_dist_sum = 0.0;    // sum over non-coincident voters of w / r
  double coincident_weight = 0.0;
  double loss = 0.0;
  Index nearest = -1;
  double r_min = kInf;
};

inline Evaluation evaluate(const WeightedProfile& wp, const Vector& z) {
  const Index d = wp.dim();
  Evaluation e;
  e.grad = Vector::Zero(d);
  e.pull_sum = Vector::Zero(d);
  const Matrix& pts = wp.points();
  const Vector& w = wp.weights();
  for (Index j = 0; j < wp.size(); ++j) {
    const Vector diff = z - pts.col(j);
    const double r = diff.norm();
    e.loss += w(j) * r;
    if (r < e.r_min) {
      e.r_min = r;
      e.nearest = j;
    }
    if (coincides(r, z, pts.col(j))) {
      e.coincident_weight += w(j);
      continue;
    }
    const double a = w(j) / r;
    e.grad += a * diff;
    e.pull_sum += a * pts.col(j);
    e.inv_dist_sum += a;
  }
  return e;
}

/// Gradient of L in extended precision, for the final Newton polish and the
/// certificate. Differences z - x lose the low bits of z when |x| >> |z|.
inline Vector precise_gradient(const WeightedProfile& wp, const Vector& z) {
  const Index d = wp.dim();
  std::vector<long double> g(static_cast<std::size_t>(d), 0.0L);
  std::vector<long double> diff(static_cast<std::size_t>(d));
  const Matrix& pts = wp.points();
  for (Index j = 0; j < wp.size(); ++j) {
    long double r2 = 0.0L;
    for (Index i = 0; i < d; ++i) {
      diff[static_cast<std::size_t>(i)] = static_cast<long double>(z(i)) - pts(i, j);
      r2 += diff[static_cast<std::size_t>(i)] * diff[static_cast<std::size_t>(i)];
    }
    if (coincides(static_cast<double>(std::sqrt(r2)), z, pts.col(j))) continue;
    const long double a = wp.weights()(j) / std::sqrt(r2);
    for (Index i = 0; i < d; ++i) g[static_cast<std::size_t>(i)] += a * diff[static_cast<std::size_t>(i)];
  }
  Vector out(d);
  for (Index i = 0; i < d; ++i) out(i) = static_cast<double>(g[static_cast<std::size_t>(i)]);
  return out;
}

/// Hessian of L summed over the voters not coinciding with z.
inline Matrix regular_hessian(const WeightedProfile& wp, const Vector& z) {
  const Index d = wp.dim();
  Matrix h = Matrix::Zero(d, d);
  double trace_part = 0.0;
  const Matrix& pts = wp.points();
  const Vector& w = wp.weights();
  for (Index j = 0; j < wp.size(); ++j) {
    const Vector diff = z - pts.col(j);
    const double r = diff.norm();
    if (coincides(r, z, pts.col(j))) continue;
    const double a = w(j) / r;
    trace_part += a;
    h.noalias() -= (a / (r * r)) * diff * diff.transpose();
  }
  h.diagonal().array() += trace_part;
  return h;
}

inline void throw_if_at_voter(const WeightedProfile& wp, const Vector& z, const char* where) {
  require_same_dim(z.size(), wp.dim(), where);
  for (Index j = 0; j < wp.size(); ++j) {
    if (coincides((z - wp.points().col(j)).norm(), z, wp.points().col(j))) {
      throw Error(Errc::at_voter_point, std::string(where) + ": z coincides with voter " +
                                            std::to_string(j));
    }
  }
}

inline double min_eigenvalue(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Weighted lower median of `values`: the smallest v whose cumulative
/// weight reaches half of the total.
inline double weighted_lower_median(std::vector<std::pair<double, double>> values, double total) {
  std::sort(values.begin(), values.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double cum = 0.0;
  for (const auto& [v, w] : values) {
    cum += w;
    if (2.0 * cum >= total * (1.0 - 1e-12)) return v;
  }
  return values.back().first;
}

}  // namespace detail

inline Point average(const WeightedProfile& profile) {
  const WeightedProfile wp = profile.canonical();
  Point s = Point::Zero(wp.dim());
  for (Index j = 0; j < wp.size(); ++j) s += wp.raw_weights()(j) * wp.points().col(j);
  return s / wp.total_raw_weight();
}

/// Per-coordinate weighted median; ties between two middle values resolve to
/// the lower one.
inline Point coordinatewise_median(const WeightedProfile& wp) {
  Point out(wp.dim());
  std::vector<std::pair<double, double>> column(static_cast<std::size_t>(wp.size()));
  for (Index i = 0; i < wp.dim(); ++i) {
    for (Index j = 0; j < wp.size(); ++j) {
      column[static_cast<std::size_t>(j)] = {wp.points()(i, j), wp.raw_weights()(j)};
    }
    out(i) = detail::weighted_lower_median(column, wp.total_raw_weight());
  }
  return out;
}

inline double loss_eval(const WeightedProfile& wp, const Vector& z) {
  require_same_dim(z.size(), wp.dim(), "loss_eval");
  double s = 0.0;
  for (Index j = 0; j < wp.size(); ++j) s += wp.weights()(j) * (z - wp.points().col(j)).norm();
  return s;
}

inline Vector loss_gradient(const WeightedProfile& wp, const Vector& z) {
  detail::throw_if_at_voter(wp, z, "loss_gradient");
  return detail::evaluate(wp, z).grad;
}

inline Matrix loss_hessian(const WeightedProfile& wp, const Vector& z) {
  detail::throw_if_at_voter(wp, z, "loss_hessian");
  return detail::regular_hessian(wp, z);
}

inline ThirdDerivTensor loss_third_deriv(const WeightedProfile& wp, const Vector& z) {
  detail::throw_if_at_voter(wp, z, "loss_third_deriv");
  ThirdDerivTensor t(wp.dim());
  for (Index j = 0; j < wp.size(); ++j) {
    ThirdDerivTensor tj = euclid_third_derivative(z - wp.points().col(j));
    tj *= wp.weights()(j);
    t += tj;
  }
  return t;
}

/// The third derivative of L at z contracted with w, i.e. the matrix
/// sum_i T(i,j,k) w(i), without materializing the tensor.
inline Matrix loss_third_contract(const WeightedProfile& wp, const Vector& z, const Vector& w) {
  detail::throw_if_at_voter(wp, z, "loss_third_contract");
  require_same_dim(w.size(), wp.dim(), "loss_third_contract");
  const Index d = wp.dim();
  Matrix m = Matrix::Zero(d, d);
  double diag = 0.0;
  for (Index j = 0; j < wp.size(); ++j) {
    const Vector diff = z - wp.points().col(j);
    const double r = diff.norm();
    const Vector u = diff / r;
    const double a = wp.weights()(j) / (r * r);
    const double uw = u.dot(w);
    m.noalias() += (3.0 * a * uw) * u * u.transpose();
    m.noalias() -= a * (u * w.transpose() + w * u.transpose());
    diag -= a * uw;
  }
  m.diagonal().array() += diag;
  return m;
}

/// Minimum-norm element of the subdifferential of L at z. Voters coinciding
/// with z contribute a ball of radius equal to their weight.
inline Vector min_norm_subgradient(const WeightedProfile& wp, const Vector& z) {
  require_same_dim(z.size(), wp.dim(), "min_norm_subgradient");
  const detail::Evaluation e = detail::evaluate(wp, z);
  const double g = e.grad.norm();
  if (g <= e.coincident_weight) return Vector::Zero(wp.dim());
  return e.grad * (1.0 - e.coincident_weight / g);
}

namespace detail {

/// One damped Newton step on L. Returns false when no acceptable step was
/// found (singular Hessian or failed line search).
inline bool newton_step(const WeightedProfile& wp, const Evaluation& e, Vector& y) {
  const Matrix h = regular_hessian(wp, y);
  Eigen::LLT<Matrix> llt(h);
  if (llt.info() != Eigen::Success) return false;
  const Vector p = -llt.solve(e.grad);
  if (!p.allFinite()) return false;
  const double gtp = e.grad.dot(p);
  if (!(gtp < 0.0)) return false;
  const double gnorm = e.grad.norm();
  const Matrix& pts = wp.points();
  const Vector& w = wp.weights();
  double t = 1.0;
  for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
    const Vector step = t * p;
    const Vector cand = y + step;
    // |a + s| - |a| = (2 a.s + |s|^2) / (|a + s| + |a|), stable when s is tiny.
    double delta = 0.0;
    const double ss = step.squaredNorm();
    for (Index j = 0; j < wp.size(); ++j) {
      const Vector a = y - pts.col(j);
      const double denom = (cand - pts.col(j)).norm() + a.norm();
      if (denom > 0.0) delta += w(j) * (2.0 * a.dot(step) + ss) / denom;
    }
    if (delta <= 1e-4 * t * gtp) {
      y = cand;
      return true;
    }
    const Evaluation ec = evaluate(wp, cand);
    if (ec.coincident_weight == 0.0 && ec.grad.norm() <= 0.5 * gnorm) {
      y = cand;
      return true;
    }
  }
  return false;
}

/// Weiszfeld step with the Vardi-Zhang correction when y sits on voters.
inline Vector weiszfeld_step(const Evaluation& e, const Vector& y) {
  if (e.inv_dist_sum <= 0.0) return y;
  const Vector t = e.pull_sum / e.inv_dist_sum;
  if (e.coincident_weight == 0.0) return t;
  const double rnorm = e.grad.norm();
  const double gamma = rnorm > 0.0 ? std::min(1.0, e.coincident_weight / rnorm) : 1.0;
  return (1.0 - gamma) * t + gamma * y;
}

inline MedianResult finalize(const WeightedProfile& wp, const Vector& y, double tol, int iters,
                             bool degenerate) {
  MedianResult res;
  res.point = y;
  res.iterations = iters;
  res.degenerate_dimension = degenerate;
  const Evaluation e = evaluate(wp, y);
  res.loss = e.loss;
  res.at_voter_point = e.coincident_weight > 0.0;
  const double g = res.at_voter_point ? e.grad.norm() : precise_gradient(wp, y).norm();
  res.grad_norm = g <= e.coincident_weight ? 0.0 : g - e.coincident_weight;
  if (!degenerate) {
    const double lmin = min_eigenvalue(regular_hessian(wp, y));
    if (lmin > 0.0) res.additive_bound = std::max(tol, res.grad_norm) / lmin;
  }
  return res;
}

}  // namespace detail

/// Geometric median: Weiszfeld iterations (Vardi-Zhang corrected) started
/// from the coordinate-wise median, then damped Newton. Voter points are
/// tested for optimality as the iterate approaches them.
inline MedianResult geometric_median(const WeightedProfile& profile,
                                     const GeometricMedianOptions& opt) {
  if (!(opt.tol_grad > 0.0)) throw Error(Errc::invalid_argument, "tol_grad must be positive");
  const WeightedProfile wp = profile.canonical();
  const bool degenerate = affine_dimension(wp.points()) <= 1;
  Vector y = opt.initial ? *opt.initial : coordinatewise_median(wp);
  require_same_dim(y.size(), wp.dim(), "geometric_median initial point");

  int weiszfeld_steps = 0;
  Index tested = -1;
  double tested_r = kInf;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const detail::Evaluation e = detail::evaluate(wp, y);
    if (e.coincident_weight > 0.0) {
      if (e.grad.norm() <= e.coincident_weight + opt.tol_grad) return detail::finalize(wp, y, opt.tol_grad, it, degenerate);
      y = detail::weiszfeld_step(e, y);
      ++weiszfeld_steps;
      continue;
    }
    const double gnorm = e.grad.norm();
    if (gnorm <= opt.tol_grad) {
      Vector grad = detail::precise_gradient(wp, y);
      double best = grad.norm();
      for (int k = 0; k < opt.polish_steps && best > 0.0; ++k) {
        Eigen::LLT<Matrix> llt(detail::regular_hessian(wp, y));
        if (llt.info() != Eigen::Success) break;
        const Vector cand = y - llt.solve(grad);
        if (detail::evaluate(wp, cand).coincident_weight > 0.0) break;
        const Vector gc = detail::precise_gradient(wp, cand);
        if (!(gc.norm() < best)) break;
        best = gc.norm();
        grad = gc;
        y = cand;
      }
      return detail::finalize(wp, y, opt.tol_grad, it, degenerate);
    }
    // The minimizer may be a voter point, where L is not differentiable and
    // neither Weiszfeld nor Newton converge quickly.
    if (e.nearest >= 0 && e.r_min < 0.1 * e.loss && (e.nearest != tested || e.r_min < 0.5 * tested_r)) {
      tested = e.nearest;
      tested_r = e.r_min;
      const Vector x = wp.point(e.nearest);
      const detail::Evaluation ex = detail::evaluate(wp, x);
      if (ex.grad.norm() <= ex.coincident_weight + opt.tol_grad) return detail::finalize(wp, x, opt.tol_grad, it, degenerate);
    }
    bool stepped = false;
    if (!degenerate && (gnorm < opt.newton_switch || weiszfeld_steps >= opt.max_weiszfeld_steps)) {
      stepped = detail::newton_step(wp, e, y);
    }
    if (!stepped) {
      y = detail::weiszfeld_step(e, y);
      ++weiszfeld_steps;
    }
  }
  return detail::finalize(wp, y, opt.tol_grad, it, degenerate);
}

inline MedianResult geometric_median(const WeightedProfile& profile, double tol_grad = 1e-10) {
  GeometricMedianOptions opt;
  opt.tol_grad = tol_grad;
  return geometric_median(profile, opt);
}

/// Minimizer of sum_j w_j |Sigma (z - x_j)|_2, computed as
/// Sigma^{-1} Gm(Sigma x). grad_norm is the Sigma^{-1}-norm of the skewed
/// gradient; additive_bound bounds |Sigma (point - exact)|_2.
inline MedianResult skewed_geometric_median(const WeightedProfile& profile, const SpdMatrix& sigma,
                                            const GeometricMedianOptions& opt) {
  require_same_dim(sigma.dim(), profile.dim(), "skewed_geometric_median");
  const Matrix& s = sigma.matrix();
  const WeightedProfile mapped = profile.affine_image(s, Vector::Zero(profile.dim()));
  GeometricMedianOptions inner = opt;
  if (opt.initial) inner.initial = s * *opt.initial;
  MedianResult r = geometric_median(mapped, inner);
  r.point = s.llt().solve(r.point);
  return r;
}

inline MedianResult skewed_geometric_median(const WeightedProfile& profile, const SpdMatrix& sigma,
                                            double tol_grad = 1e-10) {
  GeometricMedianOptions opt;
  opt.tol_grad = tol_grad;
  return skewed_geometric_median(profile, sigma, opt);
}

}  // namespace medianforge

#endif  // MEDIANFORGE_MEDIAN_SOLVERS_HPP
