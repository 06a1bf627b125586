#ifndef MEDIANFORGE_STRATEGY_ANALYSIS_HPP
#define MEDIANFORGE_STRATEGY_ANALYSIS_HPP

// Manipulability of the geometric median by a single strategic voter
// (voter 0) facing V honest voters with loss L_{1:V}:
//   * the achievable set A_V = { z : some h in dL_{1:V}(z) has |h| <= 1/V }
//     is exactly the set of medians voter 0 can force;
//   * best responses, found by projecting theta0 onto A_V and, separately,
//     by derivative-free search over the reported vote;
//   * sufficient conditions for alpha-strategyproofness checked on samples;
//   * the Byzantine displacement ball for a minority of adversaries.

#include "medianforge/core.hpp"
#include "medianforge/median_solvers.hpp"
#include "medianforge/nelder_mead.hpp"
#include "medianforge/profile.hpp"
#include "medianforge/skewness.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace medianforge {

/// Loss Hessian at the geometric median; the finite-sample stand-in for the
/// Hessian of the population loss at its minimizer.
inline SpdMatrix hessian_at_median(const VoterProfile& profile, double tol = 1e-10) {
  if (profile.dim() < 2 || affine_dimension(profile.points()) < 2) {
    throw Error(Errc::degenerate_dimension, "hessian_at_median needs a profile spanning >= 2 dimensions");
  }
  const WeightedProfile wp(profile);
  const MedianResult gm = geometric_median(wp, tol);
  const Matrix h = loss_hessian(wp, gm.point);
  return SpdMatrix(h);
}

class AchievableSet {
 public:
  explicit AchievableSet(const VoterProfile& honest)
      : honest_(honest), count_(honest.voter_count()), radius_(1.0 / static_cast<double>(count_)) {}

  const WeightedProfile& honest() const noexcept { return honest_; }
  std::int64_t voter_count() const noexcept { return count_; }
  /// 1 / V.
  double radius() const noexcept { return radius_; }

  /// Norm of the minimum-norm subgradient of L_{1:V} at z.
  double gradient_norm(const Vector& z) const { return min_norm_subgradient(honest_, z).norm(); }

  bool contains(const Vector& z) const { return gradient_norm(z) <= radius_; }
  /// Membership up to a relative slack, for points only known to
  /// certificate accuracy (a manipulated median lies on the boundary).
  bool contains(const Vector& z, double relative_slack) const {
    return gradient_norm(z) <= radius_ * (1.0 + relative_slack);
  }

 private:
  WeightedProfile honest_;
  std::int64_t count_;
  double radius_;
};

inline bool achievable_contains(const AchievableSet& a, const Point& z) { return a.contains(z); }

/// Geometric median of `honest` (weighted by multiplicity) plus one vote.
inline MedianResult median_with_vote(const WeightedProfile& honest, const Point& vote,
                                     double tol_grad = 1e-10) {
  Matrix pts(honest.dim(), honest.size() + 1);
  pts.leftCols(honest.size()) = honest.points();
  pts.col(honest.size()) = vote;
  Vector w(honest.size() + 1);
  w.head(honest.size()) = honest.raw_weights();
  w(honest.size()) = 1.0;
  GeometricMedianOptions opt;
  opt.tol_grad = tol_grad;
  opt.initial = vote;
  return geometric_median(WeightedProfile(std::move(pts), std::move(w)), opt);
}

struct StrategyCandidate {
  std::string path;
  Point vote;
  Point median;
  double distance = kInf;
  double additive_bound = kInf;
  bool ok = false;
  std::string error;
};

struct StrategyReport {
  Point theta0;
  Point truthful_median;
  Point strategic_vote;
  Point manipulated_median;
  double truthful_dist = 0.0;
  double strategic_dist = 0.0;
  /// truthful_dist / strategic_dist - 1. An empirical lower bound on the
  /// worst-case gain over all reports.
  double gain_alpha = 0.0;
  Matrix preference_norm;
  /// Skew of the aggregation rule (identity for the plain geometric median).
  Matrix aggregator_skew;
  /// theta0 already lies in the achievable set, so truth is optimal.
  bool exact_capture = false;
  std::string chosen_path;
  std::vector<StrategyCandidate> candidates;
  /// Gradient tolerance actually used for the median solves.
  double eval_tol_grad = 0.0;
};

struct BestResponseOptions {
  int restarts = 5;
  std::uint64_t seed = 0;
  double tol_grad = 1e-10;
  bool use_projection = true;
  bool use_black_box = true;
  /// Nelder-Mead evaluations per restart, per dimension plus one.
  int black_box_evals_per_vertex = 120;
  /// Extra votes to evaluate (e.g. an analytic construction).
  std::vector<Point> extra_votes;
};

namespace detail {

/// Projection of theta0 onto { z : V^2 |grad L(z)|^2 <= 1 } in the norm
/// |M (z - theta0)|, by exterior penalty with continuation followed by a
/// Newton solve of the KKT system.
class ProjectionProblem {
 public:
  ProjectionProblem(const WeightedProfile& honest, double count, const Matrix& pref, const Vector& theta0)
      : honest_(honest), n2_(count * count), mtm_(pref.transpose() * pref), theta0_(theta0) {}

  double q(const Vector& z) const { return n2_ * min_norm_subgradient(honest_, z).squaredNorm() - 1.0; }

  struct Derivs {
    double q;
    Vector dq;
    Matrix d2q;
  };

  Derivs derivs(const Vector& z) const {
    const Vector g = loss_gradient(honest_, z);
    const Matrix h = loss_hessian(honest_, z);
    const Matrix t = loss_third_contract(honest_, z, g);
    Derivs r;
    r.q = n2_ * g.squaredNorm() - 1.0;
    r.dq = 2.0 * n2_ * h * g;
    r.d2q = 2.0 * n2_ * (h * h + t);
    r.d2q = 0.5 * (r.d2q + r.d2q.transpose()).eval();
    return r;
  }

  double objective(const Vector& z) const {
    const Vector e = z - theta0_;
    return 0.5 * e.dot(mtm_ * e);
  }

  /// Exterior penalty minimization for increasing mu; returns the last iterate.
  Vector penalty_path(Vector z, double scale2) const {
    for (double mu = 1.0; mu <= 1e12; mu *= 10.0) z = penalty_minimize(z, mu, scale2);
    return z;
  }

  /// Newton iterations on the KKT system of the equality-constrained problem.
  Vector kkt_polish(Vector z, double length) const {
    const Index d = z.size();
    auto residual = [&](const Vector& x, double nu, Derivs& dv) {
      dv = derivs(x);
      const Vector r1 = mtm_ * (x - theta0_) + nu * dv.dq;
      const double s1 = mtm_.norm() * length;
      return (r1 / s1).squaredNorm() + dv.q * dv.q;
    };
    Derivs dv;
    try {
      dv = derivs(z);
    } catch (const Error&) {
      return z;
    }
    const Vector grad_f = mtm_ * (z - theta0_);
    const double dq2 = dv.dq.squaredNorm();
    if (!(dq2 > 0.0)) return z;
    double nu = -grad_f.dot(dv.dq) / dq2;
    double merit = residual(z, nu, dv);
    for (int it = 0; it < 40 && merit > 1e-30; ++it) {
      Matrix k = Matrix::Zero(d + 1, d + 1);
      k.topLeftCorner(d, d) = mtm_ + nu * dv.d2q;
      k.block(0, d, d, 1) = dv.dq;
      k.block(d, 0, 1, d) = dv.dq.transpose();
      Vector rhs(d + 1);
      rhs.head(d) = -(mtm_ * (z - theta0_) + nu * dv.dq);
      rhs(d) = -dv.q;
      const Vector step = k.fullPivLu().solve(rhs);
      if (!step.allFinite()) break;
      bool accepted = false;
      double t = 1.0;
      for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
        const Vector zc = z + t * step.head(d);
        const double nuc = nu + t * step(d);
        Derivs dc;
        double mc;
        try {
          mc = residual(zc, nuc, dc);
        } catch (const Error&) {
          continue;
        }
        if (mc < merit) {
          z = zc;
          nu = nuc;
          merit = mc;
          dv = dc;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    return z;
  }

 private:
  Vector penalty_minimize(Vector z, double mu, double scale2) const {
    const Index d = z.size();
    auto value = [&](const Vector& x) {
      const double qx = q(x);
      const double viol = qx > 0.0 ? qx : 0.0;
      return objective(x) / scale2 + 0.5 * mu * viol * viol;
    };
    double fz = value(z);
    for (int it = 0; it < 100; ++it) {
      Vector grad = mtm_ * (z - theta0_) / scale2;
      Matrix hess = mtm_ / scale2;
      try {
        const Derivs dv = derivs(z);
        if (dv.q > 0.0) {
          grad += mu * dv.q * dv.dq;
          hess += mu * (dv.dq * dv.dq.transpose() + dv.q * dv.d2q);
        }
      } catch (const Error&) {
        return z;
      }
      Vector p;
      double shift = 0.0;
      for (int attempt = 0; attempt < 60; ++attempt) {
        Matrix hs = hess;
        hs.diagonal().array() += shift;
        Eigen::LLT<Matrix> llt(hs);
        if (llt.info() == Eigen::Success) {
          p = -llt.solve(grad);
          break;
        }
        shift = shift == 0.0 ? 1e-8 * (hess.diagonal().cwiseAbs().maxCoeff() + 1.0) : 10.0 * shift;
      }
      if (p.size() != d || !p.allFinite()) break;
      const double slope = grad.dot(p);
      if (!(slope < 0.0)) break;
      double t = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
        const Vector zc = z + t * p;
        const double fc = value(zc);
        if (fc <= fz + 1e-4 * t * slope) {
          accepted = (z - zc).norm() > 1e-16 * (1.0 + z.norm());
          z = zc;
          fz = fc;
          break;
        }
      }
      if (!accepted) break;
    }
    return z;
  }

  const WeightedProfile& honest_;
  double n2_;
  Matrix mtm_;
  Vector theta0_;
};

inline bool lex_less(const Vector& a, const Vector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return false;
}

/// Best response in working coordinates where the aggregation rule is the
/// plain geometric median and voter 0 minimizes |pref (g - theta0)|_2.
inline StrategyReport respond(const Point& theta0, const WeightedProfile& honest, double count,
                              const Matrix& pref, const BestResponseOptions& opt) {
  const Index d = honest.dim();
  require_same_dim(theta0.size(), d, "best_response theta0");
  if (affine_dimension(honest.points()) < 2) {
    throw Error(Errc::degenerate_dimension, "best_response needs honest voters spanning >= 2 dimensions");
  }
  auto dist = [&](const Vector& g) { return (pref * (g - theta0)).norm(); };

  StrategyReport rep;
  rep.theta0 = theta0;
  // Distances compared here can be far below tol_grad / lambda_min; tighten
  // the solves until the truthful certificate is small against them.
  double tol = opt.tol_grad;
  MedianResult truthful = median_with_vote(honest, theta0, tol);
  while (tol > 1e-16 && truthful.additive_bound > 1e-6 * dist(truthful.point)) {
    tol *= 1e-2;
    truthful = median_with_vote(honest, theta0, tol);
  }
  rep.truthful_median = truthful.point;
  rep.truthful_dist = dist(truthful.point);
  rep.eval_tol_grad = tol;

  StrategyCandidate truth{"truthful", theta0, truthful.point, rep.truthful_dist, truthful.additive_bound, true, {}};
  rep.candidates.push_back(truth);

  const double threshold = 1.0 / count;
  if (min_norm_subgradient(honest, theta0).norm() <= threshold) rep.exact_capture = true;

  auto evaluate_vote = [&](const std::string& path, const Vector& vote) {
    StrategyCandidate c;
    c.path = path;
    c.vote = vote;
    try {
      const MedianResult m = median_with_vote(honest, vote, tol);
      c.median = m.point;
      c.distance = dist(m.point);
      c.additive_bound = m.additive_bound;
      c.ok = c.median.allFinite();
    } catch (const std::exception& ex) {
      c.error = ex.what();
    }
    return c;
  };

  if (!rep.exact_capture && rep.truthful_dist > 0.0) {
    const MedianResult honest_gm = geometric_median(honest, tol);

    if (opt.use_projection) {
      ProjectionProblem prob(honest, count, pref, theta0);
      // Boundary crossing on the segment from the honest median to theta0.
      double lo = 0.0;
      double hi = 1.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (prob.q(honest_gm.point + mid * (theta0 - honest_gm.point)) <= 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const Vector crossing = honest_gm.point + lo * (theta0 - honest_gm.point);
      const double length = (theta0 - crossing).norm();
      const double scale2 = std::max(2.0 * prob.objective(crossing), 1e-300);
      const std::vector<std::pair<std::string, Vector>> starts = {
          {"projection:boundary-start", crossing}, {"projection:median-start", honest_gm.point}};
      for (const auto& [name, start] : starts) {
        try {
          Vector z = prob.penalty_path(start, scale2);
          z = prob.kkt_polish(z, std::max(length, 1e-300));
          if (prob.q(z) > 0.0) {
            // Pull back along the segment to the honest median until feasible.
            double a = 0.0;
            double b = 1.0;
            for (int it = 0; it < 200; ++it) {
              const double mid = 0.5 * (a + b);
              if (prob.q(z + mid * (honest_gm.point - z)) <= 0.0) {
                b = mid;
              } else {
                a = mid;
              }
            }
            z = z + b * (honest_gm.point - z);
          }
          rep.candidates.push_back(evaluate_vote(name, z));
        } catch (const std::exception& ex) {
          StrategyCandidate c;
          c.path = name;
          c.error = ex.what();
          rep.candidates.push_back(c);
        }
      }
    }

    if (opt.use_black_box) {
      std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
      std::normal_distribution<double> normal(0.0, 1.0);
      const double scale = (theta0 - truthful.point).norm();
      auto objective = [&](const Vector& vote) {
        try {
          const MedianResult m = median_with_vote(honest, vote, tol);
          return dist(m.point);
        } catch (const std::exception&) {
          return kInf;
        }
      };
      Vector best_x = theta0;
      double best_f = rep.truthful_dist;
      NelderMeadOptions nm;
      nm.max_evaluations = opt.black_box_evals_per_vertex * static_cast<int>(d + 1);
      nm.x_tol = 1e-10 * scale;
      for (int r = 0; r < std::max(1, opt.restarts); ++r) {
        Matrix basis(d, d);
        for (Index i = 0; i < d; ++i) {
          for (Index j = 0; j < d; ++j) basis(i, j) = normal(rng);
        }
        const Matrix q = basis.householderQr().householderQ();
        const double size = scale / static_cast<double>(1 + r);
        std::vector<Vector> simplex{best_x};
        for (Index i = 0; i < d; ++i) simplex.push_back(best_x + size * q.col(i));
        const NelderMeadResult res = nelder_mead(objective, simplex, nm);
        if (res.value < best_f) {
          best_f = res.value;
          best_x = res.x;
        }
      }
      rep.candidates.push_back(evaluate_vote("black-box", best_x));
    }
  }

  for (std::size_t i = 0; i < opt.extra_votes.size(); ++i) {
    rep.candidates.push_back(evaluate_vote("extra:" + std::to_string(i), opt.extra_votes[i]));
  }

  const StrategyCandidate* best = &rep.candidates.front();
  for (const auto& c : rep.candidates) {
    if (!c.ok) continue;
    if (c.distance < best->distance || (c.distance == best->distance && lex_less(c.vote, best->vote))) {
      best = &c;
    }
  }
  rep.chosen_path = best->path;
  rep.strategic_vote = best->vote;
  rep.manipulated_median = best->median;
  rep.strategic_dist = best->distance;
  if (rep.strategic_dist > 0.0) {
    rep.gain_alpha = rep.truthful_dist / rep.strategic_dist - 1.0;
  } else {
    rep.gain_alpha = rep.truthful_dist > 0.0 ? kInf : 0.0;
  }
  return rep;
}

}  // namespace detail

/// Best strategic vote for voter 0 with preference |S (g - theta0)|_2 against
/// the plain geometric median of theta0-or-vote plus `honest`.
inline StrategyReport best_response(const Point& theta0, const VoterProfile& honest, const SpdMatrix& pref,
                                    const BestResponseOptions& opt = {}) {
  require_same_dim(pref.dim(), honest.dim(), "best_response preference matrix");
  const WeightedProfile wp(honest);
  StrategyReport rep = detail::respond(theta0, wp, static_cast<double>(honest.voter_count()), pref.matrix(), opt);
  rep.preference_norm = pref.matrix();
  rep.aggregator_skew = Matrix::Identity(honest.dim(), honest.dim());
  return rep;
}

/// Same against the Sigma-skewed geometric median. Works in the coordinates
/// y = Sigma z, where the rule is the plain median and the preference map
/// becomes S Sigma^{-1}.
inline StrategyReport best_response_skewed(const Point& theta0, const VoterProfile& honest, const SpdMatrix& pref,
                                           const SpdMatrix& sigma, BestResponseOptions opt = {}) {
  require_same_dim(pref.dim(), honest.dim(), "best_response_skewed preference matrix");
  require_same_dim(sigma.dim(), honest.dim(), "best_response_skewed skew matrix");
  const Matrix& s = sigma.matrix();
  const Matrix s_inv = sigma.inverse();
  const WeightedProfile mapped(honest.affine_image(s, Vector::Zero(honest.dim())));
  for (auto& v : opt.extra_votes) v = s * v;
  StrategyReport rep = detail::respond(s * theta0, mapped, static_cast<double>(honest.voter_count()),
                                       pref.matrix() * s_inv, opt);
  auto back = [&](Point& p) {
    if (p.size() > 0) p = s_inv * p;
  };
  back(rep.theta0);
  back(rep.truthful_median);
  back(rep.strategic_vote);
  back(rep.manipulated_median);
  for (auto& c : rep.candidates) {
    back(c.vote);
    back(c.median);
  }
  rep.preference_norm = pref.matrix();
  rep.aggregator_skew = s;
  return rep;
}

struct ConditionCheckOptions {
  /// Unit directions for the containment condition; 0 means 64 * d.
  int directions = 0;
  /// Ball samples for the curvature and skewness conditions.
  int ball_samples = 256;
  std::uint64_t seed = 0;
  double tol_grad = 1e-10;
  /// Condition 4 passes when the maximal sampled skewness is <= this.
  double alpha_target = kInf;
};

/// Sampled evaluation of the four sufficient conditions for
/// alpha-strategyproofness around the honest median g:
///   1. smoothness: no voter within 2 beta of g;
///   2. containment: u^T grad L(g + beta u) > 1/V on sampled unit u;
///   3. convexity of A_V: HH + T[grad L] is PSD on sampled points of B(g, beta);
///   4. skewness: alpha = max Skew(Hessian) over the same samples.
struct ConditionReport {
  double beta = 0.0;
  Point median;
  double threshold = 0.0;

  bool smoothness = false;
  double min_voter_distance = kInf;

  bool contains = false;
  double min_directional_gradient = kInf;
  Point worst_direction;

  bool convex = false;
  double min_convexity_eigenvalue = kInf;
  Point worst_convexity_point;

  bool bounded_skewness = false;
  double alpha = 0.0;
  Point worst_skew_point;

  std::string failure;

  bool all_pass() const { return smoothness && contains && convex && bounded_skewness; }
};

inline ConditionReport condition_checker(const VoterProfile& honest, double beta,
                                         const ConditionCheckOptions& opt = {}) {
  if (!(beta > 0.0)) throw Error(Errc::invalid_argument, "beta must be positive");
  const Index d = honest.dim();
  const WeightedProfile wp(honest);
  ConditionReport rep;
  rep.beta = beta;
  rep.threshold = 1.0 / static_cast<double>(honest.voter_count());
  rep.median = geometric_median(wp, opt.tol_grad).point;

  for (Index j = 0; j < wp.size(); ++j) {
    rep.min_voter_distance = std::min(rep.min_voter_distance, (wp.point(j) - rep.median).norm());
  }
  rep.smoothness = rep.min_voter_distance > 2.0 * beta;

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto random_unit = [&]() {
    Vector u(d);
    for (Index i = 0; i < d; ++i) u(i) = normal(rng);
    return Vector(u / u.norm());
  };

  try {
    const int ndir = opt.directions > 0 ? opt.directions : static_cast<int>(64 * d);
    for (int k = 0; k < ndir; ++k) {
      const Vector u = random_unit();
      const double val = u.dot(loss_gradient(wp, rep.median + beta * u));
      if (val < rep.min_directional_gradient) {
        rep.min_directional_gradient = val;
        rep.worst_direction = u;
      }
    }
    rep.contains = rep.min_directional_gradient > rep.threshold;

    for (int k = 0; k < opt.ball_samples; ++k) {
      const double radius = beta * std::pow(unif(rng), 1.0 / static_cast<double>(d));
      const Vector z = rep.median + radius * random_unit();
      const Vector g = loss_gradient(wp, z);
      const Matrix h = loss_hessian(wp, z);
      Matrix c = h * h + loss_third_contract(wp, z, g);
      c = 0.5 * (c + c.transpose()).eval();
      const double lmin = detail::min_eigenvalue(c);
      if (lmin < rep.min_convexity_eigenvalue) {
        rep.min_convexity_eigenvalue = lmin;
        rep.worst_convexity_point = z;
      }
      const double sk = skewness(SpdMatrix(h)).value;
      if (sk > rep.alpha) {
        rep.alpha = sk;
        rep.worst_skew_point = z;
      }
    }
    rep.convex = rep.min_convexity_eigenvalue >= 0.0;
    rep.bounded_skewness = rep.alpha <= opt.alpha_target;
  } catch (const Error& ex) {
    rep.smoothness = false;
    rep.failure = ex.what();
  }
  return rep;
}

struct ByzantineBall {
  Point truthful_median;
  /// Largest distance from a truthful vote to the truthful median.
  double delta = 0.0;
  double radius = 0.0;
};

/// Ball around the truthful median that contains the geometric median of the
/// truthful votes plus any `num_strategic` adversarial votes:
/// radius = (1 - (|S|/|T|)^2)^{-1/2} * delta.
inline ByzantineBall byzantine_bound(const VoterProfile& truthful, std::int64_t num_strategic,
                                     double tol_grad = 1e-10) {
  const std::int64_t t = truthful.voter_count();
  if (num_strategic < 0) throw Error(Errc::invalid_argument, "negative number of strategic voters");
  if (num_strategic >= t) {
    throw Error(Errc::majority_attack, "strategic voters (" + std::to_string(num_strategic) +
                                           ") are not a strict minority of " + std::to_string(t + num_strategic));
  }
  ByzantineBall ball;
  ball.truthful_median = geometric_median(WeightedProfile(truthful), tol_grad).point;
  for (Index j = 0; j < truthful.size(); ++j) {
    ball.delta = std::max(ball.delta, (truthful.point(j) - ball.truthful_median).norm());
  }
  const double rho = static_cast<double>(num_strategic) / static_cast<double>(t);
  ball.radius = ball.delta / std::sqrt(1.0 - rho * rho);
  return ball;
}

struct NoShoeReport {
  /// Skew(Sv^{-1} H Sv^{-1}) for H = Sv^2; zero by construction.
  double skew_v = 0.0;
  /// Skew(Sw^{-1} Sv^2 Sw^{-1}).
  double skew_w = 0.0;
  bool strictly_positive = false;
};

/// With the only Hessian (up to scale) that makes voter v's skewness vanish,
/// H = Sv^2, returns the skewness left for voter w.
inline NoShoeReport no_shoe_check(const SpdMatrix& sv, const SpdMatrix& sw) {
  require_same_dim(sv.dim(), sw.dim(), "no_shoe_check");
  const Matrix h = sv.matrix() * sv.matrix();
  const Matrix sv_inv = sv.inverse();
  const Matrix sw_inv = sw.inverse();
  const Matrix mv = sv_inv * h * sv_inv;
  const Matrix mw = sw_inv * h * sw_inv;
  NoShoeReport r;
  r.skew_v = skewness(SpdMatrix(0.5 * (mv + mv.transpose()))).value;
  r.skew_w = skewness(SpdMatrix(0.5 * (mw + mw.transpose()))).value;
  r.strictly_positive = r.skew_w > 1e-9;
  return r;
}

}  // namespace medianforge

#endif  // MEDIANFORGE_STRATEGY_ANALYSIS_HPP
