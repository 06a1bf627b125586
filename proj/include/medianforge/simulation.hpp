#ifndef MEDIANFORGE_SIMULATION_HPP
#define MEDIANFORGE_SIMULATION_HPP

// Scenario generators and Monte Carlo experiments. Every trial derives its own
// seed from (config seed, V index, trial index), so results do not depend on
// how trials are scheduled across threads.

#include "medianforge/core.hpp"
#include "medianforge/median_solvers.hpp"
#include "medianforge/profile.hpp"
#include "medianforge/skewness.hpp"
#include "medianforge/strategy_analysis.hpp"
#include "medianforge/vector_core.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace medianforge {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Runs fn(i) for i in [0, n) on `threads` workers. Exceptions escaping fn
/// are rethrown after all workers finish.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

enum class DistributionKind { isotropic_gaussian, diagonal_gaussian, four_corner, uniform_ball };

inline const char* to_string(DistributionKind k) {
  switch (k) {
    case DistributionKind::isotropic_gaussian: return "isotropic-gaussian";
    case DistributionKind::diagonal_gaussian: return "diagonal-gaussian";
    case DistributionKind::four_corner: return "four-corner";
    case DistributionKind::uniform_ball: return "uniform-ball";
  }
  return "unknown";
}

struct PreferenceDistribution {
  DistributionKind kind = DistributionKind::isotropic_gaussian;
  Index dim = 2;
  /// Per-coordinate standard deviations (diagonal-gaussian).
  Vector sigma;
  /// Corner abscissa (four-corner).
  double x = 8.0;
  /// Radius (uniform-ball).
  double radius = 1.0;

  static PreferenceDistribution isotropic(Index d) {
    PreferenceDistribution p;
    p.kind = DistributionKind::isotropic_gaussian;
    p.dim = d;
    return p;
  }
  static PreferenceDistribution diagonal(const Vector& sigma) {
    PreferenceDistribution p;
    p.kind = DistributionKind::diagonal_gaussian;
    p.dim = sigma.size();
    p.sigma = sigma;
    return p;
  }
  static PreferenceDistribution four_corner(double x) {
    PreferenceDistribution p;
    p.kind = DistributionKind::four_corner;
    p.dim = 2;
    p.x = x;
    return p;
  }
  static PreferenceDistribution uniform_ball(Index d, double r) {
    PreferenceDistribution p;
    p.kind = DistributionKind::uniform_ball;
    p.dim = d;
    p.radius = r;
    return p;
  }

  void validate() const {
    if (dim < 1) throw Error(Errc::invalid_argument, "distribution dimension must be >= 1");
    switch (kind) {
      case DistributionKind::diagonal_gaussian:
        if (sigma.size() != dim || !(sigma.array() > 0.0).all() || !sigma.allFinite()) {
          throw Error(Errc::invalid_argument, "diagonal-gaussian needs dim positive standard deviations");
        }
        break;
      case DistributionKind::four_corner:
        if (dim != 2 || !(x > 0.0) || !std::isfinite(x)) {
          throw Error(Errc::invalid_argument, "four-corner needs dim 2 and X > 0");
        }
        break;
      case DistributionKind::uniform_ball:
        if (!(radius > 0.0) || !std::isfinite(radius)) throw Error(Errc::invalid_argument, "uniform-ball radius must be positive");
        break;
      case DistributionKind::isotropic_gaussian: break;
    }
  }
};

/// V i.i.d. draws, or for four-corner the four atoms with multiplicity V each.
inline VoterProfile sample_profile(const PreferenceDistribution& dist, std::int64_t v, std::uint64_t seed) {
  dist.validate();
  if (v < 1) throw Error(Errc::invalid_argument, "V must be >= 1");
  const Index d = dist.dim;
  if (dist.kind == DistributionKind::four_corner) {
    Matrix pts(2, 4);
    pts << -dist.x, -dist.x, dist.x, dist.x, -1.0, 1.0, -1.0, 1.0;
    return VoterProfile(pts, std::vector<std::int64_t>(4, v));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix pts(d, static_cast<Index>(v));
  for (Index j = 0; j < pts.cols(); ++j) {
    for (Index i = 0; i < d; ++i) pts(i, j) = normal(rng);
    switch (dist.kind) {
      case DistributionKind::diagonal_gaussian:
        pts.col(j).array() *= dist.sigma.array();
        break;
      case DistributionKind::uniform_ball: {
        const double r = dist.radius * std::pow(unif(rng), 1.0 / static_cast<double>(d));
        pts.col(j) *= r / pts.col(j).norm();
        break;
      }
      default: break;
    }
  }
  return VoterProfile(std::move(pts));
}

// ---------------------------------------------------------------------------
// Four-corner instance with profile (+-X, +-1), each corner V times.

struct Theorem1Instance {
  double x = 0.0;
  std::int64_t v = 0;
  /// Root of |grad L0(alpha (X^3, 1))| = 1/V, L0 the sum of the four distances.
  double alpha_v = 0.0;
  Point g_v;
  Point theta0;
  Point strategic_vote;
  /// Hessian of L0 at the origin.
  Matrix hessian;
  VoterProfile profile{Matrix::Zero(2, 1)};
};

namespace detail {

inline Matrix four_corners(double x) {
  Matrix pts(2, 4);
  pts << -x, -x, x, x, -1.0, 1.0, -1.0, 1.0;
  return pts;
}

/// Sum of the four unit pulls, accumulated in extended precision: at V in
/// the thousands the median shifts by about V times any error in its norm.
inline std::array<long double, 2> corner_sum_gradient(const Matrix& corners, long double zx, long double zy) {
  std::array<long double, 2> g{0.0L, 0.0L};
  for (Index j = 0; j < corners.cols(); ++j) {
    const long double dx = zx - corners(0, j);
    const long double dy = zy - corners(1, j);
    const long double r = std::sqrt(dx * dx + dy * dy);
    g[0] += dx / r;
    g[1] += dy / r;
  }
  return g;
}

}  // namespace detail

inline Theorem1Instance build_theorem1_instance(double x, std::int64_t v) {
  if (!(x >= 8.0) || !std::isfinite(x)) throw Error(Errc::invalid_argument, "X must be >= 8");
  if (v < 1) throw Error(Errc::invalid_argument, "V must be >= 1");
  const Matrix corners = detail::four_corners(x);
  const double target = 1.0 / static_cast<double>(v);
  Vector ray(2);
  ray << x * x * x, 1.0;
  auto excess = [&](double c) {
    const long double cl = c;
    const auto g = detail::corner_sum_gradient(corners, cl * ray(0), cl * ray(1));
    return std::sqrt(g[0] * g[0] + g[1] * g[1]) - static_cast<long double>(target);
  };
  if (!(excess(1.0) > 0.0)) {
    throw Error(Errc::bracket_failure, "|grad L0| - 1/V does not change sign on [0, 1]; V too small");
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  Theorem1Instance inst;
  inst.x = x;
  inst.v = v;
  inst.alpha_v = lo;
  inst.g_v = lo * ray;
  const double sqrt_v = std::sqrt(static_cast<double>(v));
  const auto grad = detail::corner_sum_gradient(corners, inst.g_v(0), inst.g_v(1));
  const long double root_v = std::sqrt(static_cast<long double>(v));
  inst.theta0 = Point(2);
  inst.theta0 << static_cast<double>(inst.g_v(0) + grad[0] / root_v), static_cast<double>(inst.g_v(1) + grad[1] / root_v);
  inst.hessian = 4.0 * loss_hessian(WeightedProfile(corners), Vector::Zero(2));
  const Matrix& h = inst.hessian;
  const Vector hhg = h * h * inst.g_v;
  const double coef = inst.g_v.dot(h * hhg) / hhg.squaredNorm();
  inst.strategic_vote = inst.theta0 - (2.0 / sqrt_v) * coef * hhg;
  inst.profile = VoterProfile(corners, std::vector<std::int64_t>(4, v));
  return inst;
}

struct Theorem1Record {
  double x = 0.0;
  std::int64_t v = 0;
  bool ok = false;
  std::string error;
  double alpha_v = 0.0;
  double truthful_dist = 0.0;
  /// truthful_dist * V^{3/2}; 1 in exact arithmetic.
  double truthful_scaled = 0.0;
  double construction_dist = 0.0;
  double construction_ratio = 0.0;
  double construction_gain = 0.0;
  bool construction_achievable = false;
  /// (X^2 - 8X + 1) / (8X).
  double gain_floor = 0.0;
  /// (1 + X^2) / (4X).
  double ratio_limit = 0.0;
  double best_response_gain = 0.0;
  double best_response_ratio = 0.0;
  std::string best_response_path;
  Point theta0;
  Point truthful_median;
  Point strategic_vote;
};

struct Theorem1Options {
  bool run_best_response = true;
  BestResponseOptions best_response;
  int threads = 1;
};

inline Theorem1Record run_theorem1_case(double x, std::int64_t v, const Theorem1Options& opt) {
  Theorem1Record r;
  r.x = x;
  r.v = v;
  r.gain_floor = (x * x - 8.0 * x + 1.0) / (8.0 * x);
  r.ratio_limit = (1.0 + x * x) / (4.0 * x);
  try {
    const Theorem1Instance inst = build_theorem1_instance(x, v);
    const WeightedProfile honest(inst.profile);
    const MedianResult truthful = median_with_vote(honest, inst.theta0, opt.best_response.tol_grad);
    const MedianResult manipulated = median_with_vote(honest, inst.strategic_vote, opt.best_response.tol_grad);
    r.alpha_v = inst.alpha_v;
    r.theta0 = inst.theta0;
    r.truthful_median = truthful.point;
    r.strategic_vote = inst.strategic_vote;
    r.truthful_dist = (truthful.point - inst.theta0).norm();
    r.truthful_scaled = r.truthful_dist * std::pow(static_cast<double>(v), 1.5);
    r.construction_dist = (manipulated.point - inst.theta0).norm();
    r.construction_ratio = r.truthful_dist / r.construction_dist;
    r.construction_gain = r.construction_ratio - 1.0;
    r.construction_achievable = AchievableSet(inst.profile).contains(inst.strategic_vote);
    if (opt.run_best_response) {
      BestResponseOptions bo = opt.best_response;
      bo.extra_votes.push_back(inst.strategic_vote);
      const StrategyReport rep = best_response(inst.theta0, inst.profile, SpdMatrix::identity(2), bo);
      r.best_response_gain = rep.gain_alpha;
      r.best_response_ratio = rep.gain_alpha + 1.0;
      r.best_response_path = rep.chosen_path;
    }
    r.ok = true;
  } catch (const std::exception& ex) {
    r.error = ex.what();
  }
  return r;
}

inline std::vector<Theorem1Record> theorem1_experiment(const std::vector<double>& x_grid,
                                                       const std::vector<std::int64_t>& v_grid,
                                                       const Theorem1Options& opt = {}) {
  std::vector<Theorem1Record> out(x_grid.size() * v_grid.size());
  parallel_for(out.size(), opt.threads, [&](std::size_t i) {
    out[i] = run_theorem1_case(x_grid[i / v_grid.size()], v_grid[i % v_grid.size()], opt);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Asymptotic strategyproofness sweep.

struct ExperimentConfig {
  PreferenceDistribution distribution;
  std::vector<std::int64_t> v_grid;
  int trials = 1;
  std::uint64_t seed = 0;
  double epsilon = 0.1;
  double delta = 0.05;

  void validate() const {
    distribution.validate();
    if (trials < 1) throw Error(Errc::invalid_argument, "trials must be >= 1");
    if (v_grid.empty()) throw Error(Errc::invalid_argument, "V grid is empty");
    for (std::size_t i = 0; i < v_grid.size(); ++i) {
      if (v_grid[i] < 1) throw Error(Errc::invalid_argument, "V grid entries must be >= 1");
      if (i > 0 && v_grid[i] <= v_grid[i - 1]) throw Error(Errc::invalid_argument, "V grid must be ascending");
    }
  }
};

struct AsymptoticOptions {
  std::vector<double> gammas{1.5, 3.0, 10.0};
  /// Preference matrix S of the strategic voter.
  std::optional<Matrix> preference;
  /// Also run the Sigma-skewed median with Sigma chosen to make the skewed
  /// Hessian close to isotropic, paired with the unskewed trial.
  bool compare_isotropic_skew = false;
  /// Pilot sample size for choosing Sigma.
  std::int64_t skew_pilot_size = 20000;
  BestResponseOptions best_response;
  int threads = 1;
  /// Starts of the numeric skewness cross-check.
  int numeric_skew_starts = 16;
};

struct AsymptoticTrial {
  std::int64_t v = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double skew = 0.0;
  double skew_numeric = 0.0;
  std::vector<double> gains;
  double max_gain = 0.0;
  bool within_bound = false;
  // Paired Sigma-skewed run.
  double skew_skewed = 0.0;
  std::vector<double> gains_skewed;
  double max_gain_skewed = 0.0;
};

struct AsymptoticSummary {
  std::int64_t v = 0;
  int completed = 0;
  int failed = 0;
  double max_gain = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double q95 = 0.0;
  double mean_skew = 0.0;
  double max_skew_gap = 0.0;
  /// Fraction of completed trials with max gain <= skew + epsilon.
  double fraction_within = 0.0;
  bool passes = false;
  double mean_gain = 0.0;
  double mean_gain_skewed = 0.0;
  double max_gain_skewed = 0.0;
  double fraction_skewed_lower = 0.0;
};

struct AsymptoticReport {
  std::vector<AsymptoticTrial> trials;
  std::vector<AsymptoticSummary> summary;
  Matrix preference;
  std::optional<Matrix> sigma;
};

namespace detail {

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Stress placements: walk from the honest median along u to the boundary b
/// of the achievable set, then step gamma/V along grad L(b). The truthful
/// median of theta0 = b + t grad L(b)/|grad L(b)| is b itself.
inline std::vector<Point> stress_points(const WeightedProfile& honest, double count, const Point& median,
                                        const Vector& u, const std::vector<double>& gammas) {
  const double threshold = 1.0 / count;
  auto q = [&](double t) { return min_norm_subgradient(honest, median + t * u).norm() - threshold; };
  double hi = threshold;
  int grow = 0;
  while (q(hi) <= 0.0) {
    hi *= 2.0;
    if (++grow > 200) throw Error(Errc::bracket_failure, "achievable set boundary not found along ray");
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (q(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const Vector b = median + lo * u;
  const Vector n = loss_gradient(honest, b).normalized();
  std::vector<Point> out;
  for (double g : gammas) out.push_back(b + (g / count) * n);
  return out;
}

}  // namespace detail

/// Sigma with Sigma H(Sigma x) Sigma approximately proportional to I, from
/// the multiplicative fixed point Sigma <- Sigma K^{-1/2} on a pilot sample.
inline Matrix isotropizing_skew(const VoterProfile& pilot, int iterations = 30, double tol = 1e-8) {
  const Index d = pilot.dim();
  Matrix sigma = Matrix::Identity(d, d);
  for (int it = 0; it < iterations; ++it) {
    const WeightedProfile mapped(pilot.affine_image(sigma, Vector::Zero(d)));
    const MedianResult gm = geometric_median(mapped, 1e-10);
    const Matrix hy = loss_hessian(mapped, gm.point);
    Matrix k = sigma * hy * sigma;
    k = 0.5 * (k + k.transpose()).eval();
    if (skewness(SpdMatrix(k)).value < tol) break;
    const Matrix m = sigma * sym_inv_sqrt(k / (k.trace() / static_cast<double>(d)));
    sigma = sym_sqrt(m * m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    sigma /= es.eigenvalues().maxCoeff();
  }
  return sigma;
}

inline AsymptoticReport asymptotic_experiment(const ExperimentConfig& cfg, const AsymptoticOptions& opt = {}) {
  cfg.validate();
  const Index d = cfg.distribution.dim;
  AsymptoticReport report;
  report.preference = opt.preference ? *opt.preference : Matrix::Identity(d, d);
  const SpdMatrix pref(report.preference);
  require_same_dim(pref.dim(), d, "asymptotic_experiment preference matrix");
  const Matrix pref_inv = pref.inverse();

  std::optional<SpdMatrix> sigma;
  if (opt.compare_isotropic_skew) {
    const VoterProfile pilot = sample_profile(cfg.distribution, opt.skew_pilot_size, derive_seed(cfg.seed, ~0ULL));
    sigma = SpdMatrix(isotropizing_skew(pilot));
    report.sigma = sigma->matrix();
  }

  const std::size_t per_v = static_cast<std::size_t>(cfg.trials);
  report.trials.resize(cfg.v_grid.size() * per_v);
  parallel_for(report.trials.size(), opt.threads, [&](std::size_t idx) {
    const std::size_t vi = idx / per_v;
    AsymptoticTrial& t = report.trials[idx];
    t.v = cfg.v_grid[vi];
    t.trial = static_cast<int>(idx % per_v);
    t.seed = derive_seed(derive_seed(cfg.seed, vi), static_cast<std::uint64_t>(t.trial));
    try {
      const VoterProfile honest = sample_profile(cfg.distribution, t.v, t.seed);
      const double count = static_cast<double>(honest.voter_count());
      std::mt19937_64 rng(splitmix64(t.seed));
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector u(d);
      for (Index i = 0; i < d; ++i) u(i) = normal(rng);
      u.normalize();

      const SpdMatrix h = hessian_at_median(honest, opt.best_response.tol_grad);
      Matrix k = pref_inv * h.matrix() * pref_inv;
      const SpdMatrix ks(0.5 * (k + k.transpose()));
      t.skew = skewness(ks).value;
      t.skew_numeric = skewness_numeric(ks, opt.numeric_skew_starts, splitmix64(t.seed + 1)).value;

      const WeightedProfile wp(honest);
      const MedianResult gm = geometric_median(wp, opt.best_response.tol_grad);
      BestResponseOptions bo = opt.best_response;
      bo.seed = splitmix64(t.seed + 2);
      for (const Point& theta0 : detail::stress_points(wp, count, gm.point, u, opt.gammas)) {
        t.gains.push_back(best_response(theta0, honest, pref, bo).gain_alpha);
      }
      t.max_gain = *std::max_element(t.gains.begin(), t.gains.end());
      t.within_bound = t.max_gain <= t.skew + cfg.epsilon;

      if (sigma) {
        const Matrix& s = sigma->matrix();
        const VoterProfile mapped = honest.affine_image(s, Vector::Zero(d));
        const WeightedProfile mwp(mapped);
        const MedianResult mgm = geometric_median(mwp, opt.best_response.tol_grad);
        const Matrix hy = loss_hessian(mwp, mgm.point);
        Matrix ksk = pref_inv * s * hy * s * pref_inv;
        t.skew_skewed = skewness(SpdMatrix(0.5 * (ksk + ksk.transpose()))).value;
        const Matrix s_inv = sigma->inverse();
        for (const Point& y0 : detail::stress_points(mwp, count, mgm.point, u, opt.gammas)) {
          t.gains_skewed.push_back(best_response_skewed(s_inv * y0, honest, pref, *sigma, bo).gain_alpha);
        }
        t.max_gain_skewed = *std::max_element(t.gains_skewed.begin(), t.gains_skewed.end());
      }
      t.ok = true;
    } catch (const std::exception& ex) {
      t.error = ex.what();
    }
  });

  for (std::size_t vi = 0; vi < cfg.v_grid.size(); ++vi) {
    AsymptoticSummary s;
    s.v = cfg.v_grid[vi];
    std::vector<double> gains;
    int within = 0;
    int skewed_lower = 0;
    double skew_sum = 0.0;
    double gain_skewed_sum = 0.0;
    for (std::size_t k = 0; k < per_v; ++k) {
      const AsymptoticTrial& t = report.trials[vi * per_v + k];
      if (!t.ok) {
        ++s.failed;
        continue;
      }
      ++s.completed;
      gains.push_back(t.max_gain);
      within += t.within_bound ? 1 : 0;
      skew_sum += t.skew;
      s.max_skew_gap = std::max(s.max_skew_gap, std::abs(t.skew - t.skew_numeric));
      if (sigma) {
        gain_skewed_sum += t.max_gain_skewed;
        s.max_gain_skewed = std::max(s.max_gain_skewed, t.max_gain_skewed);
        skewed_lower += t.max_gain_skewed < t.max_gain ? 1 : 0;
      }
    }
    if (s.completed > 0) {
      const double n = static_cast<double>(s.completed);
      s.max_gain = *std::max_element(gains.begin(), gains.end());
      s.q50 = detail::quantile(gains, 0.5);
      s.q90 = detail::quantile(gains, 0.9);
      s.q95 = detail::quantile(gains, 0.95);
      double gain_sum = 0.0;
      for (double g : gains) gain_sum += g;
      s.mean_gain = gain_sum / n;
      s.mean_skew = skew_sum / n;
      s.fraction_within = within / n;
      s.passes = s.fraction_within >= 1.0 - cfg.delta;
      if (sigma) {
        s.mean_gain_skewed = gain_skewed_sum / n;
        s.fraction_skewed_lower = skewed_lower / n;
      }
    }
    report.summary.push_back(s);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Finite-voter convergence of the median and Hessian.

struct ConvergenceRow {
  std::int64_t v = 0;
  int completed = 0;
  double median_error = 0.0;
  double hessian_deviation = 0.0;
  std::vector<double> median_errors;
  std::vector<double> hessian_deviations;
};

struct ConvergenceReport {
  std::int64_t v_ref = 0;
  Point g_ref;
  Matrix h_ref;
  std::vector<ConvergenceRow> rows;
  double median_slope = 0.0;
  double hessian_slope = 0.0;
  bool median_slope_ok = false;
  bool hessian_monotone = false;
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

inline ConvergenceReport convergence_diagnostics(const ExperimentConfig& cfg, int threads = 1) {
  cfg.validate();
  ConvergenceReport rep;
  rep.v_ref = 10 * cfg.v_grid.back();
  {
    const WeightedProfile ref(sample_profile(cfg.distribution, rep.v_ref, derive_seed(cfg.seed, ~0ULL - 1)));
    rep.g_ref = geometric_median(ref, 1e-10).point;
    rep.h_ref = loss_hessian(ref, rep.g_ref);
  }
  const std::size_t per_v = static_cast<std::size_t>(cfg.trials);
  std::vector<double> err(cfg.v_grid.size() * per_v, -1.0);
  std::vector<double> dev(err.size(), -1.0);
  parallel_for(err.size(), threads, [&](std::size_t idx) {
    const std::size_t vi = idx / per_v;
    const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, vi), idx % per_v);
    try {
      const WeightedProfile wp(sample_profile(cfg.distribution, cfg.v_grid[vi], seed));
      const MedianResult gm = geometric_median(wp, 1e-10);
      err[idx] = (gm.point - rep.g_ref).norm();
      dev[idx] = (loss_hessian(wp, gm.point) - rep.h_ref).cwiseAbs().maxCoeff();
    } catch (const Error&) {
    }
  });
  std::vector<double> vs;
  std::vector<double> med_err;
  std::vector<double> med_dev;
  for (std::size_t vi = 0; vi < cfg.v_grid.size(); ++vi) {
    ConvergenceRow row;
    row.v = cfg.v_grid[vi];
    for (std::size_t k = 0; k < per_v; ++k) {
      if (err[vi * per_v + k] < 0.0) continue;
      row.median_errors.push_back(err[vi * per_v + k]);
      row.hessian_deviations.push_back(dev[vi * per_v + k]);
    }
    row.completed = static_cast<int>(row.median_errors.size());
    row.median_error = detail::quantile(row.median_errors, 0.5);
    row.hessian_deviation = detail::quantile(row.hessian_deviations, 0.5);
    if (row.completed > 0) {
      vs.push_back(static_cast<double>(row.v));
      med_err.push_back(row.median_error);
      med_dev.push_back(row.hessian_deviation);
    }
    rep.rows.push_back(std::move(row));
  }
  rep.median_slope = loglog_slope(vs, med_err);
  rep.hessian_slope = loglog_slope(vs, med_dev);
  rep.median_slope_ok = vs.size() >= 2 && rep.median_slope <= -0.4;
  rep.hessian_monotone = vs.size() >= 2;
  for (std::size_t i = 1; i < med_dev.size(); ++i) rep.hessian_monotone &= med_dev[i] < med_dev[i - 1];
  return rep;
}

// ---------------------------------------------------------------------------
// Minority attacks on the geometric median.

enum class AdversaryStrategy { radial_escape, far_cluster, mirrored };

inline const char* to_string(AdversaryStrategy s) {
  switch (s) {
    case AdversaryStrategy::radial_escape: return "radial-escape";
    case AdversaryStrategy::far_cluster: return "far-cluster";
    case AdversaryStrategy::mirrored: return "mirrored";
  }
  return "unknown";
}

struct ByzantineConfig {
  PreferenceDistribution distribution;
  std::int64_t v_truthful = 3;
  std::int64_t v_strategic = 1;
  int trials = 500;
  std::uint64_t seed = 0;
  /// Use this truthful profile in every trial instead of sampling.
  std::optional<VoterProfile> fixed_truthful;
  int threads = 1;
};

struct ByzantineTrial {
  int trial = 0;
  std::uint64_t seed = 0;
  AdversaryStrategy strategy = AdversaryStrategy::radial_escape;
  bool ok = false;
  std::string error;
  double delta = 0.0;
  double radius = 0.0;
  double displacement = 0.0;
  bool within = false;
};

struct ByzantineReport {
  std::vector<ByzantineTrial> trials;
  double max_displacement = 0.0;
  /// max over trials of displacement / radius.
  double max_ratio = 0.0;
  int violations = 0;
  int failed = 0;
  bool all_within = false;
};

/// Votes of `count` adversaries under the given strategy.
inline Matrix adversary_votes(AdversaryStrategy s, const VoterProfile& truthful, const Point& median, double delta,
                              std::int64_t count, std::mt19937_64& rng) {
  const Index d = truthful.dim();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto random_unit = [&]() {
    Vector u(d);
    for (Index i = 0; i < d; ++i) u(i) = normal(rng);
    return Vector(u / u.norm());
  };
  const double scale = delta > 0.0 ? delta : 1.0;
  Matrix votes(d, static_cast<Index>(count));
  switch (s) {
    case AdversaryStrategy::radial_escape: {
      const Vector target = median + 1e3 * scale * random_unit();
      votes.colwise() = target;
      break;
    }
    case AdversaryStrategy::far_cluster: {
      const Vector center = median + (2.0 + 98.0 * unif(rng)) * scale * random_unit();
      for (Index j = 0; j < votes.cols(); ++j) {
        for (Index i = 0; i < d; ++i) votes(i, j) = center(i) + 0.1 * scale * normal(rng);
      }
      break;
    }
    case AdversaryStrategy::mirrored: {
      std::uniform_int_distribution<Index> pick(0, truthful.size() - 1);
      for (Index j = 0; j < votes.cols(); ++j) {
        const Vector x = truthful.point(pick(rng));
        votes.col(j) = median - (1.0 + 9.0 * unif(rng)) * (x - median);
      }
      break;
    }
  }
  return votes;
}

inline ByzantineReport byzantine_experiment(const ByzantineConfig& cfg) {
  if (cfg.v_strategic >= cfg.v_truthful) {
    throw Error(Errc::majority_attack, "byzantine_experiment needs V_S < V_T");
  }
  if (cfg.trials < 1) throw Error(Errc::invalid_argument, "trials must be >= 1");
  if (!cfg.fixed_truthful) cfg.distribution.validate();
  ByzantineReport rep;
  rep.trials.resize(static_cast<std::size_t>(cfg.trials));
  parallel_for(rep.trials.size(), cfg.threads, [&](std::size_t i) {
    ByzantineTrial& t = rep.trials[i];
    t.trial = static_cast<int>(i);
    t.seed = derive_seed(cfg.seed, i);
    t.strategy = static_cast<AdversaryStrategy>(i % 3);
    try {
      const VoterProfile truthful =
          cfg.fixed_truthful ? *cfg.fixed_truthful : sample_profile(cfg.distribution, cfg.v_truthful, t.seed);
      if (truthful.voter_count() != cfg.v_truthful) {
        throw Error(Errc::invalid_argument, "fixed truthful profile does not have V_T voters");
      }
      const ByzantineBall ball = byzantine_bound(truthful, cfg.v_strategic);
      t.delta = ball.delta;
      t.radius = ball.radius;
      double slack = 1e-9 * std::max(ball.radius, 1.0);
      if (cfg.v_strategic > 0) {
        std::mt19937_64 rng(splitmix64(t.seed));
        const Matrix votes = adversary_votes(t.strategy, truthful, ball.truthful_median, ball.delta,
                                             cfg.v_strategic, rng);
        WeightedProfile all(truthful);
        Matrix pts(truthful.dim(), all.size() + votes.cols());
        pts << all.points(), votes;
        Vector w(pts.cols());
        w << all.raw_weights(), Vector::Ones(votes.cols());
        const MedianResult gm = geometric_median(WeightedProfile(pts, w), 1e-12);
        t.displacement = (gm.point - ball.truthful_median).norm();
        if (std::isfinite(gm.additive_bound)) slack += gm.additive_bound;
      }
      t.within = t.displacement <= ball.radius + slack;
      t.ok = true;
    } catch (const std::exception& ex) {
      t.error = ex.what();
    }
  });
  rep.all_within = true;
  for (const auto& t : rep.trials) {
    if (!t.ok) {
      ++rep.failed;
      rep.all_within = false;
      continue;
    }
    rep.max_displacement = std::max(rep.max_displacement, t.displacement);
    if (t.radius > 0.0) rep.max_ratio = std::max(rep.max_ratio, t.displacement / t.radius);
    if (!t.within) {
      ++rep.violations;
      rep.all_within = false;
    }
  }
  return rep;
}

}  // namespace medianforge

#endif  // MEDIANFORGE_SIMULATION_HPP
