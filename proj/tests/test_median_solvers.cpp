#include "medianforge/hull.hpp"
#include "medianforge/median_solvers.hpp"
#include "medianforge/vector_core.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace medianforge;

namespace {

Matrix cols(std::initializer_list<std::initializer_list<double>> pts) {
  const Index d = static_cast<Index>(pts.begin()->size());
  Matrix m(d, static_cast<Index>(pts.size()));
  Index j = 0;
  for (const auto& p : pts) {
    Index i = 0;
    for (double v : p) m(i++, j) = v;
    ++j;
  }
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Matrix three_unit_vectors() {
  const double s = std::sqrt(3.0) / 2.0;
  return cols({{1, 0}, {-0.5, s}, {-0.5, -s}});
}

Matrix rotation(double angle) {
  Matrix r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

/// Skewed median computed directly: Newton on sum_j w_j |Sigma (z - x_j)|.
Vector direct_skewed_median(const WeightedProfile& wp, const SpdMatrix& s, Vector z) {
  for (int it = 0; it < 200; ++it) {
    Vector g = Vector::Zero(wp.dim());
    Matrix h = Matrix::Zero(wp.dim(), wp.dim());
    for (Index j = 0; j < wp.size(); ++j) {
      g += wp.weights()(j) * skewed_gradient(z - wp.point(j), s);
      h += wp.weights()(j) * skewed_hessian_of_norm(z - wp.point(j), s);
    }
    if (g.norm() < 1e-15) break;
    const Vector step = h.ldlt().solve(g);
    double t = 1.0;
    auto loss = [&](const Vector& x) {
      double l = 0.0;
      for (Index j = 0; j < wp.size(); ++j) l += wp.weights()(j) * skewed_norm(x - wp.point(j), s);
      return l;
    };
    const double l0 = loss(z);
    while (t > 1e-12 && loss(z - t * step) > l0) t *= 0.5;
    if (t <= 1e-12) break;
    z -= t * step;
  }
  return z;
}

double trace_covariance(const Matrix& pts) {
  const Vector mean = pts.rowwise().mean();
  return (pts.colwise() - mean).squaredNorm() / static_cast<double>(pts.cols());
}

}  // namespace

TEST(Average, Examples) {
  EXPECT_TRUE(average(WeightedProfile(cols({{0, 0}, {2, 2}}))).isApprox(vec({1, 1}), 1e-15));
  EXPECT_TRUE(average(WeightedProfile(Matrix(Matrix::Identity(3, 3)))).isApprox(Vector::Constant(3, 1.0 / 3), 1e-15));
}

TEST(Average, ArbitrarilyManipulable) {
  std::mt19937_64 rng(1);
  const Index v = 9;
  const Matrix honest = oracle::random_points(3, v, rng);
  const Vector mean = honest.rowwise().mean();
  const Vector theta0 = vec({10, -20, 30});
  const Vector vote = (1.0 + v) * theta0 - v * mean;
  Matrix all(3, v + 1);
  all << honest, vote;
  EXPECT_LE((average(WeightedProfile(all)) - theta0).norm(), 1e-12);
}

TEST(CoordinatewiseMedian, Examples) {
  EXPECT_EQ(coordinatewise_median(WeightedProfile(cols({{0, 0}, {1, 2}, {2, 1}}))), vec({1, 1}));
  EXPECT_EQ(coordinatewise_median(WeightedProfile(Matrix(Matrix::Identity(3, 3)))), Vector::Zero(3));
  EXPECT_EQ(coordinatewise_median(WeightedProfile(cols({{4, -2}}))), vec({4, -2}));
}

TEST(CoordinatewiseMedian, EvenCountLowerMedian) {
  EXPECT_EQ(coordinatewise_median(WeightedProfile(cols({{0}, {1}, {5}, {9}}))), vec({1}));
  // Weighted: mass 0.5 at 1 and 0.5 at 3.
  EXPECT_EQ(coordinatewise_median(WeightedProfile(cols({{1}, {3}}), vec({2, 2}))), vec({1}));
  EXPECT_EQ(coordinatewise_median(WeightedProfile(cols({{1}, {3}}), vec({1, 3}))), vec({3}));
}

TEST(Loss, GradientZeroAtCenterOfSymmetry) {
  std::mt19937_64 rng(2);
  const Matrix half = oracle::random_points(4, 5, rng);
  const Vector c = vec({1, 2, 3, 4});
  Matrix pts(4, 10);
  pts << half.colwise() + c, (-half).colwise() + c;
  EXPECT_LE(loss_gradient(WeightedProfile(pts), c).norm(), 1e-15);
}

TEST(Loss, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const WeightedProfile wp(oracle::random_points(3, 6, rng));
    const Vector z = oracle::random_points(3, 1, rng).col(0) * 0.7;
    const double h = 1e-5;
    const Vector g = loss_gradient(wp, z);
    EXPECT_LE((oracle::fd_gradient([&](const Vector& x) { return loss_eval(wp, x); }, z, h) - g).norm(),
              1e-5 * g.norm() + 1e-9);
    const Matrix hs = loss_hessian(wp, z);
    EXPECT_LE((oracle::fd_jacobian([&](const Vector& x) { return loss_gradient(wp, x); }, z, h) - hs).norm(),
              1e-5 * hs.norm());
    const ThirdDerivTensor t = loss_third_deriv(wp, z);
    const Vector w = oracle::random_points(3, 1, rng).col(0);
    const Matrix fd = (loss_hessian(wp, z + h * w) - loss_hessian(wp, z - h * w)) / (2 * h);
    EXPECT_LE((fd - t.contract(w)).norm(), 1e-5 * t.contract(w).norm() + 1e-9);
    EXPECT_LE((loss_third_contract(wp, z, w) - t.contract(w)).norm(), 1e-12 * (1 + t.contract(w).norm()));
  }
}

TEST(Loss, AtVoterPointIsAnError) {
  const WeightedProfile wp(three_unit_vectors());
  try {
    loss_gradient(wp, vec({1, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::at_voter_point);
  }
  EXPECT_THROW(loss_hessian(wp, vec({1, 0})), Error);
  EXPECT_THROW(loss_third_deriv(wp, vec({1, 0})), Error);
  EXPECT_NO_THROW(loss_eval(wp, vec({1, 0})));
}

TEST(Loss, FourCornerHessianAveragedForm) {
  for (double x : {8.0, 20.0}) {
    const WeightedProfile wp(cols({{-x, -1}, {-x, 1}, {x, -1}, {x, 1}}));
    Matrix expect = Matrix::Zero(2, 2);
    expect(0, 0) = 1.0;
    expect(1, 1) = x * x;
    expect *= std::pow(1 + x * x, -1.5);
    EXPECT_LE((loss_hessian(wp, Vector::Zero(2)) - expect).cwiseAbs().maxCoeff(), 1e-9);
    // The sum over the four corners is four times larger.
    EXPECT_LE((4.0 * loss_hessian(wp, Vector::Zero(2)) - 4.0 * expect).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(GeometricMedian, ThreeUnitVectors) {
  const MedianResult r = geometric_median(WeightedProfile(three_unit_vectors()), 1e-10);
  EXPECT_LE(r.point.norm(), 1e-12);
  EXPECT_LE(r.grad_norm, 1e-10);
  EXPECT_LT(r.additive_bound, 1e-9);
}

TEST(GeometricMedian, StandardSimplex) {
  const MedianResult r = geometric_median(WeightedProfile(Matrix(Matrix::Identity(3, 3))), 1e-10);
  EXPECT_LE((r.point - Vector::Constant(3, 1.0 / 3)).norm(), 1e-12);
}

TEST(GeometricMedian, FermatPointOfRightTriangle) {
  const Matrix pts = cols({{0, 0}, {1, 0}, {0, 1}});
  const WeightedProfile wp(pts);
  const MedianResult r = geometric_median(wp, 1e-10);
  const oracle::GridResult g = oracle::grid_median_2d(pts, wp.weights(), 1e-7);
  EXPECT_LE((r.point - g.point).norm(), 1e-6);
  for (Index a = 0; a < 3; ++a) {
    const Vector ua = unit_vector(pts.col(a) - r.point);
    const Vector ub = unit_vector(pts.col((a + 1) % 3) - r.point);
    EXPECT_NEAR(ua.dot(ub), -0.5, 1e-9);
  }
}

TEST(GeometricMedian, ResultInvariants) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 30; ++k) {
    const WeightedProfile wp(oracle::random_points(4, 25, rng));
    const MedianResult r = geometric_median(wp, 1e-10);
    EXPECT_LE(r.grad_norm, 1e-10);
    EXPECT_NEAR(r.loss, loss_eval(wp, r.point), 1e-12);
    EXPECT_TRUE(std::isfinite(r.additive_bound));
    EXPECT_FALSE(r.degenerate_dimension);
  }
}

TEST(GeometricMedian, MinimizerAtVoterPoint) {
  const WeightedProfile wp(cols({{0, 0}, {1, 0}, {0, 1}}), vec({3, 1, 1}));
  const MedianResult r = geometric_median(wp, 1e-10);
  EXPECT_EQ(r.point, Vector::Zero(2));
  EXPECT_TRUE(r.at_voter_point);
  EXPECT_EQ(r.grad_norm, 0.0);
}

TEST(GeometricMedian, CollinearProfileIsFlagged) {
  const MedianResult r = geometric_median(WeightedProfile(cols({{0, 0}, {1, 1}, {2, 2}, {5, 5}})), 1e-10);
  EXPECT_TRUE(r.degenerate_dimension);
  // Any point of the middle segment minimizes; the returned one must.
  const double best = loss_eval(WeightedProfile(cols({{0, 0}, {1, 1}, {2, 2}, {5, 5}})), vec({1.5, 1.5}));
  EXPECT_LE(r.loss, best + 1e-9);
}

TEST(GeometricMedian, RejectsNonPositiveTolerance) {
  EXPECT_THROW(geometric_median(WeightedProfile(three_unit_vectors()), 0.0), Error);
}

TEST(GeometricMedian, CertificateAgainstGridOracle) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> count(3, 7);
  for (int k = 0; k < 50; ++k) {
    const Matrix pts = oracle::random_points(2, count(rng), rng);
    const WeightedProfile wp(pts);
    const MedianResult r = geometric_median(wp, 1e-10);
    const oracle::GridResult g = oracle::grid_median_2d(pts, wp.weights(), 1e-7);
    const double bound = std::isfinite(r.additive_bound) ? r.additive_bound : 0.0;
    EXPECT_LE((r.point - g.point).norm(), bound + g.radius) << "profile " << k;
  }
}

TEST(SkewedGeometricMedian, IdentitySkew) {
  std::mt19937_64 rng(6);
  const WeightedProfile wp(oracle::random_points(3, 11, rng));
  EXPECT_EQ(skewed_geometric_median(wp, SpdMatrix::identity(3), 1e-10).point, geometric_median(wp, 1e-10).point);
}

TEST(SkewedGeometricMedian, ThreeUnitVectorsMoveOffOrigin) {
  const WeightedProfile wp(three_unit_vectors());
  const SpdMatrix sigma = SpdMatrix::diagonal(vec({1, 2 / std::sqrt(3.0)}));
  // Residual horizontal pull on the origin after skewing.
  Vector pull = Vector::Zero(2);
  for (Index j = 0; j < 3; ++j) pull += unit_vector(sigma.matrix() * wp.point(j));
  EXPECT_NEAR(pull(0), 1 - 2 / std::sqrt(5.0), 1e-15);
  const MedianResult r = skewed_geometric_median(wp, sigma, 1e-10);
  EXPECT_GT(r.point.norm(), 1e-3);
  EXPECT_GT(r.point(0), 0.0);
}

TEST(SkewedGeometricMedian, TwoRoutesAgree) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 30; ++k) {
    const WeightedProfile wp(oracle::random_points(3, 9, rng));
    const SpdMatrix sigma(oracle::random_spd(3, rng, 1.0));
    const MedianResult r = skewed_geometric_median(wp, sigma, 1e-10);
    const Vector direct = direct_skewed_median(wp, sigma, r.point + 1e-3 * Vector::Ones(3));
    // additive_bound is measured in the Sigma geometry.
    EXPECT_LE((sigma.matrix() * (r.point - direct)).norm(), r.additive_bound + 1e-12);
  }
}

TEST(Invariance, AnonymityIsBitExact) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    const Matrix pts = oracle::random_points(3, 12, rng);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    Vector w(12);
    for (Index j = 0; j < 12; ++j) w(j) = u(rng);
    const WeightedProfile wp(pts, w);
    std::vector<Index> order(12);
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    const WeightedProfile pp = wp.permuted(order);
    const SpdMatrix sigma(oracle::random_spd(3, rng, 0.5));
    EXPECT_EQ(average(wp), average(pp));
    EXPECT_EQ(coordinatewise_median(wp), coordinatewise_median(pp));
    EXPECT_EQ(geometric_median(wp, 1e-10).point, geometric_median(pp, 1e-10).point);
    EXPECT_EQ(skewed_geometric_median(wp, sigma, 1e-10).point, skewed_geometric_median(pp, sigma, 1e-10).point);
  }
}

TEST(Invariance, TranslationAndHomothety) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    const Matrix pts = oracle::random_points(3, 9, rng);
    const double lambda = 0.3 + 3.0 * (k % 5);
    const Vector tau = oracle::random_points(3, 1, rng).col(0) * 5.0;
    const Matrix moved = (lambda * pts).colwise() + tau;
    const WeightedProfile a(pts);
    const WeightedProfile b(moved);
    const double tol = 1e-9 * (1.0 + lambda + tau.norm());
    EXPECT_LE((average(b) - (lambda * average(a) + tau)).norm(), tol);
    EXPECT_LE((coordinatewise_median(b) - (lambda * coordinatewise_median(a) + tau)).norm(), tol);
    EXPECT_LE((geometric_median(b, 1e-12).point - (lambda * geometric_median(a, 1e-12).point + tau)).norm(), tol);
  }
}

TEST(Invariance, OrthogonalForAverageAndMedian) {
  std::mt19937_64 rng(10);
  for (int k = 0; k < 20; ++k) {
    const Matrix pts = oracle::random_points(2, 8, rng);
    const Matrix r = rotation(0.1 + k);
    const WeightedProfile a(pts);
    const WeightedProfile b(Matrix(r * pts));
    EXPECT_LE((average(b) - r * average(a)).norm(), 1e-12);
    EXPECT_LE((geometric_median(b, 1e-12).point - r * geometric_median(a, 1e-12).point).norm(), 1e-9);
  }
}

TEST(Invariance, CoordinatewiseMedianRotationCounterexample) {
  const Matrix pts = cols({{0, 0}, {1, 2}, {2, 1}});
  const Matrix r = rotation(std::acos(-1.0) / 4);
  const double h = std::sqrt(2.0) / 2;
  const Vector cw_rotated = coordinatewise_median(WeightedProfile(Matrix(r * pts)));
  const Vector rotated_cw = r * coordinatewise_median(WeightedProfile(pts));
  EXPECT_NEAR(cw_rotated(0), 0.0, 1e-15);
  EXPECT_NEAR(cw_rotated(1), 3 * h, 1e-15);
  EXPECT_NEAR(rotated_cw(0), 0.0, 1e-15);
  EXPECT_NEAR(rotated_cw(1), 2 * h, 1e-15);
  EXPECT_GT((cw_rotated - rotated_cw).norm(), 0.5);
}

TEST(Invariance, CenterOfSymmetry) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 10; ++k) {
    const Matrix half = oracle::random_points(3, 4, rng);
    const Vector c = oracle::random_points(3, 1, rng).col(0);
    Matrix pts(3, 9);
    pts << half.colwise() + c, (-half).colwise() + c, c;
    const WeightedProfile wp(pts);
    EXPECT_LE((average(wp) - c).norm(), 1e-12);
    EXPECT_LE((coordinatewise_median(wp) - c).norm(), 1e-12);
    EXPECT_LE((geometric_median(wp, 1e-10).point - c).norm(), 1e-9);
  }
}

TEST(ConvexHull, MedianAndAverageInside) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 200; ++k) {
    const Index d = 2 + k % 3;
    const Matrix pts = oracle::random_points(d, d + 2 + k % 5, rng);
    const WeightedProfile wp(pts);
    const MedianResult r = geometric_median(wp, 1e-10);
    EXPECT_LE(hull_distance(pts, r.point), r.additive_bound + 1e-12);
    EXPECT_LE(hull_distance(pts, average(wp)), 1e-12);
  }
}

TEST(ConvexHull, CoordinatewiseMedianCanLeave) {
  const Matrix e = Matrix::Identity(3, 3);
  EXPECT_GT(hull_distance(e, coordinatewise_median(WeightedProfile(e))), 0.5);
}

TEST(AverageApproximation, WithinCovarianceTrace) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> count(2, 40);
  for (int k = 0; k < 200; ++k) {
    const Index d = 1 + k % 5;
    const Matrix pts = oracle::random_points(d, count(rng), rng, 0.5 + k % 3);
    const WeightedProfile wp(pts);
    const double bound = std::sqrt(trace_covariance(pts));
    const Vector avg = average(wp);
    EXPECT_LE((avg - geometric_median(wp, 1e-10).point).norm(), bound + 1e-9);
    EXPECT_LE((avg - coordinatewise_median(wp)).norm(), bound + 1e-9);
  }
}

TEST(Continuity, SquareRootModulus) {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 10; ++k) {
    const Matrix pts = oracle::random_points(2, 7, rng);
    const Vector g0 = geometric_median(WeightedProfile(pts), 1e-12).point;
    const Vector dir = oracle::random_points(2, 1, rng).col(0).normalized();
    for (double delta : {1e-2, 1e-4, 1e-6}) {
      Matrix moved = pts;
      moved.col(0) += delta * dir;
      const Vector g1 = geometric_median(WeightedProfile(moved), 1e-12).point;
      EXPECT_LE((g1 - g0).norm(), 10.0 * std::sqrt(delta));
    }
  }
}

TEST(MinNormSubgradient, AtAndAwayFromVoters) {
  const WeightedProfile wp(cols({{0, 0}, {1, 0}, {0, 1}}), vec({3, 1, 1}));
  EXPECT_EQ(min_norm_subgradient(wp, Vector::Zero(2)), Vector::Zero(2));
  const Vector z = vec({0.3, 0.2});
  EXPECT_EQ(min_norm_subgradient(wp, z), loss_gradient(wp, z));
  // At (1,0) the pull of the other two exceeds the voter's own weight.
  const Vector h = min_norm_subgradient(WeightedProfile(three_unit_vectors()), vec({1, 0}));
  EXPECT_NEAR(h.norm(), (std::sqrt(3.0) - 1.0) / 3.0, 1e-12);
  EXPECT_GT(h(0), 0.0);
}
