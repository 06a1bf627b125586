#include "medianforge/vector_core.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace medianforge;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector random_point(std::mt19937_64& rng, Index d, double rmin, double rmax) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> u(std::log(rmin), std::log(rmax));
  Vector z(d);
  for (Index i = 0; i < d; ++i) z(i) = normal(rng);
  return z.normalized() * std::exp(u(rng));
}

}  // namespace

TEST(UnitVector, Examples) {
  EXPECT_TRUE(unit_vector(v2(3, 4)).isApprox(v2(0.6, 0.8), 1e-15));
  Vector e1 = Vector::Zero(3);
  e1(0) = 1.0;
  EXPECT_EQ(unit_vector(e1), e1);
}

TEST(UnitVector, ZeroIsAnError) {
  try {
    unit_vector(Vector::Zero(2));
    FAIL() << "expected ZeroVector";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::zero_vector);
  }
  EXPECT_THROW(euclid_hessian(Vector::Zero(3)), Error);
  EXPECT_THROW(euclid_third_derivative(Vector::Zero(3)), Error);
  EXPECT_THROW(lp_gradient(Vector::Zero(3), 1.5), Error);
  EXPECT_THROW(skewed_gradient(Vector::Zero(2), SpdMatrix::identity(2)), Error);
}

TEST(UnitVector, NormOneAndScaleInvariant) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const Vector z = random_point(rng, 4, 1e-3, 1e3);
    EXPECT_NEAR(unit_vector(z).norm(), 1.0, 1e-12);
    EXPECT_TRUE(unit_vector(7.5 * z).isApprox(unit_vector(z), 1e-14));
  }
}

TEST(EuclidHessian, Examples) {
  Matrix expect(2, 2);
  expect << 0, 0, 0, 0.5;
  EXPECT_TRUE(euclid_hessian(v2(2, 0)).isApprox(expect, 1e-15));
  Vector e1 = Vector::Zero(3);
  e1(0) = 1.0;
  EXPECT_LT((euclid_hessian(e1) * e1).norm(), 1e-15);
}

TEST(EuclidHessian, KernelAndOrthogonalEigenvalue) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const Vector z = random_point(rng, 5, 0.1, 10);
    const Matrix h = euclid_hessian(z);
    EXPECT_LT((h * z).norm(), 1e-10);
    Vector x = random_point(rng, 5, 1, 1);
    x -= x.dot(z) / z.squaredNorm() * z;
    EXPECT_LT((h * x - x / z.norm()).norm(), 1e-10);
  }
}

TEST(EuclidHessian, MatchesFiniteDifferenceOfUnitVector) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const Vector z = random_point(rng, 3, 0.1, 10);
    const Matrix fd = oracle::fd_jacobian([](const Vector& x) { return unit_vector(x); }, z, 1e-6 * z.norm());
    const Matrix h = euclid_hessian(z);
    EXPECT_LE((fd - h).norm(), 1e-5 * h.norm());
  }
}

TEST(EuclidThirdDerivative, CaseFormulas) {
  const ThirdDerivTensor t = euclid_third_derivative(v2(1, 0));
  EXPECT_DOUBLE_EQ(t(0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(t(0, 1, 1), -1.0);
  EXPECT_DOUBLE_EQ(t(1, 0, 1), -1.0);
  EXPECT_DOUBLE_EQ(t(1, 1, 0), -1.0);
  EXPECT_DOUBLE_EQ(t(1, 1, 1), 0.0);
  EXPECT_DOUBLE_EQ(t(0, 0, 1), 0.0);
}

TEST(EuclidThirdDerivative, GeneralCaseFormulas) {
  std::mt19937_64 rng(4);
  const Vector z = random_point(rng, 3, 0.5, 2);
  const Vector u = z.normalized();
  const double r2 = z.squaredNorm();
  const ThirdDerivTensor t = euclid_third_derivative(z);
  for (Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(t(i, i, i), (3 * std::pow(u(i), 3) - 3 * u(i)) / r2, 1e-14);
    for (Index j = 0; j < 3; ++j) {
      if (j == i) continue;
      EXPECT_NEAR(t(i, j, j), (3 * u(i) * u(j) * u(j) - u(i)) / r2, 1e-14);
      for (Index k = 0; k < 3; ++k) {
        if (k == i || k == j) continue;
        EXPECT_NEAR(t(i, j, k), 3 * u(i) * u(j) * u(k) / r2, 1e-14);
      }
    }
  }
}

TEST(EuclidThirdDerivative, SymmetricBoundedAndMatchesFiniteDifference) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 40; ++k) {
    const Vector z = random_point(rng, 4, 0.1, 10);
    const ThirdDerivTensor t = euclid_third_derivative(z);
    for (Index a = 0; a < 4; ++a) {
      for (Index b = 0; b < 4; ++b) {
        for (Index c = 0; c < 4; ++c) {
          EXPECT_EQ(t(a, b, c), t(b, a, c));
          EXPECT_EQ(t(a, b, c), t(c, b, a));
          EXPECT_EQ(t(a, b, c), t(a, c, b));
        }
      }
    }
    EXPECT_LE(t.max_abs(), 6.0 / z.squaredNorm());
    const Vector delta = random_point(rng, 4, 1, 1);
    const double h = 1e-5 * z.norm();
    const Matrix fd = (euclid_hessian(z + h * delta) - euclid_hessian(z - h * delta)) / (2 * h);
    const Matrix contracted = t.contract(delta);
    EXPECT_LE((fd - contracted).norm(), 1e-5 * contracted.norm() + 1e-12);
  }
}

TEST(LpGradient, Examples) {
  EXPECT_TRUE(lp_gradient(v2(3, 4), 2).isApprox(v2(0.6, 0.8), 1e-15));
  EXPECT_EQ(lp_gradient(v2(2, -3), 1), v2(1, -1));
  EXPECT_EQ(lp_gradient(v2(5, 2), kInf), v2(1, 0));
}

TEST(LpGradient, TieBreaking) {
  EXPECT_EQ(lp_gradient(v2(0, -3), 1), v2(0, -1));
  EXPECT_EQ(lp_gradient(v2(-4, 4), kInf), v2(-1, 0));
  EXPECT_EQ(lp_gradient(v2(0, 0), 1), v2(0, 0));
}

TEST(LpGradient, DualUnitNorm) {
  std::mt19937_64 rng(6);
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    for (int k = 0; k < 50; ++k) {
      const Vector z = random_point(rng, 6, 0.1, 10);
      EXPECT_NEAR(lp_norm(lp_gradient(z, p), dual_exponent(p)), 1.0, 1e-10) << "p=" << p;
    }
  }
}

TEST(LpGradient, MatchesFiniteDifferenceOfNorm) {
  std::mt19937_64 rng(7);
  for (double p : {1.5, 3.0, 7.0}) {
    const Vector z = random_point(rng, 4, 0.5, 2);
    const Vector fd = oracle::fd_gradient([p](const Vector& x) { return lp_norm(x, p); }, z, 1e-6);
    EXPECT_LE((fd - lp_gradient(z, p)).norm(), 1e-7);
  }
}

TEST(SkewedNorm, Examples) {
  EXPECT_DOUBLE_EQ(skewed_norm(v2(3, 4), SpdMatrix::identity(2)), 5.0);
  EXPECT_DOUBLE_EQ(skewed_norm(v2(1, 1), SpdMatrix::diagonal(v2(2, 1))), std::sqrt(5.0));
  const SpdMatrix m = SpdMatrix::diagonal(v2(1, 2 / std::sqrt(3.0)));
  EXPECT_NEAR(skewed_norm(v2(-0.5, std::sqrt(3.0) / 2), m), std::sqrt(5.0) / 2, 1e-15);
  EXPECT_THROW(skewed_norm(Vector::Ones(3), m), Error);
}

TEST(SkewedGradient, Examples) {
  std::mt19937_64 rng(8);
  const Vector z = random_point(rng, 3, 0.5, 2);
  EXPECT_TRUE(skewed_gradient(z, SpdMatrix::identity(3)).isApprox(unit_vector(z), 1e-15));
  // Pull of a voter at M theta_2 = (-1/2, 1) on the origin, identity skew.
  const Vector pull = unit_vector(v2(-0.5, 1.0));
  EXPECT_TRUE(pull.isApprox(2 / std::sqrt(5.0) * v2(-0.5, 1.0), 1e-15));
}

TEST(SkewedGradient, InverseSkewedUnitForce) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 50; ++k) {
    const SpdMatrix s(oracle::random_spd(4, rng, 1.5));
    const Vector z = random_point(rng, 4, 0.1, 10);
    const Vector g = skewed_gradient(z, s);
    EXPECT_NEAR(skewed_norm(g, SpdMatrix(s.inverse())), 1.0, 1e-10);
    const Vector fd = oracle::fd_gradient([&](const Vector& x) { return skewed_norm(x, s); }, z, 1e-6 * z.norm());
    EXPECT_LE((fd - g).norm(), 1e-6 * g.norm());
  }
}

TEST(SkewedHessian, ExamplesAndComposition) {
  Matrix expect(2, 2);
  expect << 0, 0, 0, 0.5;
  EXPECT_TRUE(skewed_hessian_of_norm(v2(1, 0), SpdMatrix::diagonal(v2(2, 1))).isApprox(expect, 1e-15));
  std::mt19937_64 rng(10);
  const Vector z = random_point(rng, 3, 0.5, 2);
  EXPECT_TRUE(skewed_hessian_of_norm(z, SpdMatrix::identity(3)).isApprox(euclid_hessian(z), 1e-15));
  for (int k = 0; k < 30; ++k) {
    const SpdMatrix s(oracle::random_spd(3, rng, 1.0));
    const Vector x = random_point(rng, 3, 0.1, 10);
    const Matrix h = skewed_hessian_of_norm(x, s);
    const Matrix& m = s.matrix();
    EXPECT_LE((h - m * euclid_hessian(m * x) * m).norm(), 1e-12 * h.norm());
    EXPECT_LE((h - h.transpose()).norm(), 1e-14 * h.norm());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * h.norm());
    // Kernel: Sigma^{-1} (Sigma x) = x.
    EXPECT_LE((h * x).norm(), 1e-10 * h.norm() * x.norm());
    const Matrix fd = oracle::fd_jacobian([&](const Vector& y) { return skewed_gradient(y, s); }, x, 1e-6 * x.norm());
    EXPECT_LE((fd - h).norm(), 1e-5 * h.norm());
  }
}

TEST(NestedFiniteDifferences, HundredRandomPoints) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const Vector z = random_point(rng, 3, 0.1, 10);
    const double h = 1e-5 * z.norm();
    const Vector g = unit_vector(z);
    const Vector fdg = oracle::fd_gradient([](const Vector& x) { return x.norm(); }, z, h);
    EXPECT_LE((fdg - g).norm(), 1e-5 * g.norm());
    const Matrix hs = euclid_hessian(z);
    const Matrix fdh = oracle::fd_jacobian([](const Vector& x) { return unit_vector(x); }, z, h);
    EXPECT_LE((fdh - hs).norm(), 1e-5 * hs.norm());
    const ThirdDerivTensor t = euclid_third_derivative(z);
    for (Index i = 0; i < 3; ++i) {
      Vector e = Vector::Zero(3);
      e(i) = 1.0;
      const Matrix fdt = (euclid_hessian(z + h * e) - euclid_hessian(z - h * e)) / (2 * h);
      EXPECT_LE((fdt - t.contract(e)).norm(), 1e-5 * t.contract(e).norm() + 1e-9 / z.squaredNorm());
    }
  }
}
