#include "risopt/errors.hpp"
#include "risopt/manifold.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace risopt;

namespace {

const cplx J{0.0, 1.0};

ProductPoint point(CVector theta, CMatrix w) {
  return make_point(std::move(theta), std::move(w));
}

AmbientPair random_ambient(const ProductPoint &x, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  AmbientPair a{CVector(x.theta.size()), CMatrix(x.w.rows(), x.w.cols())};
  for (Eigen::Index i = 0; i < a.theta.size(); ++i)
    a.theta(i) = cplx(g(rng), g(rng));
  for (Eigen::Index i = 0; i < a.w.size(); ++i)
    a.w(i) = cplx(g(rng), g(rng));
  return a;
}

} // namespace

TEST(InnerProduct, Examples) {
  TangentVector a{CVector::Constant(1, J), CMatrix(0, 0)};
  EXPECT_DOUBLE_EQ(inner_product(a, a), 1.0);

  TangentVector z{CVector::Zero(2), CMatrix::Zero(2, 1)};
  TangentVector b{CVector::Constant(2, 3.0 + J), CMatrix::Ones(2, 1)};
  EXPECT_DOUBLE_EQ(inner_product(z, b), 0.0);

  TangentVector c{CVector(2), CMatrix::Zero(2, 1)};
  c.d_theta << J, -J;
  EXPECT_DOUBLE_EQ(inner_product(c, c), 2.0);
}

TEST(InnerProduct, ShapeMismatchThrows) {
  TangentVector a{CVector::Zero(2), CMatrix::Zero(2, 1)};
  TangentVector b{CVector::Zero(3), CMatrix::Zero(2, 1)};
  EXPECT_THROW(inner_product(a, b), DimensionError);
}

TEST(InnerProduct, SymmetricAndBilinear) {
  std::mt19937_64 rng(3);
  const ProductPoint x = random_point(5, 3, 2, rng);
  const TangentVector a = project_tangent(x, random_ambient(x, rng));
  const TangentVector b = project_tangent(x, random_ambient(x, rng));
  EXPECT_NEAR(inner_product(a, b), inner_product(b, a), 1e-14);
  EXPECT_NEAR(inner_product(2.5 * a + b, b),
              2.5 * inner_product(a, b) + inner_product(b, b), 1e-12);
}

TEST(ProjectTangent, Examples) {
  const ProductPoint x = point(CVector::Ones(1), CMatrix(0, 0));
  AmbientPair u{CVector::Constant(1, 2.0 + 3.0 * J), CMatrix(0, 0)};
  const TangentVector t = project_tangent(x, u);
  EXPECT_NEAR(std::abs(t.d_theta(0) - 3.0 * J), 0.0, 1e-15);

  // already tangent
  const TangentVector t2 = project_tangent(x, AmbientPair{t.d_theta, t.d_w});
  EXPECT_EQ(t2.d_theta, t.d_theta);

  CMatrix w(2, 1);
  w << 1.0, 0.0;
  const ProductPoint y = point(CVector(0), w);
  CMatrix uw(2, 1);
  uw << 1.0 + J, 1.0;
  const TangentVector tw = project_tangent(y, AmbientPair{CVector(0), uw});
  EXPECT_NEAR(std::abs(tw.d_w(0, 0) - J), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(tw.d_w(1, 0) - 1.0), 0.0, 1e-15);
}

TEST(ProjectTangent, ShapeMismatchThrows) {
  const ProductPoint x = point(CVector::Ones(2), CMatrix::Identity(2, 2));
  EXPECT_THROW(project_tangent(x, AmbientPair{CVector::Ones(3), CMatrix::Ones(2, 2)}),
               DimensionError);
}

TEST(Retract, Examples) {
  const ProductPoint x = point(CVector::Ones(1), CMatrix(0, 0));
  const TangentVector v{CVector::Constant(1, J), CMatrix(0, 0)};
  const ProductPoint y = retract(x, v, 1.0);
  EXPECT_NEAR(std::abs(y.theta(0) - (1.0 + J) / std::sqrt(2.0)), 0.0, 1e-15);

  std::mt19937_64 rng(9);
  const ProductPoint r = random_point(4, 3, 2, rng);
  const ProductPoint r0 = retract(r, project_tangent(r, random_ambient(r, rng)), 0.0);
  EXPECT_EQ(r0.theta, r.theta);
  EXPECT_EQ(r0.w, r.w);

  CMatrix w(2, 1);
  w << 1.0, 0.0;
  CMatrix dw(2, 1);
  dw << 0.0, 1.0;
  const ProductPoint z = retract(point(CVector(0), w),
                                 TangentVector{CVector(0), dw}, 1.0);
  EXPECT_NEAR(std::abs(z.w(0, 0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(z.w(1, 0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(Retract, DegenerateThrows) {
  const ProductPoint x = point(CVector::Ones(1), CMatrix(0, 0));
  // not tangent, but retract only needs theta + step v = 0
  const TangentVector v{CVector::Constant(1, -1.0), CMatrix(0, 0)};
  EXPECT_THROW(retract(x, v, 1.0), DegenerateRetraction);
  CMatrix w(2, 1);
  w << 1.0, 0.0;
  const ProductPoint y = point(CVector(0), w);
  EXPECT_THROW(retract(y, TangentVector{CVector(0), -w}, 1.0),
               DegenerateRetraction);
}

TEST(MakePoint, RejectsOffManifold) {
  EXPECT_THROW(make_point(CVector::Constant(1, 1.1), CMatrix(0, 0)), DomainError);
  EXPECT_THROW(make_point(CVector(0), CMatrix::Ones(2, 1)), DomainError);
}

TEST(RiemannianGradient, Examples) {
  const ProductPoint x = point(CVector::Ones(1), CMatrix(0, 0));
  EXPECT_EQ(norm(riemannian_gradient(x, {CVector::Zero(1), CMatrix(0, 0)})), 0.0);
  EXPECT_NEAR(norm(riemannian_gradient(x, {CVector::Constant(1, 5.0), CMatrix(0, 0)})),
              0.0, 1e-15);
  const TangentVector g =
      riemannian_gradient(x, {CVector::Constant(1, 1.0 + 2.0 * J), CMatrix(0, 0)});
  EXPECT_NEAR(std::abs(g.d_theta(0) - 2.0 * J), 0.0, 1e-15);
}

// Property sweep over 1000 random points; the acceptance binary repeats it.
TEST(ManifoldProperties, ThousandRandomPoints) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const ProductPoint x = random_point(1 + t % 9, 1 + t % 4, 1 + t % 3, rng);
    ASSERT_TRUE(x.on_manifold());
    const AmbientPair u = random_ambient(x, rng);
    const TangentVector p = project_tangent(x, u);
    const TangentVector pp = project_tangent(x, AmbientPair{p.d_theta, p.d_w});
    ASSERT_LT((pp.d_theta - p.d_theta).norm() + (pp.d_w - p.d_w).norm(), 1e-12);
    ASSERT_LT(tangency_residual(x, p), 1e-10);
    const TangentVector resid{u.theta - p.d_theta, u.w - p.d_w};
    ASSERT_NEAR(inner_product(p, resid), 0.0, 1e-10);

    const ProductPoint x0 = retract(x, p, 0.0);
    ASSERT_EQ(x0.theta, x.theta);
    ASSERT_EQ(x0.w, x.w);
    const ProductPoint x1 = retract(x, p, 0.3);
    ASSERT_TRUE(x1.on_manifold());

    for (double h : {1e-4, 1e-5}) {
      const ProductPoint a = retract(x, p, h);
      const ProductPoint b = retract(x, -p, h);
      const CVector dt = (a.theta - b.theta) / (2 * h);
      const CMatrix dw = (a.w - b.w) / (2 * h);
      const double err = std::sqrt((dt - p.d_theta).squaredNorm() +
                                   (dw - p.d_w).squaredNorm());
      ASSERT_LT(err, 1e-3 * std::max(norm(p), 1e-300));
    }
  }
}

TEST(SquaredDistance, MatchesAmbientNorm) {
  std::mt19937_64 rng(5);
  const ProductPoint a = random_point(3, 2, 2, rng);
  const ProductPoint b = random_point(3, 2, 2, rng);
  EXPECT_NEAR(squared_distance(a, b),
              (a.theta - b.theta).squaredNorm() + (a.w - b.w).squaredNorm(), 1e-14);
  EXPECT_EQ(squared_distance(a, a), 0.0);
}
