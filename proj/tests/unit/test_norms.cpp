#include <gtest/gtest.h>

#include "support/testing.hpp"

using namespace ftct;
using ftct::testing::Gen;

namespace {

Norm2 random_norm(Gen& g) {
  switch (g.integer(0, 2)) {
    case 0: return Norm2::euclidean();
    case 1: return Norm2::riemannian(g.spd());
    default: {
      Mat2 A = g.spd();
      return Norm2::randers(A, g.covector(A, g.uniform(0.0, 0.8)));
    }
  }
}

// (v1^4 + v1^2 v2^2 + v2^4)^(1/4): smooth and strongly convex away from 0.
struct QuarticNorm {
  template <class T>
  T operator()(const Vec<T, 2>& v) const {
    using std::sqrt;
    T a = v[0] * v[0], b = v[1] * v[1];
    return sqrt(sqrt(a * a + a * b + b * b));
  }
};

}  // namespace

TEST(Norms, EuclideanValuesAndTensor) {
  auto n = Norm2::euclidean();
  EXPECT_DOUBLE_EQ(n({3.0, 4.0}), 5.0);
  EXPECT_DOUBLE_EQ(n({0.0, 0.0}), 0.0);
  auto g = n.fundamental_tensor({0.3, -2.0});
  EXPECT_DOUBLE_EQ(g[0][0], 1.0);
  EXPECT_DOUBLE_EQ(g[0][1], 0.0);
  EXPECT_DOUBLE_EQ(g[1][1], 1.0);
  EXPECT_TRUE(n.reversible());
}

TEST(Norms, RandersIsAsymmetric) {
  auto n = Norm2::randers(identity2(), {0.5, 0.0});
  EXPECT_DOUBLE_EQ(n({1.0, 0.0}), 1.5);
  EXPECT_DOUBLE_EQ(n({-1.0, 0.0}), 0.5);
  EXPECT_FALSE(n.reversible());
  EXPECT_EQ(n.family(), NormFamily::Randers);
}

TEST(Norms, RiemannianMatchesQuadraticForm) {
  Mat2 A{{{2.0, 0.5}, {0.5, 1.0}}};
  auto n = Norm2::riemannian(A);
  Vec2 v{1.0, -2.0};
  EXPECT_NEAR(n(v), std::sqrt(2.0 - 2.0 + 4.0), 1e-15);
  auto g = n.fundamental_tensor(v);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(g[i][j], A[i][j]);
}

TEST(Norms, RejectsInvalidInput) {
  auto expect_kind = [](auto&& fn, ErrorKind k) {
    try {
      fn();
      ADD_FAILURE() << "no exception";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), k) << e.what();
    }
  };
  expect_kind([] { Norm2::randers(identity2(), {1.0, 0.0}); }, ErrorKind::InvalidNorm);
  expect_kind([] { Norm2::riemannian({{{1.0, 0.0}, {0.0, -1.0}}}); }, ErrorKind::StrongConvexityViolated);
  expect_kind([] { Norm2::riemannian({{{1.0, 2.0}, {2.0, 1.0}}}); }, ErrorKind::StrongConvexityViolated);
  expect_kind([] { Norm2::euclidean().fundamental_tensor({0.0, 0.0}); }, ErrorKind::NormNotSmoothAtZero);
  expect_kind([] { Norm2::euclidean()({std::nan(""), 1.0}); }, ErrorKind::InvalidVector);
}

TEST(Norms, PropertyPositiveHomogeneity) {
  Gen g(101);
  for (int i = 0; i < 200; ++i) {
    auto n = random_norm(g);
    Vec2 v = g.vec(3.0);
    double lam = g.uniform(0.01, 10.0);
    EXPECT_NEAR(n(lam * v), lam * n(v), 1e-12 * lam * n(v));
    auto gv = n.fundamental_tensor(v), glv = n.fundamental_tensor(lam * v);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) EXPECT_NEAR(gv[a][b], glv[a][b], 1e-10);
  }
}

TEST(Norms, PropertyTriangleInequality) {
  Gen g(102);
  for (int i = 0; i < 500; ++i) {
    auto n = random_norm(g);
    Vec2 a = g.vec(2.0), b = g.vec(2.0);
    EXPECT_LE(n(a + b), n(a) + n(b) + 1e-12);
  }
}

TEST(Norms, PropertyTensorReproducesNorm) {
  Gen g(103);
  for (int i = 0; i < 200; ++i) {
    auto n = random_norm(g);
    Vec2 v = g.vec(2.0);
    EXPECT_NEAR(n.inner(v, v, v), n(v) * n(v), 1e-11);
  }
}

TEST(Norms, PropertyFundamentalInequality) {
  // g_v(v, w) <= F(v) F(w)
  Gen g(104);
  for (int i = 0; i < 300; ++i) {
    auto n = random_norm(g);
    Vec2 v = g.vec(2.0), w = g.vec(2.0);
    EXPECT_LE(n.inner(v, v, w), n(v) * n(w) + 1e-11);
  }
}

TEST(Norms, TensorMatchesFiniteDifferenceHessian) {
  Gen g(105);
  for (int i = 0; i < 100; ++i) {
    auto n = random_norm(g);
    Vec2 v = g.vec(2.0);
    auto G = n.fundamental_tensor(v);
    auto H = ftct::testing::fd_energy_hessian([&](const Vec2& w) { return n(w); }, v);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) EXPECT_NEAR(G[a][b], H[a][b], 1e-5);
  }
}

TEST(Norms, CustomNormUsesAutomaticDerivatives) {
  auto n = Norm2::custom(QuarticNorm{}, "quartic");
  EXPECT_EQ(n.family(), NormFamily::Custom);
  EXPECT_NEAR(n({1.0, 1.0}), std::pow(3.0, 0.25), 1e-15);
  Gen g(106);
  for (int i = 0; i < 50; ++i) {
    Vec2 v = g.vec(2.0);
    auto G = n.fundamental_tensor(v);
    auto H = ftct::testing::fd_energy_hessian([&](const Vec2& w) { return n(w); }, v);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) EXPECT_NEAR(G[a][b], H[a][b], 1e-5);
  }
}
