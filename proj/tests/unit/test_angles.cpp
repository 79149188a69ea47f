#include <gtest/gtest.h>

#include "support/testing.hpp"

using namespace ftct;
using ftct::testing::Gen;

namespace {

// Angle between -v and u in the inner product A.
double a_angle(const Mat2& A, const Vec2& v, const Vec2& u) {
  double vu = bilinear(A, v, u), vv = bilinear(A, v, v), uu = bilinear(A, u, u);
  return std::acos(std::clamp(-vu / std::sqrt(vv * uu), -1.0, 1.0));
}

}  // namespace

TEST(Angles, EuclideanMatchesElementaryAngle) {
  auto ch = euclidean_chart();
  Gen g(401);
  for (int i = 0; i < 30; ++i) {
    Vec2 z = g.annulus(0.5, 2.0), u = g.unit();
    auto m = angle_first_variation(ch, z, u);
    EXPECT_NEAR(m.forward_angle, a_angle(identity2(), z, u), 1e-9);
    EXPECT_NEAR(m.forward_angle + m.backward_angle, M_PI, 1e-9);
    EXPECT_DOUBLE_EQ(m.lambda, 1.0);
    EXPECT_EQ(m.branches, 1u);
  }
}

TEST(Angles, ConstantRiemannianMatchesInnerProductAngle) {
  Gen g(402);
  for (int i = 0; i < 10; ++i) {
    Mat2 A = g.spd();
    auto ch = riemannian_chart(A);
    Vec2 z = g.annulus(0.5, 2.0), u = g.unit();
    auto m = angle_first_variation(ch, z, u);
    EXPECT_NEAR(m.forward_angle, a_angle(A, z, u), 1e-8);
  }
}

TEST(Angles, DifferenceQuotientAgreesWithFirstVariation) {
  auto ch = constant_randers_chart(identity2(), {0.5, 0.0});
  Vec2 x{1.0, 0.5};
  auto c = geodesic_ivp(ch, x, {-0.3, 1.0}, 1.0);
  auto fv0 = angle_first_variation(ch, x, c.velocity(0.0));
  auto dq0 = angle_difference_quotient(ch, c, 0.0, AngleSide::Forward);
  EXPECT_NEAR(fv0.forward_angle, 1.594990225, 1e-8);
  EXPECT_NEAR(dq0.forward_angle, fv0.forward_angle, 5e-4);
  EXPECT_NEAR(fv0.forward_angle + fv0.backward_angle, M_PI, 1e-9);
  EXPECT_NEAR(fv0.lambda, ch.F(x, -1.0 * c.velocity(0.0)), 1e-12);
  EXPECT_GE(fv0.lambda, 1.0);

  auto fv1 = angle_first_variation(ch, c.end(), c.velocity(1.0));
  auto dq1 = angle_difference_quotient(ch, c, 1.0, AngleSide::Backward);
  EXPECT_NEAR(fv1.backward_angle, 0.983977292, 1e-8);
  EXPECT_NEAR(dq1.backward_angle, fv1.backward_angle, 5e-4);
  EXPECT_EQ(dq1.method, AngleMethod::DifferenceQuotient);
  EXPECT_EQ(dq1.quotients.size(), 7u);
}

TEST(Angles, PropertyMethodsAgreeOnRandomRiemannianCharts) {
  Gen g(403);
  for (int i = 0; i < 8; ++i) {
    auto ch = riemannian_chart(g.spd(0.7, 1.5), g.uniform(0.0, 0.2), DiskDomain{{0.0, 0.0}, 3.0});
    Vec2 z = g.annulus(0.4, 1.2);
    auto c = geodesic_ivp(ch, z, g.unit(), 0.3);
    auto fv = angle_first_variation(ch, z, c.velocity(0.0));
    auto dq = angle_difference_quotient(ch, c, 0.0, AngleSide::Forward);
    EXPECT_NEAR(dq.forward_angle, fv.forward_angle, 5e-4);
    EXPECT_NEAR(fv.forward_angle + fv.backward_angle, M_PI, 1e-5);
  }
}

TEST(Angles, RichardsonRemovesLowOrderTerms) {
  std::vector<double> q;
  for (int k = 0; k < 5; ++k) {
    double h = 0.1 / std::ldexp(1.0, k);
    q.push_back(2.0 + 3.0 * h - 5.0 * h * h);
  }
  for (double r : detail::richardson2(q)) EXPECT_NEAR(r, 2.0, 1e-13);
}

TEST(Angles, PreconditionsEnforced) {
  auto ch = euclidean_chart();
  auto c = geodesic_ivp(ch, {1.0, 0.0}, {0.0, 1.0}, 1.0);
  auto kind = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Inconclusive;
  };
  EXPECT_EQ(kind([&] { angle_difference_quotient(ch, c, 1.0, AngleSide::Forward); }), ErrorKind::PreconditionFailed);
  EXPECT_EQ(kind([&] { angle_difference_quotient(ch, c, 0.0, AngleSide::Backward); }), ErrorKind::PreconditionFailed);
  EXPECT_EQ(kind([&] { angle_first_variation(ch, {0.0, 0.0}, {1.0, 0.0}); }), ErrorKind::PreconditionFailed);
  EXPECT_EQ(kind([&] { angle_first_variation(ch, {1.0, 0.0}, {0.0, 0.0}); }), ErrorKind::InvalidVector);
}
