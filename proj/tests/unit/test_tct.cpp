#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support/testing.hpp"

using namespace ftct;
using ftct::testing::Gen;

namespace {

double euclid(const Vec2& a) { return std::sqrt(dot(a, a)); }

// Interior angle at a of the Euclidean triangle (a, b, c).
double law_of_cosines(const Vec2& a, const Vec2& b, const Vec2& c) {
  double ab = euclid(b - a), ac = euclid(c - a), bc = euclid(c - b);
  return std::acos((ab * ab + ac * ac - bc * bc) / (2.0 * ab * ac));
}

}  // namespace

TEST(Triangles, MeasuredEdgeLengthOfRandersSegment) {
  auto ch = constant_randers_chart(identity2(), {0.5, 0.0});
  auto c = geodesic_ivp(ch, {1.0, 0.0}, {-1.0, 0.0}, 2.0);
  EXPECT_NEAR(measured_edge_length(ch, c), 6.0, 1e-10);
  EXPECT_NEAR(c.reverse_length(), 6.0, 1e-10);
}

TEST(Triangles, EuclideanAnglesFollowLawOfCosines) {
  auto ch = euclidean_chart();
  Gen g(601);
  for (int i = 0; i < 10; ++i) {
    Vec2 x = g.annulus(0.5, 2.0), y = g.annulus(0.5, 2.0);
    if (std::abs(x[0] * y[1] - x[1] * y[0]) < 0.1) continue;
    auto T = make_forward_triangle(ch, x, y);
    EXPECT_NEAR(T.forward_angle_x, law_of_cosines(x, {0.0, 0.0}, y), 1e-8);
    EXPECT_NEAR(T.backward_angle_y, law_of_cosines(y, {0.0, 0.0}, x), 1e-8);
    EXPECT_NEAR(T.d_xy, euclid(y - x), 1e-9);
    EXPECT_NEAR(T.L_m, T.d_xy, 1e-9);
    EXPECT_EQ(T.edge_multiplicity, 1u);
  }
}

TEST(Triangles, RandersMeasuredLengthDominatesBothDirections) {
  auto ch = constant_randers_chart(identity2(), {0.3, 0.2});
  auto T = make_forward_triangle(ch, {1.0, 0.2}, {-0.4, 1.1});
  EXPECT_GE(T.L_m, T.d_xy - 1e-10);
  EXPECT_GE(T.L_m, T.d_m_xy - 1e-10);
}

TEST(Tct, EqualityCaseOnModelChart) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto ch = normal_chart(S, 2.0);
  auto T = make_forward_triangle(ch, polar_to_normal(0.8, 0.2), polar_to_normal(1.1, 1.0));
  auto H = check_hypotheses(ch, T, S);
  EXPECT_TRUE(H.pass);
  EXPECT_TRUE(H.outside_ball);
  EXPECT_LT(H.tangent_curvature_max, 1e-6);
  auto r = verify_tct(ch, T, S, &H);
  EXPECT_EQ(r.status, TctStatus::Pass);
  EXPECT_NEAR(r.angle_x, r.model_angle_x, 1e-4);
  EXPECT_NEAR(r.angle_y, r.model_angle_y, 1e-4);
  EXPECT_NEAR(r.d_xy, surface_distance(S, {0.8, 0.2}, {1.1, 1.0}), 1e-8);
}

TEST(Tct, HypothesesRejectTriangleNearPole) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto ch = normal_chart(S, 2.0);
  auto T = make_forward_triangle(ch, polar_to_normal(0.3, 0.2), polar_to_normal(1.1, 1.0));
  auto H = check_hypotheses(ch, T, S);
  EXPECT_FALSE(H.outside_ball);
  EXPECT_FALSE(H.pass);
  EXPECT_FALSE(H.failures.empty());
  EXPECT_THROW(verify_tct(ch, T, S, &H), HypothesisFailedError);
}

TEST(Tct, HypothesesRejectNonBerwaldChart) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto ch = linear_randers_chart(identity2(), {0.0, 0.0}, {{{0.25, 0.0}, {0.0, 0.0}}}, DiskDomain{{0.0, 0.0}, 2.0});
  auto T = make_forward_triangle(ch, {1.0, 0.0}, {0.0, 1.0});
  auto H = check_hypotheses(ch, T, S);
  EXPECT_FALSE(H.pass);
  EXPECT_GT(H.tangent_curvature_max, 1e-4);
}

TEST(Tct, UnreachableSideIsNotApplicable) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto ch = euclidean_chart();
  auto T = make_forward_triangle(ch, {1.2, 0.0}, {-1.5, 0.1});
  TctOptions o;
  o.force = true;
  auto r = verify_tct(ch, T, S, nullptr, o);
  EXPECT_EQ(r.status, TctStatus::NotApplicable);
  EXPECT_TRUE(r.forced);
  EXPECT_TRUE(std::isnan(r.model_angle_x));
}

TEST(Tct, PropertyWeakModelAnglesNeverExceedExact) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto ch = normal_chart(S, 2.0);
  Gen g(602);
  for (int i = 0; i < 3; ++i) {
    auto T = make_forward_triangle(ch, polar_to_normal(g.uniform(0.75, 1.3), 0.0),
                                   polar_to_normal(g.uniform(0.75, 1.3), g.uniform(0.3, 1.5)));
    auto H = check_hypotheses(ch, T, S);
    ASSERT_TRUE(H.pass);
    TctOptions weak;
    weak.mode = TctMode::Weak;
    weak.delta = 0.05;
    auto re = verify_tct(ch, T, S, &H), rw = verify_tct(ch, T, S, &H, weak);
    if (rw.status == TctStatus::NotApplicable) continue;
    EXPECT_LE(rw.model_angle_x, re.model_angle_x + 1e-6);
    EXPECT_LE(rw.model_angle_y, re.model_angle_y + 1e-6);
  }
}

TEST(Tct, InteriorAnglesAlongEdgeSumAtMostPi) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto ch = normal_chart(S, 2.0);
  auto T = make_forward_triangle(ch, polar_to_normal(0.9, 0.0), polar_to_normal(1.2, 1.3));
  for (double f : {0.25, 0.5, 0.75}) {
    double s = f * T.c.t_end();
    Vec2 z = T.c.position(s);
    auto m = angle_first_variation(ch, z, T.c.velocity(s));
    EXPECT_LE(m.backward_angle + m.forward_angle, M_PI + 1e-9);
  }
}

TEST(Tct, CsvSchema) {
  TctReport r;
  r.seed = 9;
  r.status = TctStatus::Pass;
  auto path = std::filesystem::temp_directory_path() / "ftct_tct.csv";
  write_csv({r}, path.string());
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "seed,d_px,d_py,d_xy,L_m,angle_x,model_angle_x,angle_y,model_angle_y,min_margin,status");
  EXPECT_EQ(row.substr(0, 2), "9,");
  EXPECT_EQ(row.substr(row.size() - 4), "PASS");
}

TEST(Tct, SamplerIsDeterministic) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto ch = normal_chart(S, 2.0);
  auto a = sample_admissible_triangle(ch, S, 77, 2), b = sample_admissible_triangle(ch, S, 77, 2);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->triangle.x, b->triangle.x);
  EXPECT_EQ(a->triangle.y, b->triangle.y);
  EXPECT_TRUE(a->hypotheses.pass);
  double rx = euclid(a->triangle.x);
  EXPECT_GT(rx, *S.rho());
  EXPECT_LT(rx, 1.5);
}
