#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support/testing.hpp"

using namespace ftct;
using ftct::testing::Gen;

namespace {

double tg_f(double t) { return std::exp(-t * t) * std::tanh(t); }

double tg_G(double t) {
  double c = std::cosh(t);
  return 8.0 * t / std::sinh(2.0 * t) + 2.0 / (c * c) - 4.0 * t * t + 2.0;
}

// Root of sech^2 t = 2 t tanh t by plain bisection.
double tg_rho() {
  auto h = [](double t) {
    double c = std::cosh(t);
    return 1.0 / (c * c) - 2.0 * t * std::tanh(t);
  };
  double a = 0.1, b = 2.0;
  for (int i = 0; i < 200; ++i) {
    double m = 0.5 * (a + b);
    (h(a) > 0.0) == (h(m) > 0.0) ? a = m : b = m;
  }
  return 0.5 * (a + b);
}

template <class Fn>
void expect_error(Fn&& fn, ErrorKind kind) {
  try {
    fn();
    ADD_FAILURE() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace

TEST(Profile, ClosedFormCurvatureOnGrid) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  for (int i = 1; i <= 1000; ++i) {
    double t = 3.0 * i / 1000;
    EXPECT_NEAR(S.curvature(t), tg_G(t), 1e-8) << t;
    EXPECT_NEAR(S.f(t), tg_f(t), 1e-15);
  }
  EXPECT_NEAR(S.curvature_at_pole(), 8.0, 1e-4);
  EXPECT_TRUE(S.von_mangoldt());
  ASSERT_TRUE(S.rho());
  EXPECT_NEAR(*S.rho(), tg_rho(), 1e-9);
}

TEST(Profile, CurvatureOdeReproducesClosedForm) {
  auto S = build_profile(ProfileSpec::curvature(TanhGaussCurvature{}, "ode"), 3.0);
  EXPECT_TRUE(S.from_ode());
  for (int i = 1; i <= 300; ++i) {
    double t = 3.0 * i / 300;
    EXPECT_NEAR(S.f(t), tg_f(t), 1e-9) << t;
    EXPECT_NEAR(S.df(t), (tg_f(t + 1e-6) - tg_f(t - 1e-6)) / 2e-6, 1e-7);
  }
  ASSERT_TRUE(S.rho());
  EXPECT_NEAR(*S.rho(), tg_rho(), 1e-7);
}

TEST(Profile, ConstantCurvatureProfiles) {
  auto sphere = build_profile(constant_curvature_spec(1.0), 3.0);
  auto hyper = build_profile(constant_curvature_spec(-1.0), 3.0);
  auto flat = build_profile(plane_spec(), 3.0);
  for (double t : {0.1, 0.7, 1.5, 2.9}) {
    EXPECT_NEAR(sphere.f(t), std::sin(t), 1e-9);
    EXPECT_NEAR(hyper.f(t), std::sinh(t), 1e-8);
    EXPECT_DOUBLE_EQ(flat.f(t), t);
  }
  ASSERT_TRUE(sphere.rho());
  EXPECT_NEAR(*sphere.rho(), M_PI / 2.0, 1e-7);
  EXPECT_FALSE(hyper.rho());
  EXPECT_TRUE(hyper.von_mangoldt());
}

TEST(Profile, IncreasingCurvatureIsNotVonMangoldt) {
  auto S = build_profile(ProfileSpec::curvature([](const auto& t) { return t; }, "ramp"), 1.5);
  EXPECT_FALSE(S.von_mangoldt());
}

TEST(Profile, VanishingProfileRejected) {
  expect_error([] { build_profile(constant_curvature_spec(1.0), 4.0); }, ErrorKind::ProfileVanishes);
}

TEST(Profile, OutOfRangeEvaluationRejected) {
  auto S = build_profile(plane_spec(), 2.0);
  expect_error([&] { S.f(2.5); }, ErrorKind::TruncationTooShort);
  expect_error([&] { S.f(-0.1); }, ErrorKind::TruncationTooShort);
}

TEST(Profile, DeltaModificationShiftsCurvature) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  for (double delta : {0.02, 0.1}) {
    auto Sd = delta_modification(S, delta);
    EXPECT_DOUBLE_EQ(Sd.delta(), delta);
    for (double t : {0.3, 0.9, 1.4}) EXPECT_NEAR(Sd.curvature(t), tg_G(t) - delta, 1e-9);
    ASSERT_TRUE(Sd.rho());
    EXPECT_GT(*Sd.rho(), *S.rho());
    // f_delta'' = -(G - delta) f_delta
    for (double t : {0.5, 1.2}) {
      double h = 1e-4;
      double fpp = (Sd.f(t + h) - 2.0 * Sd.f(t) + Sd.f(t - h)) / (h * h);
      EXPECT_NEAR(fpp, -(tg_G(t) - delta) * Sd.f(t), 1e-5);
    }
  }
}

TEST(Profile, ExportWritesTwoColumns) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto path = std::filesystem::temp_directory_path() / "ftct_profile_export.dat";
  export_profile(S, path.string(), 11);
  std::ifstream in(path);
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double t, f;
    ASSERT_TRUE(ss >> t >> f);
    EXPECT_NEAR(f, tg_f(t), 1e-15);
    ++rows;
  }
  EXPECT_EQ(rows, 11);
}

TEST(SurfaceGeometry, PlaneDistancesAndTriangles) {
  auto P = build_profile(plane_spec(), 10.0);
  EXPECT_NEAR(surface_distance(P, {3.0, 0.0}, {4.0, M_PI / 2}), 5.0, 1e-9);
  auto T = comparison_triangle(P, 3.0, 4.0, 5.0);
  EXPECT_NEAR(T.angle_p, M_PI / 2, 1e-9);
  EXPECT_NEAR(T.angle_x, std::atan2(4.0, 3.0), 1e-9);
  EXPECT_NEAR(T.angle_y, std::atan2(3.0, 4.0), 1e-9);
}

TEST(SurfaceGeometry, DistanceAgreesWithNormalChartBvp) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto ch = normal_chart(S, 2.0);
  Gen g(301);
  for (int i = 0; i < 6; ++i) {
    double ta = g.uniform(0.3, 1.6), tb = g.uniform(0.3, 1.6), th = g.uniform(0.1, 3.0);
    double d = surface_distance(S, {ta, 0.0}, {tb, th});
    EXPECT_NEAR(d, distance(ch, polar_to_normal(ta, 0.0), polar_to_normal(tb, th)), 1e-7);
  }
}

TEST(SurfaceGeometry, PropertyDistanceSymmetricAndTriangular) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  Gen g(302);
  for (int i = 0; i < 20; ++i) {
    Vec2 a{g.uniform(0.1, 1.8), g.uniform(0.0, 6.28)}, b{g.uniform(0.1, 1.8), g.uniform(0.0, 6.28)},
        c{g.uniform(0.1, 1.8), g.uniform(0.0, 6.28)};
    double ab = surface_distance(S, a, b), ba = surface_distance(S, b, a);
    EXPECT_NEAR(ab, ba, 1e-9);
    EXPECT_LE(ab, surface_distance(S, a, c) + surface_distance(S, c, b) + 1e-9);
    EXPECT_LE(ab, a[0] + b[0] + 1e-12);
  }
}

TEST(SurfaceGeometry, ComparisonTriangleRoundTrip) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  Gen g(303);
  for (int i = 0; i < 10; ++i) {
    double tx = g.uniform(0.3, 1.5), ty = g.uniform(0.3, 1.5), th = g.uniform(0.1, 1.4);
    auto R = realized_triangle(S, tx, ty, th);
    auto T = comparison_triangle(S, tx, ty, R.side_xy);
    EXPECT_NEAR(T.delta_theta, th, 1e-7);
    EXPECT_NEAR(T.angle_x, R.angle_x, 1e-7);
    EXPECT_NEAR(T.angle_y, R.angle_y, 1e-7);
    EXPECT_LT(T.round_trip_error, 1e-9);
  }
}

TEST(SurfaceGeometry, NoComparisonTriangleCases) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  expect_error([&] { comparison_triangle(S, 1.0, 1.0, 2.5); }, ErrorKind::NoComparisonTriangle);
  // D((1.2, 0), (1.5, pi)) is about 0.503, so side 0.8 is out of reach.
  expect_error([&] { comparison_triangle(S, 1.2, 1.5, 0.8); }, ErrorKind::NoComparisonTriangle);
  auto ramp = build_profile(ProfileSpec::curvature([](const auto& t) { return t; }, "ramp"), 1.5);
  expect_error([&] { comparison_triangle(ramp, 0.5, 0.6, 0.3); }, ErrorKind::Unsupported);
}

TEST(SurfaceGeometry, CutLocusAgreesWithShootingOracle) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  for (double t0 : {0.5, 1.0, 1.5}) {
    auto ray = cut_locus_ray(S, t0);
    ASSERT_FALSE(ray.empty);
    EXPECT_NEAR(ray.t_cut, ftct::testing::shooting_cut_endpoint(S, t0, 2000), 1e-2) << t0;
  }
}

TEST(SurfaceGeometry, PlaneHasNoCutLocusEndpoint) {
  auto P = build_profile(plane_spec(), 5.0);
  EXPECT_TRUE(cut_locus_ray(P, 1.0).empty);
}

TEST(DoubleTriangle, StraightConfigurationIsEquality) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto d = straight_double_triangle(S, 0.8, 1.1, 1.2, 0.4);
  auto r = double_triangle_check(S, d.pxy, d.pyz);
  EXPECT_TRUE(r.straight);
  EXPECT_NEAR(r.margin_x, 0.0, 1e-6);
  EXPECT_NEAR(r.margin_z, 0.0, 1e-6);
  EXPECT_TRUE(r.pass);
}

TEST(DoubleTriangle, PropertyRandomSamplesSatisfyGluing) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  for (std::uint64_t i = 0; i < 10; ++i) {
    auto s = sample_double_triangle(S, 42, i);
    ASSERT_TRUE(s);
    auto r = double_triangle_check(S, s->pxy, s->pyz);
    EXPECT_GE(r.margin_x, -1e-6);
    EXPECT_GE(r.margin_z, -1e-6);
    EXPECT_TRUE(r.pass);
  }
  auto a = sample_double_triangle(S, 42, 3), b = sample_double_triangle(S, 42, 3);
  EXPECT_EQ(a->pxy.side_xy, b->pxy.side_xy);
}
