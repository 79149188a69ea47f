#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support/testing.hpp"

using namespace ftct;
using ftct::testing::Gen;

namespace {

double tg_f(double t) { return std::exp(-t * t) * std::tanh(t); }
double tg_df(double t) {
  double c = std::cosh(t);
  return std::exp(-t * t) * (1.0 / (c * c) - 2.0 * t * std::tanh(t));
}

}  // namespace

TEST(IndexForm, EuclideanLinearField) {
  auto ch = euclidean_chart();
  const double l = 1.7;
  auto gamma = geodesic_ivp(ch, {0.0, 0.0}, {1.0, 0.0}, l);
  VectorField X = [l](double t) { return FieldValue{{0.0, t / l}, {0.0, 1.0 / l}}; };
  EXPECT_NEAR(index_form(ch, gamma, X, X), 1.0 / l, 1e-12);
}

TEST(IndexForm, ConstantCurvatureSineField) {
  // On the unit sphere along a meridian from t0 to l, X = sin(t) E.
  auto S = build_profile(constant_curvature_spec(1.0), 3.0);
  auto ch = polar_chart(S, 0.01, 2.5, {1.0, 0.0});
  const double l = 1.2, t0 = 0.3;
  auto gamma = geodesic_ivp(ch, {t0, 0.0}, {1.0, 0.0}, l - t0);
  // X(s) = sin(t0 + s) E with E = (0, 1/sin t) in polar coordinates: X = (0, 1).
  VectorField X = [](double) { return FieldValue{{0.0, 1.0}, {0.0, 0.0}}; };
  // integrand cos^2 t - sin^2 t
  double expected = 0.5 * (std::sin(2.0 * l) - std::sin(2.0 * t0));
  EXPECT_NEAR(index_form(ch, gamma, X, X), expected, 1e-9);
}

TEST(IndexForm, ModelFieldClosedFormMatchesQuadrature) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto H = build_profile(hyperbolic_spec(), 3.0);
  auto Ss = build_profile(constant_curvature_spec(1.0), 3.0);
  for (double l : {0.8, 1.0, 1.5, 2.0}) {
    auto m = model_comparison_fields(S, l, M_PI / 2, 1.0);
    EXPECT_NEAR(m.I_X, tg_df(l) / tg_f(l), 1e-9);
    EXPECT_NEAR(m.I_X_quadrature, m.I_X, 1e-6);
  }
  for (double l : {1.6, 2.0, 2.5}) {
    auto m = model_comparison_fields(Ss, l, 1.0, 1.2);
    EXPECT_NEAR(m.I_X, std::cos(l) / std::sin(l), 1e-8);
    EXPECT_NEAR(m.I_Jperp, std::pow(1.2 * std::sin(1.0), 2) * m.I_X, 1e-12);
  }
  EXPECT_THROW(model_comparison_fields(H, 1.0, 1.0, 1.0), Error);  // no waist
}

TEST(IndexForm, DeltaTermAgainstTrapezoidOracle) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  for (double delta : {0.02, 0.1}) {
    auto Sd = delta_modification(S, delta);
    const double l = 1.0;
    auto m = model_comparison_fields(Sd, l, 0.7, 1.0);
    double fl = Sd.f(l);
    double oracle = delta * ftct::testing::trapezoid([&](double t) { return Sd.f(t) * Sd.f(t); }, 0.0, l, 20000) /
                    (fl * fl);
    EXPECT_NEAR(m.delta_term, oracle, 1e-8);
  }
}

TEST(IndexForm, WaistPrecondition) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  try {
    model_comparison_fields(S, 0.5, 1.0, 1.0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PreconditionFailed);
  }
}

TEST(JacobiFields, EuclideanFieldIsLinear) {
  auto ch = euclidean_chart();
  Vec2 x{1.2, 0.4};
  double l = std::sqrt(dot(x, x));
  auto gamma = geodesic_ivp(ch, {0.0, 0.0}, x, l);
  Vec2 u = unit_vector(0.9);
  auto J = jacobi_field(ch, gamma, u);
  for (double t : {0.0, 0.3, 0.8, l}) {
    auto j = J(t);
    EXPECT_NEAR(j.value[0], t / l * u[0], 1e-7);
    EXPECT_NEAR(j.value[1], t / l * u[1], 1e-7);
    EXPECT_NEAR(j.deriv[0], u[0] / l, 1e-7);
  }
  auto Jp = orthogonal_component(ch, J.field(), gamma);
  Vec2 vl = gamma.end_velocity();
  for (double t : {0.2, 0.7, l}) EXPECT_NEAR(dot(Jp(t).value, vl), 0.0, 1e-7);
}

TEST(JacobiFields, PropertyOrthogonalComponentOnRandersChart) {
  auto ch = constant_randers_chart(identity2(), {0.3, -0.2});
  Gen g(501);
  for (int i = 0; i < 4; ++i) {
    Vec2 x = g.annulus(0.8, 1.5);
    auto mg = minimal_geodesics(ch, {0.0, 0.0}, x, {}, true);
    const auto& gamma = mg.paths.front();
    auto J = jacobi_field(ch, gamma, g.unit());
    auto Jp = orthogonal_component(ch, J.field(), gamma);
    double l = gamma.forward_length();
    Vec2 vl = gamma.end_velocity();
    EXPECT_NEAR(bilinear(ch.fundamental_tensor(gamma.end(), vl), vl, Jp(l).value), 0.0, 1e-7);
  }
}

TEST(ParallelFields, PreserveTheMetricAlongRiemannianGeodesics) {
  auto ch = riemannian_chart(identity2(), 0.4, DiskDomain{{0.0, 0.0}, 3.0});
  auto mg = minimal_geodesics(ch, {-1.0, 0.2}, {1.0, 0.6}, {}, true);
  const auto& gamma = mg.paths.front();
  Vec2 e0{0.3, 0.9};
  auto E = parallel_field(ch, gamma, e0);
  auto gnorm = [&](double t) {
    Vec2 x = gamma.position(t), v = gamma.velocity(t);
    Vec2 e = E(t).value;
    return std::make_pair(bilinear(ch.fundamental_tensor(x, v), e, e), bilinear(ch.fundamental_tensor(x, v), e, v));
  };
  auto [n0, a0] = gnorm(0.0);
  for (double f : {0.25, 0.5, 1.0}) {
    auto [n, a] = gnorm(f * gamma.t_end());
    EXPECT_NEAR(n, n0, 1e-8);
    EXPECT_NEAR(a, a0, 1e-8);
  }
}

TEST(KeyLemma, SingleCombinationOnModelChart) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto ch = normal_chart(S, 2.0);
  KeyLemmaConfig cfg;
  cfg.x = {1.0, 0.0};
  cfg.c_dir = direction_at_angle(ch, cfg.x, {1.0, 0.0}, M_PI / 3);
  auto r = key_lemma_check(ch, S, 0.05, cfg, M_PI / 3 - 1e-9);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.omega, M_PI / 3, 1e-7);
  EXPECT_GE(r.min_L_margin, -1e-7);
  EXPECT_GE(r.index_gap_margin, -1e-6);
  EXPECT_EQ(r.L_table.size(), 41u);
  EXPECT_GT(r.eps_prime, 0.0);
  EXPECT_LE(r.eps_prime, cfg.eps);
  double C1 = ftct::testing::trapezoid([&](double t) { return tg_f(t) * tg_f(t); }, 0.0, 1.0, 20000) /
              (2.0 * tg_f(1.0) * tg_f(1.0));
  EXPECT_NEAR(r.C1, C1, 1e-8);

  auto path = std::filesystem::temp_directory_path() / "ftct_key_lemma.csv";
  write_csv(r, path.string());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "s,L,Ltilde,margin");
}

TEST(KeyLemma, RejectsNonBerwaldChart) {
  auto S = build_profile(tanh_gauss_spec(), 3.0);
  auto ch = linear_randers_chart(identity2(), {0.0, 0.0}, {{{0.25, 0.0}, {0.0, 0.0}}}, DiskDomain{{0.0, 0.0}, 2.0});
  KeyLemmaConfig cfg;
  cfg.x = {1.0, 0.0};
  cfg.c_dir = {0.0, 1.0};
  try {
    key_lemma_check(ch, S, 0.05, cfg, 1.0);
    ADD_FAILURE();
  } catch (const HypothesisFailedError& e) {
    EXPECT_FALSE(e.failures().empty());
  }
}
