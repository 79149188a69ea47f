#pragma once

// Jacobi fields along radial geodesics, index forms, and the key lemma
// L(s) <= L~(s) comparing lengths of radial variations in a chart against a
// delta-modified model surface.

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ftct/error.hpp"
#include "ftct/geometry.hpp"
#include "ftct/linalg.hpp"
#include "ftct/manifold.hpp"
#include "ftct/model_surface.hpp"
#include "ftct/revolution.hpp"

namespace ftct {

// A vector field along a curve in coordinates: components and their
// parameter derivative.
struct FieldValue {
  Vec2 value{};
  Vec2 deriv{};
};
using VectorField = std::function<FieldValue(double)>;

namespace detail {

inline double integrate_adaptive(const std::function<double(double)>& fn, double a, double b, double tol = 1e-11) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, a, b, 12, tol, &err);
}

}  // namespace detail

// J(t) = d/ds exp_p((t/l) exp_p^{-1}(c(s))) at s = 0, by central differences
// of the neighbouring radial geodesics to c(h) and c(-h).
class JacobiField {
 public:
  JacobiField(GeodesicPath plus, GeodesicPath minus, double l, double h)
      : plus_(std::move(plus)), minus_(std::move(minus)), l_(l), h_(h) {}

  double length() const { return l_; }
  double step() const { return h_; }

  FieldValue operator()(double t) const {
    double kp = plus_.forward_length() / l_, km = minus_.forward_length() / l_;
    FieldValue r;
    r.value = (0.5 / h_) * (plus_.position(t * kp) - minus_.position(t * km));
    r.deriv = (0.5 / h_) * (kp * plus_.velocity(t * kp) - km * minus_.velocity(t * km));
    return r;
  }

  VectorField field() const {
    return [self = *this](double t) { return self(t); };
  }

 private:
  GeodesicPath plus_, minus_;
  double l_, h_;
};

inline JacobiField jacobi_field(const FinslerChart& chart, const GeodesicPath& gamma, const Vec2& c_dir,
                                double h = 1e-4, const BvpOptions& bvp = {}) {
  if (gamma.empty()) fail(ErrorKind::PreconditionFailed, "empty radial geodesic");
  const Vec2 p = gamma.start(), x = gamma.end();
  const double l = gamma.forward_length();
  const Vec2 u = detail::unit_direction(chart, x, c_dir);
  const double speed = chart.F(x, c_dir);
  BvpOptions o = bvp;
  o.scan = false;
  o.seeds = {{polar_angle(gamma.start_velocity()), l}};
  auto neighbour = [&](double s) {
    auto st = geodesic_flow(chart, x, u, s * speed, o.fine_integration);
    Vec2 q{st[0], st[1]};
    auto mg = minimal_geodesics(chart, p, q, o, false);
    return geodesic_ivp(chart, p, unit_vector(mg.shots.front().angle), mg.shots.front().length, o.path_integration);
  };
  return JacobiField(neighbour(h), neighbour(-h), l, h);
}

// J_perp(t) = J(t) - (g_{gamma'(l)}(gamma'(l), J(l)) / l) t gamma'(t).
inline VectorField orthogonal_component(const FinslerChart& chart, const VectorField& J, const GeodesicPath& gamma) {
  const double l = gamma.forward_length();
  const Vec2 vl = gamma.end_velocity();
  const double a = bilinear(metric_tensor<double>(chart, gamma.end(), vl), vl, J(l).value) / l;
  return [&chart, J, gamma, a](double t) {
    FieldValue j = J(t);
    Vec2 x = gamma.position(t), v = gamma.velocity(t);
    Vec2 acc = geodesic_acceleration(chart, x, v);
    return FieldValue{j.value - (a * t) * v, j.deriv - a * v - (a * t) * acc};
  };
}

// D_T X = X' + N(gamma, T) X with N^i_k = dG^i/dv^k.
inline Vec2 covariant_derivative(const FinslerChart& chart, const Vec2& x, const Vec2& T, const FieldValue& X) {
  return X.deriv + matvec(spray_first(chart, x, T).dv, X.value);
}

inline double index_form(const FinslerChart& chart, const GeodesicPath& gamma, const VectorField& X,
                         const VectorField& Y, double tol = 1e-11) {
  auto integrand = [&](double t) {
    Vec2 x = gamma.position(t), T = gamma.velocity(t);
    auto s2 = spray_second(chart, x, T);
    Mat2 R = curvature_operator(s2, T);
    Mat2 g = metric_tensor<double>(chart, x, T);
    FieldValue a = X(t), b = Y(t);
    Vec2 Da = a.deriv + matvec(s2.dv, a.value), Db = b.deriv + matvec(s2.dv, b.value);
    return bilinear(g, Da, Db) - bilinear(g, matvec(R, a.value), b.value);
  };
  return detail::integrate_adaptive(integrand, gamma.t_begin(), gamma.t_end(), tol);
}

// Parallel field along gamma with E(0) = e0: E' = -N(gamma, gamma') E.
inline VectorField parallel_field(const FinslerChart& chart, const GeodesicPath& gamma, const Vec2& e0,
                                  const IntegrationOptions& io = {1e-12, 1e-12, 0.02, 1e-3, 200000}) {
  auto rhs = [&](const std::array<double, 2>& e, std::array<double, 2>& de, double t) {
    Vec2 d = -1.0 * matvec(spray_first(chart, gamma.position(t), gamma.velocity(t)).dv, Vec2{e[0], e[1]});
    de = {d[0], d[1]};
  };
  std::vector<double> ts{gamma.t_begin()};
  std::vector<Vec2> es{e0};
  std::array<double, 2> e{e0[0], e0[1]};
  integrate_observed(rhs, e, gamma.t_begin(), gamma.t_end(), io, [&](double t, const std::array<double, 2>& z) {
    ts.push_back(t);
    es.push_back({z[0], z[1]});
    return true;
  });
  // cubic Hermite between integrator steps, slopes from the transport equation
  std::vector<Vec2> ds;
  for (std::size_t i = 0; i < ts.size(); ++i)
    ds.push_back(-1.0 * matvec(spray_first(chart, gamma.position(ts[i]), gamma.velocity(ts[i])).dv, es[i]));
  return [ts, es, ds](double t) {
    t = std::clamp(t, ts.front(), ts.back());
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
    if (i + 1 >= ts.size()) i = ts.size() - 2;
    double h = ts[i + 1] - ts[i], s = (t - ts[i]) / h;
    double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s, h01 = -2 * s * s * s + 3 * s * s,
           h11 = s * s * s - s * s;
    double d00 = (6 * s * s - 6 * s) / h, d10 = 3 * s * s - 4 * s + 1, d01 = (-6 * s * s + 6 * s) / h,
           d11 = 3 * s * s - 2 * s;
    FieldValue r;
    r.value = h00 * es[i] + (h10 * h) * ds[i] + h01 * es[i + 1] + (h11 * h) * ds[i + 1];
    r.deriv = d00 * es[i] + d10 * ds[i] + d01 * es[i + 1] + d11 * ds[i + 1];
    return r;
  };
}

// ---- model side -------------------------------------------------------------

struct ModelComparison {
  double l = 0.0;
  double omega = 0.0;
  double lambda = 1.0;
  double delta = 0.0;
  double I_X = 0.0;             // I~(X~, X~) = f'(l)/f(l)
  double I_X_quadrature = 0.0;  // same value by quadrature of the index form
  double I_Jperp = 0.0;         // (lambda sin omega)^2 I~(X~, X~)
  double delta_term = 0.0;      // delta/f(l)^2 * int_0^l f^2
  double f_l = 0.0;
};

// On the model surface_delta along the meridian to distance l: X~ = f(t)/f(l) E~,
// J~_perp = lambda sin(omega) X~.
inline ModelComparison model_comparison_fields(const ModelSurface& surface_delta, double l, double omega,
                                               double lambda) {
  auto rho = surface_delta.rho();
  if (!rho || !(l > *rho)) fail(ErrorKind::PreconditionFailed, "l must exceed the waist of the modified model");
  if (l > surface_delta.t_max()) fail(ErrorKind::TruncationTooShort, "l beyond t_max");
  ModelComparison m;
  m.l = l;
  m.omega = omega;
  m.lambda = lambda;
  m.delta = surface_delta.delta();
  m.f_l = surface_delta.f(l);
  m.I_X = surface_delta.df(l) / m.f_l;
  m.I_X_quadrature = detail::integrate_adaptive(
                         [&](double t) {
                           double f = surface_delta.f(t), fp = surface_delta.df(t);
                           return fp * fp - surface_delta.curvature(t) * f * f;
                         },
                         0.0, l) /
                     (m.f_l * m.f_l);
  double ls = lambda * std::sin(omega);
  m.I_Jperp = ls * ls * m.I_X;
  double int_f2 = detail::integrate_adaptive(
      [&](double t) {
        double f = surface_delta.f(t);
        return f * f;
      },
      0.0, l);
  m.delta_term = m.delta * int_f2 / (m.f_l * m.f_l);
  return m;
}

// ---- key lemma ----------------------------------------------------------------

struct KeyLemmaConfig {
  Vec2 x{};                 // chart point c(0), not the base point
  Vec2 c_dir{};             // initial direction of c
  double eps = 0.1;         // epsilon: half-width of the window used to fit C2, C3
  int grid = 41;            // points on [-eps', eps']
  int fit_points = 10;      // per side, on (0, eps]
  double jacobi_step = 1e-4;
  double fd_step = 2e-3;    // for the first and second variation checks
  double tangent_tol = 1e-6;
  double convexity_tol = 1e-6;
  double lemma_slack = 1e-6;
  double L_slack = 1e-7;
  BvpOptions bvp{};
};

struct VariationReport {
  double l = 0.0;
  double omega = 0.0;
  double lambda = 1.0;
  double delta = 0.0;
  std::vector<std::pair<double, Vec2>> J_samples;
  std::vector<std::pair<double, Vec2>> J_perp_samples;
  double I_value = 0.0;        // I(J_perp, J_perp)
  double model_I_value = 0.0;  // I~(J~_perp, J~_perp)
  double C1 = 0.0;
  double C2_est = 0.0;
  double C3_est = 0.0;
  double eps_prime = 0.0;
  std::vector<std::pair<double, double>> L_table;
  std::vector<std::pair<double, double>> Ltilde_table;

  double tangent_curvature = 0.0;
  double convexity_margin = 0.0;
  double linear_growth_residual = 0.0;
  double orthogonality_residual = 0.0;
  double endpoint_error = 0.0;
  double first_variation_error = 0.0;
  double second_variation_error = 0.0;
  double index_gap_margin = 0.0;  // I~ - I - delta C1 sin^2 omega
  double field_gap_margin = 0.0;  // I~(X~) - I(X) - delta term
  double min_L_margin = 0.0;    // min over the grid of L~ - L
  bool pass = false;
};

inline void write_csv(const VariationReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  out.precision(17);
  out << "s,L,Ltilde,margin\n";
  for (std::size_t i = 0; i < r.L_table.size(); ++i) {
    double s = r.L_table[i].first, L = r.L_table[i].second, Lt = r.Ltilde_table[i].second;
    out << s << ',' << L << ',' << Lt << ',' << (Lt - L) << '\n';
  }
}

// Unit direction u at x with g_v(v, u) / max(1, F(-u)) = cos(omega), turning
// counterclockwise from v.
inline Vec2 direction_at_angle(const FinslerChart& chart, const Vec2& x, const Vec2& v, double omega) {
  const double a0 = polar_angle(v);
  const Mat2 g = metric_tensor<double>(chart, x, v);
  auto cosine = [&](double phi) {
    Vec2 u = detail::unit_direction(chart, x, unit_vector(a0 + phi));
    return bilinear(g, v, u) / std::max(1.0, chart.F(x, -1.0 * u));
  };
  double target = std::cos(omega);
  if (omega <= 0.0) return detail::unit_direction(chart, x, v);
  auto fn = [&](double phi) { return cosine(phi) - target; };
  double lo = 0.0, hi = M_PI;
  if (fn(hi) > 0.0) fail(ErrorKind::PreconditionFailed, "angle not attained");
  boost::uintmax_t it = 200;
  auto r = boost::math::tools::toms748_solve(fn, lo, hi, boost::math::tools::eps_tolerance<double>(50), it);
  return detail::unit_direction(chart, x, unit_vector(a0 + 0.5 * (r.first + r.second)));
}

// Distance from the pole of the modified model to c~(s), where c~ starts at
// distance l with speed lambda at angle omega to the outward meridian.
class ModelVariation {
 public:
  ModelVariation(const ModelSurface& sd, double l, double omega, double lambda)
      : chart_(polar_chart(sd, 1e-3, sd.t_max(), {l, 0.0})),
        x_{l, 0.0},
        v_{lambda * std::cos(omega), lambda * std::sin(omega) / sd.f(l)} {}
  double operator()(double s) const {
    if (s == 0.0) return x_[0];
    auto st = geodesic_flow(chart_, x_, v_, s, {1e-13, 1e-13, 0.01, 1e-4, 200000});
    return st[0];
  }

 private:
  FinslerChart chart_;
  Vec2 x_, v_;
};

// Runs the key-lemma chain at c(0) = cfg.x for the chart's base point and
// the model `surface`, against its delta-modification.
inline VariationReport key_lemma_check(const FinslerChart& chart, const ModelSurface& surface, double delta,
                                       const KeyLemmaConfig& cfg, double theta_floor) {
  VariationReport r;
  r.delta = delta;
  const Vec2 p = chart.base_point(), x = cfg.x;
  auto rho = surface.rho();
  if (!rho) fail(ErrorKind::PreconditionFailed, "model surface has no waist");
  ModelSurface sd = delta_modification(surface, delta);

  auto mg = minimal_geodesics(chart, p, x, cfg.bvp, true);
  const GeodesicPath& gamma = mg.paths.front();
  const double l = mg.distance;
  const Vec2 vl = gamma.end_velocity();
  const Vec2 u = detail::unit_direction(chart, x, cfg.c_dir);
  const Mat2 g = metric_tensor<double>(chart, x, vl);
  r.l = l;
  r.lambda = std::max(1.0, chart.F(x, -1.0 * u));
  const double first = bilinear(g, vl, u);
  r.omega = std::acos(std::clamp(first / r.lambda, -1.0, 1.0));

  std::vector<std::string> failures;
  if (mg.shots.size() != 1) failures.push_back("minimal geodesic to x is not unique");
  if (!(l - r.lambda * cfg.eps > *rho)) failures.push_back("variation enters the waist ball");
  if (!sd.rho() || !(l > *sd.rho())) failures.push_back("l does not exceed the modified waist");
  r.tangent_curvature = tangent_curvature(chart, x, vl, u);
  if (!(std::abs(r.tangent_curvature) <= cfg.tangent_tol)) failures.push_back("tangent curvature nonzero");
  r.convexity_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 72; ++k) {
    Vec2 w = detail::unit_direction(chart, x, unit_vector(2.0 * M_PI * k / 72));
    r.convexity_margin = std::min(r.convexity_margin, bilinear(g, w, w) - 1.0);
  }
  if (!(r.convexity_margin >= -cfg.convexity_tol)) failures.push_back("g_v(w,w) < F(w)^2");
  if (!(std::sin(r.omega) >= std::sin(theta_floor) - 1e-12)) failures.push_back("sin omega below the floor");
  if (!failures.empty()) throw HypothesisFailedError(failures);

  // Jacobi field and the index form on the chart side
  auto J = jacobi_field(chart, gamma, u, cfg.jacobi_step, cfg.bvp);
  auto Jf = J.field();
  auto Jp = orthogonal_component(chart, Jf, gamma);
  r.endpoint_error = norm2<2>(J(l).value - u) + norm2<2>(J(0.0).value);
  const double a = first / l;
  for (int k = 0; k <= 20; ++k) {
    double t = l * k / 20.0;
    Vec2 gt = gamma.velocity(t);
    Mat2 gg = metric_tensor<double>(chart, gamma.position(t), gt);
    Vec2 jv = J(t).value, jp = Jp(t).value;
    r.J_samples.emplace_back(t, jv);
    r.J_perp_samples.emplace_back(t, jp);
    r.linear_growth_residual = std::max(r.linear_growth_residual, std::abs(bilinear(gg, gt, jv) - a * t));
    r.orthogonality_residual = std::max(r.orthogonality_residual, std::abs(bilinear(gg, gt, jp)));
  }
  r.I_value = index_form(chart, gamma, Jp, Jp);

  // model side
  auto mc = model_comparison_fields(sd, l, r.omega, r.lambda);
  r.model_I_value = mc.I_Jperp;
  r.C1 = detail::integrate_adaptive(
             [&](double t) {
               double f = surface.f(t);
               return f * f;
             },
             0.0, l) /
         (2.0 * surface.f(l) * surface.f(l));
  double s2 = std::sin(r.omega) * std::sin(r.omega);
  r.index_gap_margin = r.model_I_value - r.I_value - delta * r.C1 * s2;
  double jl = bilinear(g, Jp(l).value, Jp(l).value);
  if (jl > 1e-14) r.field_gap_margin = mc.I_X - r.I_value / jl - mc.delta_term;

  // L(s) = d(p, c(s)) with warm starts from gamma; L~(s) from the model flow
  BvpOptions warm = cfg.bvp;
  warm.scan = false;
  warm.seeds = {{mg.shots.front().angle, l}};
  auto L = [&](double s) {
    if (s == 0.0) return l;
    auto st = geodesic_flow(chart, x, u, s, cfg.bvp.fine_integration);
    return distance(chart, p, {st[0], st[1]}, warm);
  };
  ModelVariation Lt(sd, l, r.omega, r.lambda);

  const double h = cfg.fd_step;
  double Lp = L(h), Lm = L(-h);
  r.first_variation_error = std::abs((Lp - Lm) / (2.0 * h) - first);
  r.second_variation_error = std::abs((Lp - 2.0 * l + Lm) / (h * h) - (r.I_value - r.tangent_curvature));

  // cubic remainder constants on (0, eps]
  for (int k = 1; k <= cfg.fit_points; ++k) {
    for (double sg : {-1.0, 1.0}) {
      double s = sg * cfg.eps * k / cfg.fit_points;
      double s3 = std::abs(s * s * s);
      double quad = l + s * first;
      r.C2_est = std::max(r.C2_est, std::abs(L(s) - (quad + 0.5 * s * s * r.I_value)) / s3);
      r.C3_est = std::max(r.C3_est, std::abs(Lt(s) - (quad + 0.5 * s * s * r.model_I_value)) / s3);
    }
  }
  double sth = std::sin(theta_floor);
  double cap = r.C2_est + r.C3_est > 0 ? delta * r.C1 * sth * sth / (2.0 * (r.C2_est + r.C3_est)) : cfg.eps;
  r.eps_prime = std::min(cfg.eps, cap);

  r.min_L_margin = std::numeric_limits<double>::infinity();
  const int n = std::max(3, cfg.grid);
  for (int k = 0; k < n; ++k) {
    double s = -r.eps_prime + 2.0 * r.eps_prime * k / (n - 1);
    if (k == (n - 1) / 2 && n % 2 == 1) s = 0.0;
    double Ls = L(s), Lts = Lt(s);
    r.L_table.emplace_back(s, Ls);
    r.Ltilde_table.emplace_back(s, Lts);
    r.min_L_margin = std::min(r.min_L_margin, Lts - Ls);
  }
  r.pass = r.min_L_margin >= -cfg.L_slack && r.index_gap_margin >= -cfg.lemma_slack;
  return r;
}

}  // namespace ftct
