#pragma once

// Rotationally symmetric reference surfaces ds^2 = dt^2 + f(t)^2 dtheta^2.

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ftct/chart.hpp"
#include "ftct/dual.hpp"
#include "ftct/error.hpp"
#include "ftct/linalg.hpp"
#include "ftct/ode.hpp"

namespace ftct {

using Jet4 = std::array<double, 5>;  // f, f', f'', f''', f''''
using Jet2 = std::array<double, 3>;  // G, G', G''

// How a profile is specified: a closed-form f or a curvature function G.
// Both callables must accept every scalar of the dual ladder they are used at
// (f up to D4, G up to D2).
struct ProfileSpec {
  enum class Kind { ClosedForm, Curvature };
  Kind kind = Kind::ClosedForm;
  std::string name;
  // closed form, one evaluator per dual depth
  std::shared_ptr<const std::tuple<std::function<D0(const D0&)>, std::function<D1(const D1&)>,
                                   std::function<D2(const D2&)>, std::function<D3(const D3&)>,
                                   std::function<D4(const D4&)>>>
      f;
  std::function<D2(const D2&)> G;   // curvature
  std::function<double(double)> G_value;

  template <class Fn>
  static ProfileSpec closed_form(Fn fn, std::string name = "closed_form") {
    ProfileSpec s;
    s.kind = Kind::ClosedForm;
    s.name = std::move(name);
    s.f = std::make_shared<typename decltype(s.f)::element_type>(
        [fn](const D0& t) { return fn(t); }, [fn](const D1& t) { return fn(t); },
        [fn](const D2& t) { return fn(t); }, [fn](const D3& t) { return fn(t); },
        [fn](const D4& t) { return fn(t); });
    return s;
  }

  template <class Fn>
  static ProfileSpec curvature(Fn fn, std::string name = "curvature") {
    ProfileSpec s;
    s.kind = Kind::Curvature;
    s.name = std::move(name);
    s.G = [fn](const D2& t) { return fn(t); };
    s.G_value = [fn](double t) { return fn(t); };
    return s;
  }
};

struct BuildOptions {
  double grid_step = 1e-3;     // ODE table spacing
  double series_end = 1e-3;    // series start on [0, series_end]
  int scan_points = 4000;      // positivity, waist and monotonicity scans
  double ode_abs_tol = 1e-15;
  double ode_rel_tol = 1e-13;
};

namespace detail {

// Truncated Taylor expansion of a jet at value(t): exact through dual depth 4.
template <class T>
T taylor(const Jet4& j, const T& t) {
  double t0 = value_of(t);
  T h = t - t0;
  // Horner: j0 + h(j1 + h/2(j2 + h/3(j3 + h/4 j4)))
  T acc = T(j[4]) * (1.0 / 4.0);
  acc = (acc * h + j[3]) * (1.0 / 3.0);
  acc = (acc * h + j[2]) * (1.0 / 2.0);
  acc = acc * h + j[1];
  acc = acc * h + j[0];
  return acc;
}

template <int K, class Fn>
std::array<double, K + 1> jet_of(const Fn& fn, double t) {
  return univariate_jet<K>(fn, t);
}

struct ProfileData {
  ProfileSpec spec;
  bool ode = false;
  double t_max = 0.0;
  double delta = 0.0;
  // ODE table: deviation w = f - t and w' = f' - 1 at nodes i*h, plus f''.
  double h = 0.0;
  std::vector<double> w, wp, fpp;
  std::function<Jet2(double)> curvature_jet;  // G with derivatives (ODE kind)
  std::function<double(double)> curvature_value;
  double G0 = 0.0;  // curvature at the pole
  std::optional<double> rho;
  bool von_mangoldt = false;
  double max_abs_G = 0.0;
};

}  // namespace detail

class ModelSurface {
 public:
  ModelSurface() = default;
  explicit ModelSurface(std::shared_ptr<const detail::ProfileData> d) : d_(std::move(d)) {}

  double t_max() const { return d_->t_max; }
  std::optional<double> rho() const { return d_->rho; }
  bool von_mangoldt() const { return d_->von_mangoldt; }
  double curvature_at_pole() const { return d_->G0; }
  double delta() const { return d_->delta; }
  double max_abs_curvature() const { return d_->max_abs_G; }
  const std::string& name() const { return d_->spec.name; }
  const ProfileSpec& spec() const { return d_->spec; }
  bool from_ode() const { return d_->ode; }

  Jet4 jet(double t) const {
    check_range(t);
    if (!d_->ode) return detail::jet_of<4>(std::get<4>(*d_->spec.f), t);
    auto [w, wp] = table(t);
    double f = t + w, fp = 1.0 + wp;
    Jet2 G = d_->curvature_jet(t);
    double f2 = -G[0] * f;
    double f3 = -G[1] * f - G[0] * fp;
    double f4 = -G[2] * f - 2.0 * G[1] * fp - G[0] * f2;
    return {f, fp, f2, f3, f4};
  }

  double f(double t) const {
    if (!d_->ode) {
      check_range(t);
      return std::get<0>(*d_->spec.f)(t);
    }
    check_range(t);
    return t + table(t)[0];
  }
  double df(double t) const {
    check_range(t);
    if (!d_->ode) return std::get<1>(*d_->spec.f)(D1{t, 1.0}).eps;
    return 1.0 + table(t)[1];
  }
  // f(t) - t without cancellation for ODE profiles.
  double deviation(double t) const {
    if (!d_->ode) return f(t) - t;
    check_range(t);
    return table(t)[0];
  }
  double curvature(double t) const {
    if (d_->ode) {
      check_range(t);
      return d_->curvature_value(t);
    }
    if (t <= 0.0) return d_->G0;
    Jet4 j = jet(t);
    return -j[2] / j[0];
  }
  Jet2 curvature_jet(double t) const {
    if (d_->ode) {
      check_range(t);
      return d_->curvature_jet(t);
    }
    return derived_curvature_jet(jet(t));
  }

  // f at any scalar of the dual ladder.
  template <class T>
  T profile(const T& t) const {
    if constexpr (std::is_same_v<T, double>) {
      return f(t);
    } else {
      if (!d_->ode) {
        check_range(value_of(t));
        return std::get<dual_depth_v<T>>(*d_->spec.f)(t);
      }
      return detail::taylor(jet(value_of(t)), t);
    }
  }

  static Jet2 derived_curvature_jet(const Jet4& j) {
    // G = -f''/f, differentiated twice with nested duals.
    D2 t{D1{0.0, 1.0}, D1{1.0, 0.0}};
    D2 f = detail::taylor(Jet4{j[0], j[1], j[2], j[3], j[4]}, t);
    D2 f2 = detail::taylor(Jet4{j[2], j[3], j[4], 0.0, 0.0}, t);
    D2 G = -(f2 / f);
    return {G.val.val, G.eps.val, G.eps.eps};
  }

  const detail::ProfileData& data() const { return *d_; }

 private:
  void check_range(double t) const {
    if (!(t >= 0.0) || t > d_->t_max * (1.0 + 1e-12))
      fail(ErrorKind::TruncationTooShort, "profile evaluated outside [0, t_max]");
  }

  std::array<double, 2> table(double t) const {
    const auto& D = *d_;
    std::size_t n = D.w.size() - 1;
    std::size_t i = std::min(static_cast<std::size_t>(t / D.h), n - 1);
    double t0 = i * D.h;
    double h = D.h;
    if (i == n - 1) h = D.t_max - t0;
    double s = (t - t0) / h;
    double s2 = s * s, s3 = s2 * s;
    double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    double w = h00 * D.w[i] + h10 * h * D.wp[i] + h01 * D.w[i + 1] + h11 * h * D.wp[i + 1];
    double wp = h00 * D.wp[i] + h10 * h * D.fpp[i] + h01 * D.wp[i + 1] + h11 * h * D.fpp[i + 1];
    return {w, wp};
  }

  std::shared_ptr<const detail::ProfileData> d_;
};

namespace detail {

inline double richardson_pole_limit(const std::function<double(double)>& G) {
  // G is even in t near the pole: G(t) = G0 + a t^2 + O(t^4).
  double h = 1e-2;
  double g1 = G(h), g2 = G(h / 2), g3 = G(h / 4);
  double r1 = (4.0 * g2 - g1) / 3.0, r2 = (4.0 * g3 - g2) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

// Fills the waist, von Mangoldt flag and curvature scale from a scan.
inline void analyse_profile(ProfileData& D, const ModelSurface& s, const BuildOptions& o) {
  const int N = o.scan_points;
  const double T = D.t_max;
  std::vector<double> ts(N), fp(N), G(N);
  for (int i = 0; i < N; ++i) {
    ts[i] = T * (i + 1) / N;
    double fv = s.f(ts[i]);
    if (!(fv > 0.0)) fail(ErrorKind::ProfileVanishes, "profile f <= 0 at t = " + std::to_string(ts[i]));
    fp[i] = s.df(ts[i]);
    G[i] = s.curvature(ts[i]);
  }
  D.max_abs_G = std::abs(D.G0);
  for (double g : G) D.max_abs_G = std::max(D.max_abs_G, std::abs(g));
  bool mono = D.G0 >= G[0] - 1e-12 * std::max(1.0, D.max_abs_G);
  for (int i = 0; i + 1 < N; ++i) mono = mono && G[i + 1] <= G[i] + 1e-12 * std::max(1.0, D.max_abs_G);
  D.von_mangoldt = mono;

  std::vector<int> changes;
  for (int i = 0; i + 1 < N; ++i)
    if ((fp[i] > 0.0) != (fp[i + 1] > 0.0)) changes.push_back(i);
  if (changes.size() > 1) fail(ErrorKind::RhoNotUnique, "f' changes sign more than once");
  if (changes.size() == 1) {
    int i = changes[0];
    boost::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve([&](double t) { return s.df(t); }, ts[i], ts[i + 1], fp[i], fp[i + 1],
                                               boost::math::tools::eps_tolerance<double>(50), it);
    double rho = 0.5 * (r.first + r.second);
    if (fp[i] < 0.0) fail(ErrorKind::RhoNotUnique, "f' turns positive; not a waist");
    if (!(std::abs(s.curvature(rho)) > 1e-6 * D.max_abs_G))
      fail(ErrorKind::DegenerateWaist, "curvature vanishes at the waist");
    D.rho = rho;
  }
}

inline void integrate_table(ProfileData& D, const BuildOptions& o) {
  const double T = D.t_max;
  const double h = o.grid_step;
  std::size_t n = static_cast<std::size_t>(std::ceil(T / h - 1e-9));
  if (n < 2) n = 2;
  D.h = h;
  D.w.assign(n + 1, 0.0);
  D.wp.assign(n + 1, 0.0);
  D.fpp.assign(n + 1, 0.0);
  auto node = [&](std::size_t i) { return i == n ? T : i * h; };
  // Series on [0, series_end]: f = t + c3 t^3 + c4 t^4 + c5 t^5 from
  // G = g0 + g1 t + g2 t^2.
  Jet2 Gs = D.curvature_jet(std::min(1e-6, T / 4));
  double g0 = D.G0, g1 = Gs[1], g2 = 0.5 * Gs[2];
  double c3 = -g0 / 6.0, c4 = -g1 / 12.0, c5 = -(g0 * c3 + g2) / 20.0;
  auto series = [&](double t) {
    return std::array<double, 2>{c3 * t * t * t + c4 * t * t * t * t + c5 * std::pow(t, 5),
                                 3 * c3 * t * t + 4 * c4 * t * t * t + 5 * c5 * std::pow(t, 4)};
  };
  std::array<double, 2> y{0.0, 0.0};
  IntegrationOptions io{o.ode_abs_tol, o.ode_rel_tol, h, h / 4, 1000000};
  auto rhs = [&](const std::array<double, 2>& s, std::array<double, 2>& ds, double t) {
    ds[0] = s[1];
    ds[1] = -D.curvature_value(t) * (t + s[0]);
  };
  double t_prev = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    double t = node(i);
    if (t <= o.series_end + 1e-15) {
      y = series(t);
    } else {
      if (t_prev < o.series_end && t > o.series_end) {
        y = series(o.series_end);
        t_prev = o.series_end;
      }
      integrate_to(rhs, y, t_prev, t, io);
    }
    t_prev = t;
    D.w[i] = y[0];
    D.wp[i] = y[1];
    double G = i == 0 ? D.G0 : D.curvature_value(t);
    D.fpp[i] = -G * (t + y[0]);
  }
}

inline ModelSurface build_from_curvature(ProfileSpec spec, std::function<Jet2(double)> Gjet,
                                         std::function<double(double)> Gval, double G0, double t_max, double delta,
                                         const BuildOptions& o) {
  auto D = std::make_shared<ProfileData>();
  D->spec = std::move(spec);
  D->ode = true;
  D->t_max = t_max;
  D->delta = delta;
  D->curvature_jet = std::move(Gjet);
  D->curvature_value = std::move(Gval);
  D->G0 = G0;
  integrate_table(*D, o);
  ModelSurface tmp(D);
  analyse_profile(*D, tmp, o);
  return ModelSurface(D);
}

}  // namespace detail

inline ModelSurface build_profile(const ProfileSpec& spec, double t_max, const BuildOptions& o = {}) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) fail(ErrorKind::PreconditionFailed, "t_max must be positive");
  if (spec.kind == ProfileSpec::Kind::ClosedForm) {
    if (!spec.f) fail(ErrorKind::PreconditionFailed, "closed form profile missing");
    auto D = std::make_shared<detail::ProfileData>();
    D->spec = spec;
    D->ode = false;
    D->t_max = t_max;
    ModelSurface tmp(D);
    auto j0 = tmp.jet(0.0);
    if (std::abs(j0[0]) > 1e-12 || std::abs(j0[1] - 1.0) > 1e-9)
      fail(ErrorKind::PreconditionFailed, "profile must satisfy f(0) = 0, f'(0) = 1");
    D->G0 = detail::richardson_pole_limit([&](double t) { return tmp.curvature(t); });
    detail::analyse_profile(*D, tmp, o);
    return ModelSurface(D);
  }
  if (!spec.G) fail(ErrorKind::PreconditionFailed, "curvature profile missing");
  auto G = spec.G;
  auto Gv = spec.G_value;
  auto jet = [G](double t) {
    D2 r = G(D2{D1{t, 1.0}, D1{1.0, 0.0}});
    return Jet2{r.val.val, r.eps.val, r.eps.eps};
  };
  double G0 = Gv(0.0);
  if (!std::isfinite(G0)) G0 = detail::richardson_pole_limit(Gv);
  for (double t : {0.25 * t_max, 0.5 * t_max, t_max})
    if (!std::isfinite(Gv(t))) fail(ErrorKind::PreconditionFailed, "curvature not finite on [0, t_max]");
  return detail::build_from_curvature(spec, jet, Gv, G0, t_max, 0.0, o);
}

// M_delta: curvature G - delta. When f_delta picks up a second critical point
// (a minimum after the waist) the surface is truncated there so that f_delta
// stays decreasing beyond rho_delta.
inline ModelSurface delta_modification(const ModelSurface& s, double delta, const BuildOptions& o = {}) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) fail(ErrorKind::PreconditionFailed, "delta must be >= 0");
  if (delta == 0.0) return s;
  ModelSurface base = s;
  auto Gjet = [base, delta](double t) {
    Jet2 j = base.curvature_jet(t);
    j[0] -= delta;
    return j;
  };
  auto Gval = [base, delta](double t) { return base.curvature(t) - delta; };
  ProfileSpec spec;
  spec.kind = ProfileSpec::Kind::Curvature;
  spec.name = s.name() + "_delta";
  double t_max = s.t_max();
  // First pass over the full range to locate critical points of f_delta.
  auto D = std::make_shared<detail::ProfileData>();
  D->spec = spec;
  D->ode = true;
  D->t_max = t_max;
  D->delta = delta;
  D->curvature_jet = Gjet;
  D->curvature_value = Gval;
  D->G0 = s.curvature_at_pole() - delta;
  detail::integrate_table(*D, o);
  ModelSurface probe(D);
  const int N = o.scan_points;
  std::vector<double> crit;
  double prev = probe.df(t_max / N);
  for (int i = 2; i <= N; ++i) {
    double t = t_max * i / N;
    double cur = probe.df(t);
    if ((prev > 0.0) != (cur > 0.0)) crit.push_back(t_max * (i - 1) / N);
    prev = cur;
  }
  if (s.rho() && crit.empty()) fail(ErrorKind::TruncationTooShort, "rho_delta lies beyond t_max");
  if (crit.size() >= 2) {
    double a = crit[1], b = crit[1] + t_max / N;
    boost::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve([&](double t) { return probe.df(t); }, a, b,
                                               boost::math::tools::eps_tolerance<double>(40), it);
    t_max = 0.5 * (r.first + r.second) * (1.0 - 1e-6);
  }
  return detail::build_from_curvature(spec, Gjet, Gval, D->G0, t_max, delta, o);
}

// Two-column (t, f) export at a uniform grid, 17 significant digits.
inline void export_profile(const ModelSurface& s, const std::string& path, int points = 1001) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path);
  out << std::setprecision(17);
  for (int i = 0; i < points; ++i) {
    double t = s.t_max() * i / (points - 1);
    out << t << ' ' << s.f(t) << '\n';
  }
  if (!out) fail(ErrorKind::IoError, "write failed for " + path);
}

// ---- named profiles ---------------------------------------------------------

struct TanhGaussProfile {
  template <class T>
  T operator()(const T& t) const {
    using std::exp;
    using std::tanh;
    return exp(-(t * t)) * tanh(t);
  }
};

// Closed-form curvature of f = exp(-t^2) tanh t (finite for t > 0).
struct TanhGaussCurvature {
  double bump = 0.0;  // adds bump * exp(-t)
  template <class T>
  T operator()(const T& t) const {
    using std::cosh;
    using std::exp;
    using std::sinh;
    if (value_of(t) < 1e-3) {
      // even series of 8t/sinh 2t + 2/cosh^2 t - 4t^2 + 2 about 0
      T t2 = t * t;
      T base = 8.0 + t2 * (-26.0 / 3.0 + t2 * (116.0 / 45.0 + t2 * (-(31.0 * 256.0 / 15120.0) - 34.0 / 45.0)));
      return base + bump * exp(-t);
    }
    T c = cosh(t);
    return 8.0 * t / sinh(2.0 * t) + 2.0 / (c * c) - 4.0 * t * t + 2.0 + bump * exp(-t);
  }
};

inline ProfileSpec tanh_gauss_spec() { return ProfileSpec::closed_form(TanhGaussProfile{}, "tanh_gauss"); }

inline ProfileSpec plane_spec() {
  return ProfileSpec::closed_form([](const auto& t) { return t; }, "plane");
}

inline ProfileSpec hyperbolic_spec() {
  return ProfileSpec::closed_form(
      [](const auto& t) {
        using std::sinh;
        return sinh(t);
      },
      "hyperbolic");
}

inline ProfileSpec constant_curvature_spec(double k) {
  return ProfileSpec::curvature([k](const auto& t) { return 0.0 * t + k; }, "constant_curvature");
}

}  // namespace ftct
