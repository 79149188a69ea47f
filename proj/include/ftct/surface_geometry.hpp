#pragma once

// Distances, comparison triangles, cut locus and the double triangle check on
// a model surface. Geodesics are integrated with theta as the independent
// variable, which the Clairaut relation f^2 theta' = c makes monotone.

#include <algorithm>
#include <array>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <cstdint>
#include <string>
#include <vector>

#include "ftct/error.hpp"
#include "ftct/linalg.hpp"
#include "ftct/manifold.hpp"
#include "ftct/model_surface.hpp"
#include "ftct/ode.hpp"

namespace ftct {

struct SurfaceOptions {
  int shooting_angles = 48;
  IntegrationOptions integration{1e-13, 1e-13, 0.05, 1e-4, 200000};
  double root_tol_bits = 48;
};

struct SurfaceGeodesic {
  double distance = 0.0;
  double psi = 0.0;        // initial angle from the outward meridian, >0 when theta increases
  double clairaut = 0.0;   // f^2 theta'
  double end_radial = 1.0; // t' at the end point
  bool through_pole = false;
  bool meridian = false;
  GeodesicPath path;       // polar coordinates (t, theta); filled on request
};

namespace detail {

struct ClairautEnd {
  double t;
  double tau;
  double s;
};

// Integrates from (t1, 0) with angle psi in (0, pi) over theta in [0, dtheta].
inline std::optional<ClairautEnd> clairaut_shot(const ModelSurface& S, double t1, double psi, double dtheta,
                                                double s_cap, const IntegrationOptions& io,
                                                std::vector<GeodesicSample>* samples = nullptr) {
  const double f1 = S.f(t1);
  const double c = f1 * std::sin(psi);
  if (!(c > 0.0)) return std::nullopt;
  std::array<double, 3> y{t1, std::cos(psi), 0.0};  // t, tau, s
  const double tmax = S.t_max();
  auto rhs = [&](const std::array<double, 3>& z, std::array<double, 3>& dz, double) {
    double t = z[0];
    if (!(t > 0.0) || t > tmax) throw Error(ErrorKind::TruncationTooShort, "left the profile range");
    double f = S.f(t), fp = S.df(t);
    dz[0] = z[1] * f * f / c;
    dz[1] = c * fp / f;
    dz[2] = f * f / c;
  };
  auto push = [&](double th, const std::array<double, 3>& z) {
    double t = z[0], f = S.f(t), fp = S.df(t);
    double thd = c / (f * f);
    samples->push_back({z[2], {t, th}, {z[1], thd}, {c * c * fp / (f * f * f), -2.0 * c * fp * z[1] / (f * f * f)}});
  };
  if (samples) push(0.0, y);
  bool stopped = false;
  try {
    integrate_observed(rhs, y, 0.0, dtheta, io, [&](double th, const std::array<double, 3>& z) {
      if (z[2] > s_cap || z[0] >= tmax) {
        stopped = true;
        return false;
      }
      if (samples) push(th, z);
      return true;
    });
  } catch (const Error&) {
    return std::nullopt;
  }
  if (stopped) return std::nullopt;
  return ClairautEnd{y[0], y[1], y[2]};
}

inline double signed_angle_gap(double th1, double th2) { return std::remainder(th2 - th1, 2.0 * M_PI); }

}  // namespace detail

// Minimal geodesic between two points given in polar coordinates (t, theta).
inline SurfaceGeodesic surface_geodesic(const ModelSurface& S, Vec2 a, Vec2 b, const SurfaceOptions& o = {},
                                        bool want_path = false) {
  const double t1 = a[0], t2 = b[0];
  if (!(t1 >= 0.0) || !(t2 >= 0.0) || t1 > S.t_max() || t2 > S.t_max())
    fail(ErrorKind::TruncationTooShort, "points outside the truncation radius");
  SurfaceGeodesic out;
  double gap = detail::signed_angle_gap(a[1], b[1]);
  double dth = std::abs(gap);
  double sign = gap >= 0 ? 1.0 : -1.0;
  auto meridian_path = [&](double from, double to, double theta) {
    std::vector<GeodesicSample> s;
    double dir = to >= from ? 1.0 : -1.0;
    s.push_back({0.0, {from, theta}, {dir, 0.0}, {0.0, 0.0}});
    s.push_back({std::abs(to - from), {to, theta}, {dir, 0.0}, {0.0, 0.0}});
    return GeodesicPath(std::move(s));
  };
  if (t1 == 0.0 || t2 == 0.0 || dth < 1e-15) {
    out.distance = std::abs(t1 - t2);
    out.meridian = true;
    if (t1 == 0.0 && t2 == 0.0) return out;
    out.psi = t2 >= t1 ? 0.0 : M_PI;
    out.end_radial = t2 >= t1 ? 1.0 : -1.0;
    if (want_path) out.path = meridian_path(t1, t2, t1 == 0.0 ? b[1] : a[1]);
    return out;
  }
  const double pole_len = t1 + t2;
  const bool antipodal = std::abs(dth - M_PI) < 1e-13;
  const double s_cap = pole_len * (1.0 + 1e-9) + 1e-12;
  double best = std::numeric_limits<double>::infinity();
  double best_psi = 0.0;
  detail::ClairautEnd best_end{};
  bool escaped = false;
  // Shoots over the given angles and refines every sign change of t_end - t2.
  auto scan = [&](const std::vector<double>& psis, double cap) {
    const std::size_t K = psis.size();
    std::vector<std::optional<double>> g(K);
    for (std::size_t k = 0; k < K; ++k) {
      auto e = detail::clairaut_shot(S, t1, psis[k], dth, cap, o.integration);
      if (e)
        g[k] = e->t - t2;
      else
        escaped = true;
    }
    for (std::size_t k = 0; k + 1 < K; ++k) {
      if (!g[k] || !g[k + 1]) continue;
      if ((*g[k] > 0.0) == (*g[k + 1] > 0.0)) continue;
      auto fn = [&](double psi) {
        auto e = detail::clairaut_shot(S, t1, psi, dth, 10.0 * s_cap, o.integration);
        if (!e) throw Error(ErrorKind::BvpNoConvergence, "shot lost during refinement");
        return e->t - t2;
      };
      boost::uintmax_t it = 100;
      try {
        auto r = boost::math::tools::toms748_solve(fn, psis[k], psis[k + 1], *g[k], *g[k + 1],
                                                   boost::math::tools::eps_tolerance<double>(o.root_tol_bits), it);
        double psi = 0.5 * (r.first + r.second);
        auto e = detail::clairaut_shot(S, t1, psi, dth, 10.0 * s_cap, o.integration);
        if (e && e->s < best) {
          best = e->s;
          best_psi = psi;
          best_end = *e;
        }
      } catch (const Error&) {
      }
    }
  };
  const int K = o.shooting_angles;
  std::vector<double> psis(K);
  for (int k = 0; k < K; ++k) psis[k] = M_PI * (k + 0.5) / K;
  scan(psis, s_cap);
  if (!std::isfinite(best)) {
    // Nearly meridional or nearly polar minimizers sit between the first or last
    // grid angle and the boundary; refine geometrically towards 0 and pi and let
    // longer shots report a sign.
    double h = M_PI * 0.5 / K;
    for (int j = 1; j <= 40; ++j) {
      h *= 0.5;
      psis.push_back(h);
      psis.push_back(M_PI - h);
    }
    std::sort(psis.begin(), psis.end());
    escaped = false;
    scan(psis, 10.0 * s_cap);
  }
  if (antipodal && pole_len <= best) {
    out.distance = pole_len;
    out.through_pole = true;
    out.psi = M_PI;
    out.end_radial = 1.0;
    if (want_path) {
      std::vector<GeodesicSample> s;
      s.push_back({0.0, {t1, a[1]}, {-1.0, 0.0}, {0.0, 0.0}});
      s.push_back({t1, {0.0, a[1]}, {-1.0, 0.0}, {0.0, 0.0}});
      s.push_back({t1, {0.0, b[1]}, {1.0, 0.0}, {0.0, 0.0}});
      s.push_back({pole_len, {t2, b[1]}, {1.0, 0.0}, {0.0, 0.0}});
      out.path = GeodesicPath(std::move(s));
    }
    return out;
  }
  if (!std::isfinite(best)) {
    if (escaped) fail(ErrorKind::TruncationTooShort, "minimizer escapes the truncation radius");
    fail(ErrorKind::BvpNoConvergence, "no Clairaut shot reaches the target");
  }
  out.distance = best;
  out.psi = sign * best_psi;
  out.clairaut = S.f(t1) * std::sin(best_psi);
  out.end_radial = best_end.tau;
  if (want_path) {
    std::vector<GeodesicSample> smp;
    detail::clairaut_shot(S, t1, best_psi, dth, 10.0 * s_cap, IntegrationOptions{1e-13, 1e-13, 0.02, 1e-4, 200000},
                          &smp);
    for (auto& q : smp) {
      q.x[1] = a[1] + sign * q.x[1];
      q.v[1] *= sign;
      q.a[1] *= sign;
    }
    out.path = GeodesicPath(std::move(smp));
  }
  return out;
}

inline double surface_distance(const ModelSurface& S, Vec2 a, Vec2 b, const SurfaceOptions& o = {}) {
  return surface_geodesic(S, a, b, o).distance;
}

// ---- comparison triangles ---------------------------------------------------

struct ComparisonTriangle {
  double side_px = 0.0;
  double side_py = 0.0;
  double side_xy = 0.0;
  double delta_theta = 0.0;
  double angle_p = 0.0;
  double angle_x = 0.0;
  double angle_y = 0.0;
  double round_trip_error = 0.0;
};

namespace detail {

inline ComparisonTriangle triangle_from_geodesic(double a, double b, double c, double dth, const SurfaceGeodesic& g,
                                                 const ModelSurface& S) {
  ComparisonTriangle T;
  T.side_px = a;
  T.side_py = b;
  T.side_xy = c;
  T.delta_theta = dth;
  T.angle_p = dth;
  if (g.through_pole) {
    T.angle_x = 0.0;
    T.angle_y = 0.0;
  } else if (g.meridian) {
    bool outward = b >= a;
    T.angle_x = outward ? M_PI : 0.0;
    T.angle_y = outward ? 0.0 : M_PI;
  } else {
    T.angle_x = M_PI - std::abs(g.psi);
    T.angle_y = std::atan2(g.clairaut / S.f(b), g.end_radial);
  }
  return T;
}

}  // namespace detail

// Places x at theta = 0 and finds delta_theta in [0, pi] so that the model
// distance from x to (d_py, delta_theta) equals side_xy.
inline ComparisonTriangle comparison_triangle(const ModelSurface& S, double d_px, double d_py, double side_xy,
                                              const SurfaceOptions& o = {}) {
  if (!(d_px > 0.0) || !(d_py > 0.0) || !(side_xy > 0.0))
    fail(ErrorKind::NoComparisonTriangle, "sides must be positive");
  const double scale = d_px + d_py;
  if (side_xy < std::abs(d_px - d_py) - 1e-12 * scale || side_xy > scale + 1e-12 * scale)
    fail(ErrorKind::NoComparisonTriangle, "sides violate the triangle inequality");
  if (!S.von_mangoldt()) fail(ErrorKind::Unsupported, "comparison triangles need a von Mangoldt model");
  if (d_px > S.t_max() || d_py > S.t_max()) fail(ErrorKind::TruncationTooShort, "sides exceed t_max");
  const Vec2 x{d_px, 0.0};
  auto D = [&](double th) { return surface_distance(S, x, {d_py, th}, o) - side_xy; };
  double dth;
  if (side_xy <= std::abs(d_px - d_py) + 1e-13 * scale) {
    dth = 0.0;
  } else {
    double hi = D(M_PI);
    if (hi < -1e-10 * scale) fail(ErrorKind::NoComparisonTriangle, "no delta_theta <= pi realizes the side");
    if (std::abs(hi) <= 1e-12 * scale) {
      dth = M_PI;
    } else {
      double lo = D(0.0);
      boost::uintmax_t it = 100;
      auto r = boost::math::tools::toms748_solve(D, 0.0, M_PI, lo, hi, boost::math::tools::eps_tolerance<double>(46),
                                                 it);
      dth = 0.5 * (r.first + r.second);
    }
  }
  auto g = surface_geodesic(S, x, {d_py, dth}, o);
  auto T = detail::triangle_from_geodesic(d_px, d_py, side_xy, dth, g, S);
  T.round_trip_error = std::abs(g.distance - side_xy);
  return T;
}

// Vertex angles of the model triangle with vertices p (pole), (tx, 0), (ty, dth).
inline ComparisonTriangle realized_triangle(const ModelSurface& S, double tx, double ty, double dth,
                                            const SurfaceOptions& o = {}) {
  auto g = surface_geodesic(S, {tx, 0.0}, {ty, dth}, o);
  return detail::triangle_from_geodesic(tx, ty, g.distance, dth, g, S);
}

// ---- cut locus ----------------------------------------------------------------

struct CutLocusRay {
  bool empty = true;
  double t_cut = 0.0;       // endpoint on the opposite meridian
  double arc_to_conjugate = 0.0;
};

// Jacobi scalar j'' + G(|s - t0|) j = 0 along the meridian geodesic from
// (t0, theta) through the pole; its first zero marks the first conjugate
// point, the endpoint of the cut ray on the opposite meridian.
inline CutLocusRay cut_locus_ray(const ModelSurface& S, double t0, const IntegrationOptions& io = {1e-12, 1e-12, 0.01,
                                                                                                      1e-4, 1000000}) {
  if (!(t0 > 0.0) || !(t0 < S.t_max())) fail(ErrorKind::PreconditionFailed, "t0 must lie in (0, t_max)");
  auto G = [&](double s) { return S.curvature(std::min(std::abs(s - t0), S.t_max())); };
  std::array<double, 2> y{0.0, 1.0};
  auto rhs = [&](const std::array<double, 2>& z, std::array<double, 2>& dz, double s) {
    dz[0] = z[1];
    dz[1] = -G(s) * z[0];
  };
  const double s_end = t0 + S.t_max();
  double s_prev = 0.0;
  std::array<double, 2> y_prev = y;
  std::optional<std::pair<double, double>> bracket;
  integrate_observed(rhs, y, 0.0, s_end, io, [&](double s, const std::array<double, 2>& z) {
    if (z[0] <= 0.0) {
      bracket = {s_prev, s};
      return false;
    }
    s_prev = s;
    y_prev = z;
    return true;
  });
  CutLocusRay out;
  if (!bracket) {
    if (y[0] > 0.0 && y[1] > 0.0 && S.curvature(S.t_max()) <= 0.0) return out;
    fail(ErrorKind::TruncationTooShort, "conjugate point not resolved within t_max");
  }
  auto j_at = [&](double s) {
    std::array<double, 2> z = y_prev;
    integrate_to(rhs, z, bracket->first, s, io);
    return z[0];
  };
  boost::uintmax_t it = 100;
  auto r = boost::math::tools::toms748_solve(j_at, bracket->first, bracket->second,
                                             boost::math::tools::eps_tolerance<double>(48), it);
  double s_star = 0.5 * (r.first + r.second);
  if (s_star <= t0) fail(ErrorKind::Unsupported, "conjugate point before the pole");
  out.empty = false;
  out.arc_to_conjugate = s_star;
  out.t_cut = s_star - t0;
  if (out.t_cut >= S.t_max()) fail(ErrorKind::TruncationTooShort, "cut endpoint beyond t_max");
  return out;
}

// ---- double triangle lemma ----------------------------------------------------

struct DoubleTriangleReport {
  ComparisonTriangle glued;
  double angle_x = 0.0;        // angle at x in triangle (p, x, y)
  double angle_z = 0.0;        // angle at z in triangle (p, y, z)
  double margin_x = 0.0;       // angle_x - glued.angle_x
  double margin_z = 0.0;       // angle_z - glued.angle_y
  double theta_z = 0.0;        // delta_theta(pxy) + delta_theta(pyz)
  double angle_sum_y = 0.0;
  bool theta_z_below_pi = false;
  bool straight = false;        // angles at y sum to pi
  bool pass = false;
};

inline DoubleTriangleReport double_triangle_check(const ModelSurface& S, const ComparisonTriangle& pxy,
                                                  const ComparisonTriangle& pyz, double slack = 1e-6,
                                                  const SurfaceOptions& o = {}) {
  const double tol = 1e-9 * std::max(1.0, pxy.side_py);
  if (std::abs(pxy.side_py - pyz.side_px) > tol)
    fail(ErrorKind::PreconditionFailed, "triangles do not share the side p-y");
  if (!(pxy.delta_theta > 0.0) || !(pyz.delta_theta > 0.0))
    fail(ErrorKind::PreconditionFailed, "vertices must satisfy 0 = theta(x) < theta(y) < theta(z)");
  double sum = pxy.angle_y + pyz.angle_x;
  if (sum > M_PI + 1e-9) fail(ErrorKind::PreconditionFailed, "angles at y sum beyond pi");
  DoubleTriangleReport r;
  r.angle_sum_y = sum;
  r.glued = comparison_triangle(S, pxy.side_px, pyz.side_py, pxy.side_xy + pyz.side_xy, o);
  r.angle_x = pxy.angle_x;
  r.angle_z = pyz.angle_y;
  r.margin_x = r.angle_x - r.glued.angle_x;
  r.margin_z = r.angle_z - r.glued.angle_y;
  r.theta_z = pxy.delta_theta + pyz.delta_theta;
  r.straight = std::abs(sum - M_PI) <= 1e-9;
  r.theta_z_below_pi = r.theta_z < M_PI;
  r.pass = r.margin_x >= -slack && r.margin_z >= -slack && (r.straight || r.theta_z_below_pi);
  return r;
}

struct DoubleTriangleSample {
  ComparisonTriangle pxy;
  ComparisonTriangle pyz;
};

struct DoubleTriangleSamplerOptions {
  double r_min = 0.2;
  double r_max = 1.5;
  double theta_min = 0.05;
  double theta_max = 1.4;
  int max_attempts = 100;
  SurfaceOptions surface{};
};

// Triangles (p, x, y) and (p, y, z) with 0 = theta(x) < theta(y) < theta(z),
// angle sum at y at most pi, and a glued comparison triangle. Draws depend
// only on (seed, index).
inline std::optional<DoubleTriangleSample> sample_double_triangle(const ModelSurface& S, std::uint64_t seed,
                                                                  std::uint64_t index,
                                                                  const DoubleTriangleSamplerOptions& o = {}) {
  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5u};
  std::mt19937_64 rng(sq);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto radius = [&] { return o.r_min + (o.r_max - o.r_min) * U(rng); };
  auto angle = [&] { return o.theta_min + (o.theta_max - o.theta_min) * U(rng); };
  for (int attempt = 0; attempt < o.max_attempts; ++attempt) {
    double tx = radius(), ty = radius(), tz = radius(), a = angle(), b = angle();
    try {
      auto pxy = realized_triangle(S, tx, ty, a, o.surface);
      auto pyz = realized_triangle(S, ty, tz, b, o.surface);
      if (pxy.angle_y + pyz.angle_x > M_PI) continue;
      comparison_triangle(S, tx, tz, pxy.side_xy + pyz.side_xy, o.surface);
      return DoubleTriangleSample{pxy, pyz};
    } catch (const Error&) {
      continue;
    }
  }
  return std::nullopt;
}

// Splits the minimal geodesic from (tx, 0) to (tz, theta_z) at parameter
// fraction u; the angles at the split point sum to pi.
inline DoubleTriangleSample straight_double_triangle(const ModelSurface& S, double tx, double tz, double theta_z,
                                                     double u = 0.5, const SurfaceOptions& o = {}) {
  auto g = surface_geodesic(S, {tx, 0.0}, {tz, theta_z}, o, true);
  if (g.through_pole || g.meridian) fail(ErrorKind::PreconditionFailed, "edge must avoid the pole");
  Vec2 y = g.path.position(u * g.distance);
  auto pxy = realized_triangle(S, tx, y[0], y[1], o);
  auto pyz = realized_triangle(S, y[0], tz, theta_z - y[1], o);
  return {pxy, pyz};
}

}  // namespace ftct
