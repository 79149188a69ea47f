#pragma once

// Forward and backward angles at points of a geodesic c, measured from the
// chart's base point p. Two independent routes: one-sided difference
// quotients of d(p, c(s)) normalized by d_m, and the first-variation formula
// over the radial direction set G_p.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ftct/error.hpp"
#include "ftct/linalg.hpp"
#include "ftct/manifold.hpp"

namespace ftct {

enum class AngleSide { Forward, Backward };
enum class AngleMethod { DifferenceQuotient, FirstVariation };

inline std::string to_string(AngleSide s) { return s == AngleSide::Forward ? "forward" : "backward"; }
inline std::string to_string(AngleMethod m) {
  return m == AngleMethod::DifferenceQuotient ? "difference_quotient" : "first_variation";
}

struct AngleMeasurement {
  double forward_angle = std::numeric_limits<double>::quiet_NaN();
  double backward_angle = std::numeric_limits<double>::quiet_NaN();
  double lambda = 1.0;
  AngleMethod method = AngleMethod::FirstVariation;
  std::vector<double> h_sequence;   // difference quotient only
  std::vector<double> quotients;    // raw quotients, one per h
  std::vector<double> extrapolated; // Richardson values, aligned with the tail of h_sequence
  double min_inner = 0.0;           // min over G_p of g_v(v, c'), first variation only
  double max_inner = 0.0;
  std::size_t branches = 0;         // size of G_p
};

namespace detail {

inline double clamp_cos(double c) { return std::clamp(c, -1.0, 1.0); }

inline double angle_lambda(const FinslerChart& chart, const Vec2& z, const Vec2& unit_dir) {
  return std::max(1.0, chart.F(z, -1.0 * unit_dir));
}

}  // namespace detail

// First-variation angles at z for the unit direction c_dir of c at z:
// cos(forward) = -min g_v(v, c')/lambda, cos(backward) = max g_v(v, c')/lambda.
inline AngleMeasurement angle_first_variation(const FinslerChart& chart, const Vec2& z, const Vec2& c_dir,
                                              const std::vector<Vec2>& radial_dirs) {
  if (radial_dirs.empty()) fail(ErrorKind::PreconditionFailed, "empty radial direction set");
  Vec2 u = detail::unit_direction(chart, z, c_dir);
  AngleMeasurement m;
  m.method = AngleMethod::FirstVariation;
  m.lambda = detail::angle_lambda(chart, z, u);
  m.min_inner = std::numeric_limits<double>::infinity();
  m.max_inner = -std::numeric_limits<double>::infinity();
  for (const auto& v : radial_dirs) {
    double gv = bilinear(metric_tensor<double>(chart, z, v), v, u);
    m.min_inner = std::min(m.min_inner, gv);
    m.max_inner = std::max(m.max_inner, gv);
  }
  m.branches = radial_dirs.size();
  m.forward_angle = std::acos(detail::clamp_cos(-m.min_inner / m.lambda));
  m.backward_angle = std::acos(detail::clamp_cos(m.max_inner / m.lambda));
  return m;
}

inline AngleMeasurement angle_first_variation(const FinslerChart& chart, const Vec2& z, const Vec2& c_dir,
                                              AngleSide = AngleSide::Forward, const BvpOptions& o = {}) {
  if (z == chart.base_point()) fail(ErrorKind::PreconditionFailed, "angle at the base point");
  if (norm2<2>(c_dir) < kZeroVectorThreshold) fail(ErrorKind::InvalidVector, "zero direction");
  return angle_first_variation(chart, z, c_dir, radial_direction_set(chart, z, o));
}

struct QuotientOptions {
  double h0 = 1e-2;
  int halvings = 6;               // h0, h0/2, ..., h0/2^halvings
  double oscillation_tol = 1e-3;  // spread of the last three extrapolated values
  BvpOptions bvp{};
};

namespace detail {

// Richardson table removing the O(h) and O(h^2) terms of a sequence at h, h/2, ...
inline std::vector<double> richardson2(const std::vector<double>& q) {
  std::vector<double> r1, r2;
  for (std::size_t i = 0; i + 1 < q.size(); ++i) r1.push_back(2.0 * q[i + 1] - q[i]);
  for (std::size_t i = 0; i + 1 < r1.size(); ++i) r2.push_back((4.0 * r1[i + 1] - r1[i]) / 3.0);
  return r2;
}

inline BvpOptions seeded(const BvpOptions& base, std::vector<std::pair<double, double>> seeds) {
  BvpOptions o = base;
  o.scan = false;
  o.seeds = std::move(seeds);
  return o;
}

}  // namespace detail

// Limit of the one-sided quotient at c(s). Forward: s in [t_begin, t_end);
// backward: s in (t_begin, t_end].
inline AngleMeasurement angle_difference_quotient(const FinslerChart& chart, const GeodesicPath& c, double s,
                                                  AngleSide side, const QuotientOptions& o = {}) {
  if (c.empty()) fail(ErrorKind::PreconditionFailed, "empty curve");
  const double room = side == AngleSide::Forward ? c.t_end() - s : s - c.t_begin();
  if (!(room > 0.0) || s < c.t_begin() || s > c.t_end())
    fail(ErrorKind::PreconditionFailed, "s outside the legal range for this side");
  const Vec2 p = chart.base_point();
  const Vec2 z = c.position(s);
  if (norm2<2>(z - p) < 1e-12) fail(ErrorKind::PreconditionFailed, "curve passes through the base point");

  auto base = minimal_geodesics(chart, p, z, o.bvp, false);
  std::vector<std::pair<double, double>> radial_seeds;
  for (const auto& sh : base.shots) radial_seeds.emplace_back(sh.angle, sh.length);
  const double d0 = base.distance;

  AngleMeasurement m;
  m.method = AngleMethod::DifferenceQuotient;
  const Vec2 u = detail::unit_direction(chart, z, c.velocity(s));
  m.lambda = detail::angle_lambda(chart, z, u);
  m.branches = base.shots.size();
  const double h0 = std::min(o.h0, 0.5 * room);
  for (int k = 0; k <= o.halvings; ++k) {
    double h = h0 / std::ldexp(1.0, k);
    double sh = side == AngleSide::Forward ? s + h : s - h;
    Vec2 zh = c.position(sh);
    double dh = distance(chart, p, zh, detail::seeded(o.bvp, radial_seeds));
    Vec2 a = side == AngleSide::Forward ? z : zh;
    Vec2 b = side == AngleSide::Forward ? zh : z;
    double fwd = distance(chart, a, b, detail::seeded(o.bvp, {{polar_angle(b - a), h}}));
    double bwd = distance(chart, b, a, detail::seeded(o.bvp, {{polar_angle(a - b), h}}));
    double dm = std::max(fwd, bwd);
    double q = side == AngleSide::Forward ? (dh - d0) / dm : (d0 - dh) / dm;
    m.h_sequence.push_back(h);
    m.quotients.push_back(q);
  }
  m.extrapolated = detail::richardson2(m.quotients);
  if (m.extrapolated.size() < 3) fail(ErrorKind::PreconditionFailed, "need at least four step sizes");
  auto tail = std::vector<double>(m.extrapolated.end() - 3, m.extrapolated.end());
  double spread = *std::max_element(tail.begin(), tail.end()) - *std::min_element(tail.begin(), tail.end());
  if (!(spread <= o.oscillation_tol))
    fail(ErrorKind::LimitNotResolved, "difference quotients do not settle (spread " + std::to_string(spread) + ")");
  double lim = m.extrapolated.back();
  if (side == AngleSide::Forward)
    m.forward_angle = std::acos(detail::clamp_cos(-lim));
  else
    m.backward_angle = std::acos(detail::clamp_cos(lim));
  return m;
}

}  // namespace ftct
