#pragma once

// Geodesics on a chart: initial value problems, minimal geodesics by
// multi-start shooting, distances and the radial direction set G_p(z).

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "ftct/chart.hpp"
#include "ftct/error.hpp"
#include "ftct/geometry.hpp"
#include "ftct/linalg.hpp"
#include "ftct/ode.hpp"

namespace ftct {

using GeodesicState = std::array<double, 4>;  // x0, x1, v0, v1

struct GeodesicSample {
  double t;
  Vec2 x;
  Vec2 v;
  Vec2 a;
};

namespace detail {

struct HermiteBasis {
  std::array<double, 6> h;
  std::array<double, 6> dh;
};

inline HermiteBasis quintic_basis(double s) {
  double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  HermiteBasis b;
  b.h = {1 - 10 * s3 + 15 * s4 - 6 * s5,     s - 6 * s3 + 8 * s4 - 3 * s5, 0.5 * (s2 - 3 * s3 + 3 * s4 - s5),
         10 * s3 - 15 * s4 + 6 * s5,          -4 * s3 + 7 * s4 - 3 * s5,    0.5 * (s3 - 2 * s4 + s5)};
  b.dh = {-30 * s2 + 60 * s3 - 30 * s4,       1 - 18 * s2 + 32 * s3 - 15 * s4, 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4),
          30 * s2 - 60 * s3 + 30 * s4,        -12 * s2 + 28 * s3 - 15 * s4,    0.5 * (3 * s2 - 8 * s3 + 5 * s4)};
  return b;
}

}  // namespace detail

// A sampled unit-speed geodesic with quintic Hermite dense output.
class GeodesicPath {
 public:
  GeodesicPath() = default;
  explicit GeodesicPath(std::vector<GeodesicSample> samples) : samples_(std::move(samples)) {}

  const std::vector<GeodesicSample>& samples() const { return samples_; }
  bool empty() const { return samples_.size() < 2; }
  double t_begin() const { return samples_.front().t; }
  double t_end() const { return samples_.back().t; }
  double forward_length() const { return samples_.empty() ? 0.0 : t_end() - t_begin(); }
  double reverse_length() const { return reverse_length_; }
  double speed_drift() const { return speed_drift_; }
  const Vec2& start() const { return samples_.front().x; }
  const Vec2& end() const { return samples_.back().x; }
  const Vec2& start_velocity() const { return samples_.front().v; }
  const Vec2& end_velocity() const { return samples_.back().v; }

  Vec2 position(double t) const { return eval(t, false); }
  Vec2 velocity(double t) const { return eval(t, true); }

  void set_diagnostics(double reverse_length, double speed_drift) {
    reverse_length_ = reverse_length;
    speed_drift_ = speed_drift;
  }

 private:
  Vec2 eval(double t, bool deriv) const {
    if (samples_.empty()) fail(ErrorKind::PreconditionFailed, "empty geodesic path");
    if (samples_.size() == 1) return deriv ? samples_[0].v : samples_[0].x;
    t = std::clamp(t, t_begin(), t_end());
    auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                               [](double a, const GeodesicSample& s) { return a < s.t; });
    std::size_t i = it == samples_.begin() ? 0 : static_cast<std::size_t>(it - samples_.begin()) - 1;
    if (i + 1 >= samples_.size()) i = samples_.size() - 2;
    const auto& p = samples_[i];
    const auto& q = samples_[i + 1];
    double h = q.t - p.t;
    auto b = detail::quintic_basis((t - p.t) / h);
    const auto& w = deriv ? b.dh : b.h;
    Vec2 r;
    for (int k = 0; k < 2; ++k) {
      r[k] = w[0] * p.x[k] + h * w[1] * p.v[k] + h * h * w[2] * p.a[k] + w[3] * q.x[k] + h * w[4] * q.v[k] +
             h * h * w[5] * q.a[k];
      if (deriv) r[k] /= h;
    }
    return r;
  }

  std::vector<GeodesicSample> samples_;
  double reverse_length_ = 0.0;
  double speed_drift_ = 0.0;
};

inline Vec2 geodesic_acceleration(const FinslerChart& chart, const Vec2& x, const Vec2& v) {
  Vec2 G = spray<double>(chart, x, v);
  return {-2.0 * G[0], -2.0 * G[1]};
}

namespace detail {

inline auto geodesic_rhs(const FinslerChart& chart) {
  return [&chart](const GeodesicState& s, GeodesicState& ds, double) {
    Vec2 a = geodesic_acceleration(chart, {s[0], s[1]}, {s[2], s[3]});
    ds = {s[2], s[3], a[0], a[1]};
  };
}

inline Vec2 unit_direction(const FinslerChart& chart, const Vec2& x, const Vec2& v) {
  if (!detail::finite<2>(v)) fail(ErrorKind::InvalidVector, "non-finite direction");
  if (norm2<2>(v) < kZeroVectorThreshold) fail(ErrorKind::InvalidVector, "zero direction");
  double F = chart.F(x, v);
  return (1.0 / F) * v;
}

}  // namespace detail

// Integrates the geodesic with initial data (x, v) for parameter time t (may be
// negative) without recording samples. v is used as given, not normalized.
inline GeodesicState geodesic_flow(const FinslerChart& chart, const Vec2& x, const Vec2& v, double t,
                                   const IntegrationOptions& opts = {}) {
  GeodesicState s{x[0], x[1], v[0], v[1]};
  Vec2 last = x;
  try {
    integrate_observed(detail::geodesic_rhs(chart), s, 0.0, t, opts, [&](double, const GeodesicState& y) {
      Vec2 p{y[0], y[1]};
      if (!chart.contains(p)) throw ChartExitError(p, "geodesic left the chart");
      last = p;
      return true;
    });
  } catch (const ChartExitError&) {
    throw;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::IntegrationFailure) throw;
    throw ChartExitError(last, std::string("geodesic left the chart: ") + e.what());
  }
  return s;
}

inline double curve_reverse_length(const FinslerChart& chart, const GeodesicPath& path) {
  double total = 0.0;
  const auto& S = path.samples();
  for (std::size_t i = 0; i + 1 < S.size(); ++i) {
    total += boost::math::quadrature::gauss<double, 7>::integrate(
        [&](double t) {
          Vec2 x = path.position(t);
          Vec2 v = path.velocity(t);
          return chart.F(x, -v);
        },
        S[i].t, S[i + 1].t);
  }
  return total;
}

// F-unit-speed geodesic from x in direction v, of the given forward length.
inline GeodesicPath geodesic_ivp(const FinslerChart& chart, const Vec2& x, const Vec2& v, double length,
                                 const IntegrationOptions& opts = {}) {
  if (!chart.contains(x)) fail(ErrorKind::PreconditionFailed, "start point outside chart");
  if (!(length >= 0.0) || !std::isfinite(length)) fail(ErrorKind::PreconditionFailed, "length must be >= 0");
  Vec2 u = detail::unit_direction(chart, x, v);
  std::vector<GeodesicSample> samples;
  samples.push_back({0.0, x, u, geodesic_acceleration(chart, x, u)});
  GeodesicState s{x[0], x[1], u[0], u[1]};
  Vec2 last = x;
  if (length > 0.0) {
    try {
      integrate_observed(detail::geodesic_rhs(chart), s, 0.0, length, opts, [&](double t, const GeodesicState& y) {
        Vec2 p{y[0], y[1]}, w{y[2], y[3]};
        if (!chart.contains(p)) throw ChartExitError(p, "geodesic left the chart");
        last = p;
        samples.push_back({t, p, w, geodesic_acceleration(chart, p, w)});
        return true;
      });
    } catch (const ChartExitError&) {
      throw;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::IntegrationFailure) throw;
      throw ChartExitError(last, std::string("geodesic left the chart: ") + e.what());
    }
  }
  double drift = 0.0;
  for (const auto& smp : samples) drift = std::max(drift, std::abs(chart.F(smp.x, smp.v) - 1.0));
  GeodesicPath path(std::move(samples));
  path.set_diagnostics(length > 0.0 ? curve_reverse_length(chart, path) : 0.0, drift);
  return path;
}

// Geodesic-equation residual of a path at t: |x'' + 2G(x, x')| with x'' from
// a central difference of the dense velocity.
inline double geodesic_residual(const FinslerChart& chart, const GeodesicPath& path, double t, double h = 1e-4) {
  double a = std::max(path.t_begin(), t - h), b = std::min(path.t_end(), t + h);
  Vec2 acc = (1.0 / (b - a)) * (path.velocity(b) - path.velocity(a));
  Vec2 x = path.position(t), v = path.velocity(t);
  Vec2 g = geodesic_acceleration(chart, x, v);
  return norm2<2>(acc - g);
}

// ---- boundary value problem ------------------------------------------------

struct BvpOptions {
  int starts = 32;
  bool scan = true;  // false: Newton from `seeds` only (falls back to a scan on failure)
  std::vector<std::pair<double, double>> seeds;  // warm starts (initial angle, length)
  IntegrationOptions scan_integration{1e-7, 1e-7, 0.1, 1e-3, 100000};
  IntegrationOptions newton_integration{1e-9, 1e-9, 1.0, 1e-3, 200000};    // first Newton phase
  IntegrationOptions fine_integration{1e-12, 1e-12, 1.0, 1e-3, 200000};    // final Newton phase
  IntegrationOptions path_integration{1e-12, 1e-12, 0.05, 1e-3, 200000};   // sampled output paths
  double endpoint_tol = 1e-11;
  int max_newton = 40;
  int max_candidates = 6;
  double tie_tol = 1e-6;
  double dedupe_angle = 1e-4;
};

struct Shot {
  double angle = 0.0;   // coordinate angle of the initial direction
  double length = 0.0;  // forward length
  Vec2 end_velocity{};  // unit terminal velocity
};

struct MinimalGeodesics {
  double distance = 0.0;
  std::vector<Shot> shots;          // all minimizers, sorted by length
  std::vector<GeodesicPath> paths;  // filled when requested
};

namespace detail {

inline GeodesicState shoot(const FinslerChart& chart, const Vec2& x, double angle, double length,
                           const IntegrationOptions& opts) {
  Vec2 u = unit_direction(chart, x, unit_vector(angle));
  return geodesic_flow(chart, x, u, length, opts);
}

// Upper bound for d(x, y): F-length of the coordinate segment.
inline double segment_length(const FinslerChart& chart, const Vec2& x, const Vec2& y) {
  Vec2 d = y - x;
  return boost::math::quadrature::gauss<double, 20>::integrate(
      [&](double s) { return chart.F(x + s * d, d); }, 0.0, 1.0);
}

struct ScanHit {
  double angle;
  double miss;
  double length;
};

inline ScanHit scan_ray(const FinslerChart& chart, const Vec2& x, const Vec2& y, double angle, double max_len,
                        const IntegrationOptions& opts) {
  ScanHit hit{angle, norm2<2>(y - x), 0.0};
  Vec2 u;
  try {
    u = unit_direction(chart, x, unit_vector(angle));
  } catch (const Error&) {
    return hit;
  }
  GeodesicState s{x[0], x[1], u[0], u[1]};
  GeodesicState prev = s;
  double tprev = 0.0;
  try {
    integrate_observed(geodesic_rhs(chart), s, 0.0, max_len, opts, [&](double t, const GeodesicState& st) {
      Vec2 p{st[0], st[1]};
      if (!chart.contains(p)) return false;
      // closest approach of the chord prev -> p to y
      Vec2 a{prev[0], prev[1]};
      Vec2 d = p - a;
      double dd = dot(d, d);
      double lam = dd > 0 ? std::clamp(dot(y - a, d) / dd, 0.0, 1.0) : 0.0;
      double m = norm2<2>(a + lam * d - y);
      if (m < hit.miss) {
        hit.miss = m;
        hit.length = tprev + lam * (t - tprev);
      }
      prev = st;
      tprev = t;
      return true;
    });
  } catch (const Error&) {
    // keep what we have
  }
  return hit;
}

struct NewtonResult {
  bool ok = false;
  double angle = 0.0;
  double length = 0.0;
  Vec2 end_velocity{};
};

inline NewtonResult newton_stage(const FinslerChart& chart, const Vec2& x, const Vec2& y, double angle, double length,
                                 const BvpOptions& o, const IntegrationOptions& io, double tol) {
  NewtonResult r;
  const double dA = 1e-7;
  auto miss = [&](double a, double L, GeodesicState& st) -> std::optional<Vec2> {
    if (!(L > 0.0)) return std::nullopt;
    try {
      st = shoot(chart, x, a, L, io);
    } catch (const Error&) {
      return std::nullopt;
    }
    return Vec2{st[0] - y[0], st[1] - y[1]};
  };
  GeodesicState st{};
  auto res = miss(angle, length, st);
  if (!res) return r;
  double err = norm2<2>(*res);
  for (int it = 0; it < o.max_newton; ++it) {
    if (err < tol) {
      r.ok = true;
      r.angle = std::remainder(angle, 2.0 * M_PI);
      r.length = length;
      r.end_velocity = {st[2], st[3]};
      return r;
    }
    GeodesicState sa{};
    auto ra = miss(angle + dA, length, sa);
    if (!ra) return r;
    Mat2 J{};
    for (int i = 0; i < 2; ++i) {
      J[i][0] = ((*ra)[i] - (*res)[i]) / dA;
      J[i][1] = st[2 + i];
    }
    double det = det2(J);
    if (!(std::abs(det) > 1e-14)) return r;
    Vec2 step = matvec(inverse2(J), *res);
    // keep the angle step modest so Newton stays in the basin
    double scale = 1.0;
    if (std::abs(step[0]) > 0.3) scale = 0.3 / std::abs(step[0]);
    bool improved = false;
    for (int k = 0; k < 12; ++k) {
      double na = angle - scale * step[0];
      double nL = length - scale * step[1];
      GeodesicState ns{};
      auto nr = miss(na, nL, ns);
      if (nr && norm2<2>(*nr) < err) {
        angle = na;
        length = nL;
        st = ns;
        res = nr;
        err = norm2<2>(*nr);
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) return r;
  }
  return r;
}

inline NewtonResult newton_shoot(const FinslerChart& chart, const Vec2& x, const Vec2& y, double angle, double length,
                                 const BvpOptions& o) {
  const double scale = std::max(1.0, norm2<2>(y));
  NewtonResult r = newton_stage(chart, x, y, angle, length, o, o.newton_integration, 1e-7 * scale);
  if (!r.ok) return r;
  return newton_stage(chart, x, y, r.angle, r.length, o, o.fine_integration, o.endpoint_tol * scale);
}

}  // namespace detail

// All minimal geodesics from x to y found by multi-start shooting.
inline MinimalGeodesics minimal_geodesics(const FinslerChart& chart, const Vec2& x, const Vec2& y,
                                          const BvpOptions& o = {}, bool build_paths = true) {
  if (!chart.contains(x) || !chart.contains(y)) fail(ErrorKind::PreconditionFailed, "endpoint outside chart");
  MinimalGeodesics out;
  if (x == y) return out;
  const double ub = detail::segment_length(chart, x, y);

  std::vector<detail::NewtonResult> found;
  auto try_seed = [&](double a, double L) {
    auto r = detail::newton_stage(chart, x, y, a, L, o, o.newton_integration, 1e-7 * std::max(1.0, norm2<2>(y)));
    if (!r.ok) return;
    for (const auto& f : found)
      if (angle_distance(f.angle, r.angle) < 1e-5 && std::abs(f.length - r.length) < 1e-5) return;
    r = detail::newton_stage(chart, x, y, r.angle, r.length, o, o.fine_integration,
                             o.endpoint_tol * std::max(1.0, norm2<2>(y)));
    if (r.ok) found.push_back(r);
  };
  for (const auto& [a, L] : o.seeds) try_seed(a, L);

  auto good_enough = [&]() {
    if (found.empty()) return false;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : found) best = std::min(best, f.length);
    return best <= ub * (1.0 + 1e-9) + 1e-12;
  };

  if (o.scan || !good_enough()) {
    const double a0 = polar_angle(y - x);
    const int K = std::max(4, o.starts);
    const double max_len = 1.05 * ub + 1e-3;
    std::vector<detail::ScanHit> hits;
    hits.reserve(K);
    for (int k = 0; k < K; ++k)
      hits.push_back(detail::scan_ray(chart, x, y, a0 + 2.0 * M_PI * k / K, max_len, o.scan_integration));
    std::vector<int> cand;
    for (int k = 0; k < K; ++k) {
      double m = hits[k].miss, ml = hits[(k + K - 1) % K].miss, mr = hits[(k + 1) % K].miss;
      if (m <= ml && m <= mr && hits[k].length > 0.0) cand.push_back(k);
    }
    std::sort(cand.begin(), cand.end(), [&](int a, int b) { return hits[a].miss < hits[b].miss; });
    if (static_cast<int>(cand.size()) > o.max_candidates) cand.resize(o.max_candidates);
    for (int k : cand) try_seed(hits[k].angle, hits[k].length);
  }
  if (found.empty()) fail(ErrorKind::BvpNoConvergence, "shooting did not converge from any seed");

  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.length < b.length; });
  const double dmin = found.front().length;
  if (dmin > ub * (1.0 + 1e-9) + 1e-12)
    fail(ErrorKind::BvpNoConvergence, "no geodesic shorter than the coordinate segment was found");
  for (const auto& f : found) {
    if (f.length > dmin + o.tie_tol) break;
    bool dup = false;
    for (const auto& s : out.shots) dup = dup || angle_distance(s.angle, f.angle) < o.dedupe_angle;
    if (!dup) out.shots.push_back({f.angle, f.length, f.end_velocity});
  }
  out.distance = dmin;
  if (build_paths) {
    for (const auto& s : out.shots)
      out.paths.push_back(geodesic_ivp(chart, x, unit_vector(s.angle), s.length, o.path_integration));
  }
  return out;
}

inline double distance(const FinslerChart& chart, const Vec2& x, const Vec2& y, const BvpOptions& o = {}) {
  return minimal_geodesics(chart, x, y, o, false).distance;
}

// d_m(x, y) = max{d(x, y), d(y, x)}
inline double symmetric_distance(const FinslerChart& chart, const Vec2& x, const Vec2& y, const BvpOptions& o = {}) {
  return std::max(distance(chart, x, y, o), distance(chart, y, x, o));
}

// G_p(z): unit terminal velocities of minimal geodesics from the base point.
inline std::vector<Vec2> radial_direction_set(const FinslerChart& chart, const Vec2& z, const BvpOptions& o = {}) {
  if (z == chart.base_point()) fail(ErrorKind::PreconditionFailed, "z equals the base point");
  auto mg = minimal_geodesics(chart, chart.base_point(), z, o, false);
  std::vector<Vec2> dirs;
  for (const auto& s : mg.shots) {
    bool dup = false;
    for (const auto& d : dirs) dup = dup || angle_distance(polar_angle(d), polar_angle(s.end_velocity)) < o.dedupe_angle;
    if (!dup) dirs.push_back(s.end_velocity);
  }
  return dirs;
}

}  // namespace ftct
