#pragma once

// Forward triangles, the hypotheses of the Toponogov comparison theorem on a
// sampled tube around the edge, and end-to-end verification of the angle
// inequalities against a model surface.

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ftct/angles.hpp"
#include "ftct/error.hpp"
#include "ftct/geometry.hpp"
#include "ftct/manifold.hpp"
#include "ftct/model_surface.hpp"
#include "ftct/surface_geometry.hpp"

namespace ftct {

// L_m(c) = int max{F(c'), F(-c')} ds over the stored samples.
inline double measured_edge_length(const FinslerChart& chart, const GeodesicPath& c) {
  if (c.empty()) return 0.0;
  double total = 0.0;
  const auto& S = c.samples();
  for (std::size_t i = 0; i + 1 < S.size(); ++i) {
    total += boost::math::quadrature::gauss<double, 7>::integrate(
        [&](double t) {
          Vec2 x = c.position(t), v = c.velocity(t);
          return std::max(chart.F(x, v), chart.F(x, -1.0 * v));
        },
        S[i].t, S[i + 1].t);
  }
  return total;
}

struct ForwardTriangle {
  Vec2 p{}, x{}, y{};
  GeodesicPath gamma, sigma, c;
  std::vector<Shot> gamma_shots, sigma_shots;  // all minimal geodesics p->x, p->y
  double d_px = 0.0, d_py = 0.0, d_xy = 0.0, d_m_xy = 0.0;
  double L_m = 0.0;
  double forward_angle_x = 0.0;
  double backward_angle_y = 0.0;
  std::size_t edge_multiplicity = 1;
};

namespace detail {

inline std::vector<Vec2> end_velocities(const std::vector<Shot>& shots) {
  std::vector<Vec2> out;
  for (const auto& s : shots) out.push_back(s.end_velocity);
  return out;
}

}  // namespace detail

inline ForwardTriangle make_forward_triangle(const FinslerChart& chart, const Vec2& x, const Vec2& y,
                                             const BvpOptions& o = {}) {
  ForwardTriangle T;
  T.p = chart.base_point();
  T.x = x;
  T.y = y;
  if (x == T.p || y == T.p || x == y) fail(ErrorKind::PreconditionFailed, "triangle vertices must be distinct");
  auto px = minimal_geodesics(chart, T.p, x, o, true);
  auto py = minimal_geodesics(chart, T.p, y, o, true);
  auto xy = minimal_geodesics(chart, x, y, o, true);
  T.gamma = px.paths.front();
  T.sigma = py.paths.front();
  T.c = xy.paths.front();
  T.gamma_shots = px.shots;
  T.sigma_shots = py.shots;
  T.edge_multiplicity = xy.shots.size();
  T.d_px = px.distance;
  T.d_py = py.distance;
  T.d_xy = xy.distance;
  BvpOptions rev = o;
  rev.seeds = {{polar_angle(x - y), T.c.reverse_length()}};
  T.d_m_xy = std::max(T.d_xy, distance(chart, y, x, rev));
  T.L_m = measured_edge_length(chart, T.c);
  auto ax = angle_first_variation(chart, x, T.c.start_velocity(), detail::end_velocities(px.shots));
  auto ay = angle_first_variation(chart, y, T.c.end_velocity(), detail::end_velocities(py.shots));
  T.forward_angle_x = ax.forward_angle;
  T.backward_angle_y = ay.backward_angle;
  return T;
}

// ---- hypotheses -----------------------------------------------------------------

struct HypothesisOptions {
  double neighborhood_radius = 0.02;
  int base_points = 32;
  int directions = 16;
  int radial_samples = 16;   // per radial geodesic gamma, sigma
  double ball_tol = 1e-6;
  double convexity_tol = 1e-6;
  double tangent_tol = 1e-6;
  double reverse_tol = 1e-6;
  double radial_tol = 1e-4;
  double max_excluded_fraction = 0.05;
  BvpOptions bvp{};
};

struct HypothesisReport {
  bool outside_ball = false;
  double min_distance_to_p = 0.0;
  double rho = 0.0;
  double uniform_convexity_margin = std::numeric_limits<double>::infinity();
  double tangent_curvature_max = 0.0;
  double reverse_geodesic_residual = 0.0;
  double radial_bound_margin = std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  std::size_t excluded = 0;
  bool inconclusive = false;
  bool pass = false;
  HypothesisOptions options{};
  std::vector<std::string> failures;
};

namespace detail {

inline Vec2 coordinate_normal(const Vec2& v) {
  double n = norm2<2>(v);
  return {-v[1] / n, v[0] / n};
}

// K(v, w) - G(t) with w the coordinate rotation of v.
inline double radial_margin(const FinslerChart& chart, const ModelSurface& model, const Vec2& z, const Vec2& v,
                            double t) {
  Vec2 w = coordinate_normal(v);
  return flag_curvature(chart, z, v, w) - model.curvature(std::min(t, model.t_max()));
}

}  // namespace detail

inline HypothesisReport check_hypotheses(const FinslerChart& chart, const ForwardTriangle& T,
                                         const ModelSurface& model, const HypothesisOptions& o = {}) {
  auto rho = model.rho();
  if (!rho) fail(ErrorKind::PreconditionFailed, "model surface has no unique waist");
  HypothesisReport R;
  R.options = o;
  R.rho = *rho;
  R.min_distance_to_p = std::numeric_limits<double>::infinity();

  auto sample_point = [&](const Vec2& z, const std::vector<std::pair<double, double>>& seeds,
                          bool on_edge) -> std::optional<MinimalGeodesics> {
    ++R.samples;
    BvpOptions b = o.bvp;
    b.scan = seeds.empty();
    b.seeds = seeds;
    std::optional<MinimalGeodesics> mg;
    try {
      if (!chart.contains(z)) throw Error(ErrorKind::ChartExit, "tube point outside chart");
      mg = minimal_geodesics(chart, T.p, z, b, false);
    } catch (const Error&) {
      ++R.excluded;
      return std::nullopt;
    }
    if (on_edge) R.min_distance_to_p = std::min(R.min_distance_to_p, mg->distance);
    for (const auto& s : mg->shots) {
      const Vec2& v = s.end_velocity;
      Mat2 g = metric_tensor<double>(chart, z, v);
      double a0 = polar_angle(v);
      for (int k = 0; k < o.directions; ++k) {
        Vec2 w = detail::unit_direction(chart, z, unit_vector(a0 + 2.0 * M_PI * (k + 0.5) / o.directions));
        R.uniform_convexity_margin = std::min(R.uniform_convexity_margin, bilinear(g, w, w) - 1.0);
        R.tangent_curvature_max = std::max(R.tangent_curvature_max, std::abs(tangent_curvature(chart, z, v, w)));
      }
      R.radial_bound_margin =
          std::min(R.radial_bound_margin, detail::radial_margin(chart, model, z, v, mg->distance));
    }
    return mg;
  };

  // tube: base points on c and offsets along the coordinate normal
  std::vector<std::pair<double, double>> seeds;
  for (const auto& s : T.gamma_shots) seeds.emplace_back(s.angle, s.length);
  const double len = T.c.forward_length();
  const int nb = std::max(2, o.base_points);
  for (int i = 0; i < nb; ++i) {
    double t = len * i / (nb - 1);
    Vec2 z = T.c.position(t), cv = T.c.velocity(t);
    auto mg = sample_point(z, i == 0 ? std::vector<std::pair<double, double>>{} : seeds, true);
    if (mg) {
      seeds.clear();
      for (const auto& s : mg->shots) seeds.emplace_back(s.angle, s.length);
    }
    if (o.neighborhood_radius > 0.0) {
      Vec2 n = detail::coordinate_normal(cv);
      for (double sg : {-1.0, 1.0}) sample_point(z + (sg * o.neighborhood_radius) * n, seeds, false);
    }
    // reverse curve geodesic: c'' + 2G(c, -c') must vanish along the edge
    Vec2 acc = geodesic_acceleration(chart, z, cv);
    Vec2 racc = geodesic_acceleration(chart, z, -1.0 * cv);
    R.reverse_geodesic_residual = std::max(R.reverse_geodesic_residual, norm2<2>(acc - racc));
  }
  // radial bound along gamma and sigma
  for (const GeodesicPath* path : {&T.gamma, &T.sigma}) {
    double l = path->forward_length();
    for (int k = 1; k <= o.radial_samples; ++k) {
      double t = l * k / o.radial_samples;
      R.radial_bound_margin =
          std::min(R.radial_bound_margin, detail::radial_margin(chart, model, path->position(t), path->velocity(t), t));
    }
  }

  R.outside_ball = R.min_distance_to_p > R.rho + o.ball_tol;
  R.inconclusive = R.samples == 0 || R.excluded > o.max_excluded_fraction * R.samples;
  if (!R.outside_ball) R.failures.push_back("edge meets the closed waist ball");
  if (R.uniform_convexity_margin < -o.convexity_tol) R.failures.push_back("uniform convexity violated");
  if (R.tangent_curvature_max > o.tangent_tol) R.failures.push_back("tangent curvature nonzero");
  if (R.reverse_geodesic_residual > o.reverse_tol) R.failures.push_back("reverse edge is not geodesic");
  if (R.radial_bound_margin < -o.radial_tol) R.failures.push_back("radial curvature bound violated");
  if (R.inconclusive) R.failures.push_back("too many excluded samples");
  R.pass = R.failures.empty();
  return R;
}

// ---- verification -----------------------------------------------------------------

enum class TctMode { Exact, Weak };
enum class TctStatus { Pass, Fail, NotApplicable, Inconclusive };

inline std::string to_string(TctStatus s) {
  switch (s) {
    case TctStatus::Pass: return "PASS";
    case TctStatus::Fail: return "FAIL";
    case TctStatus::NotApplicable: return "NOT_APPLICABLE";
    case TctStatus::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

struct TctOptions {
  TctMode mode = TctMode::Exact;
  double delta = 0.0;     // weak mode only
  bool force = false;     // skip the hypothesis gate; recorded in the report
  double slack = 1e-4;
  double degenerate_tol = 1e-7;
  SurfaceOptions surface{};
};

struct TctReport {
  std::uint64_t seed = 0;
  double d_px = 0.0, d_py = 0.0, d_xy = 0.0, L_m = 0.0;
  double angle_x = 0.0, model_angle_x = 0.0;
  double angle_y = 0.0, model_angle_y = 0.0;
  double min_margin = 0.0;
  TctStatus status = TctStatus::Inconclusive;
  bool forced = false;
  bool degenerate = false;
  std::string note;
  // error budget
  double comparison_round_trip = 0.0;
  double bvp_endpoint_tol = 0.0;
  double edge_speed_drift = 0.0;
};

inline TctReport verify_tct(const FinslerChart& /*chart*/, const ForwardTriangle& T, const ModelSurface& model,
                            const HypothesisReport* hyp, const TctOptions& o = {}) {
  TctReport r;
  r.d_px = T.d_px;
  r.d_py = T.d_py;
  r.d_xy = T.d_xy;
  r.L_m = T.L_m;
  r.angle_x = T.forward_angle_x;
  r.angle_y = T.backward_angle_y;
  r.forced = o.force;
  r.edge_speed_drift = T.c.speed_drift();
  r.bvp_endpoint_tol = BvpOptions{}.endpoint_tol;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.model_angle_x = r.model_angle_y = r.min_margin = nan;
  if (!o.force) {
    if (!hyp) fail(ErrorKind::HypothesisFailed, "hypotheses were not checked");
    if (!hyp->pass) throw HypothesisFailedError(hyp->failures);
  }
  if (std::abs(std::sin(r.angle_x)) < o.degenerate_tol) {
    r.degenerate = true;
    r.status = TctStatus::Pass;
    r.note = "triangle lies on a geodesic through p";
    return r;
  }
  ModelSurface m = o.mode == TctMode::Exact ? model : delta_modification(model, o.delta);
  ComparisonTriangle C;
  try {
    C = comparison_triangle(m, T.d_px, T.d_py, T.L_m, o.surface);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoComparisonTriangle) throw;
    r.status = TctStatus::NotApplicable;
    r.note = e.what();
    return r;
  }
  r.comparison_round_trip = C.round_trip_error;
  r.model_angle_x = C.angle_x;
  r.model_angle_y = C.angle_y;
  r.min_margin = std::min(r.angle_x - C.angle_x, r.angle_y - C.angle_y);
  r.status = r.min_margin >= -o.slack ? TctStatus::Pass : TctStatus::Fail;
  return r;
}

inline void write_csv(const std::vector<TctReport>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  out.precision(17);
  out << "seed,d_px,d_py,d_xy,L_m,angle_x,model_angle_x,angle_y,model_angle_y,min_margin,status\n";
  for (const auto& r : rows)
    out << r.seed << ',' << r.d_px << ',' << r.d_py << ',' << r.d_xy << ',' << r.L_m << ',' << r.angle_x << ','
        << r.model_angle_x << ',' << r.angle_y << ',' << r.model_angle_y << ',' << r.min_margin << ','
        << to_string(r.status) << '\n';
}

// ---- admissible triangles ---------------------------------------------------------

struct TriangleSamplerOptions {
  double radius_margin = 0.05;  // lower radius rho + margin
  double r_max = 0.0;           // 0: t_max / 2 of the model
  double sep_min = 0.1;
  double sep_max = 2.5;
  int max_attempts = 50;        // per requested triangle
  bool require_comparison = false;
  HypothesisOptions hypotheses{};
  BvpOptions bvp{};
};

struct AdmissibleTriangle {
  std::uint64_t seed = 0;
  ForwardTriangle triangle;
  HypothesisReport hypotheses;
};

// Vertices in normal coordinates around the chart's base point: polar radius
// in (rho + margin, r_max), angular separation in (sep_min, sep_max). The
// sample stream for index i depends only on (seed, i).
inline std::optional<AdmissibleTriangle> sample_admissible_triangle(const FinslerChart& chart,
                                                                    const ModelSurface& model, std::uint64_t seed,
                                                                    std::uint64_t index,
                                                                    const TriangleSamplerOptions& o = {}) {
  auto rho = model.rho();
  if (!rho) fail(ErrorKind::PreconditionFailed, "model surface has no unique waist");
  const double r_lo = *rho + o.radius_margin;
  const double r_hi = o.r_max > 0.0 ? o.r_max : 0.5 * model.t_max();
  if (!(r_hi > r_lo)) fail(ErrorKind::PreconditionFailed, "empty radius range");
  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(sq);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Vec2 p = chart.base_point();
  for (int attempt = 0; attempt < o.max_attempts; ++attempt) {
    double rx = r_lo + (r_hi - r_lo) * U(rng), ry = r_lo + (r_hi - r_lo) * U(rng);
    double a = 2.0 * M_PI * U(rng);
    double sep = o.sep_min + (o.sep_max - o.sep_min) * U(rng);
    Vec2 x = p + rx * unit_vector(a), y = p + ry * unit_vector(a + sep);
    try {
      if (!chart.contains(x) || !chart.contains(y)) continue;
      auto T = make_forward_triangle(chart, x, y, o.bvp);
      auto H = check_hypotheses(chart, T, model, o.hypotheses);
      if (!H.pass) continue;
      if (o.require_comparison) {
        comparison_triangle(model, T.d_px, T.d_py, T.L_m);
      }
      return AdmissibleTriangle{seed, std::move(T), std::move(H)};
    } catch (const Error&) {
      continue;
    }
  }
  return std::nullopt;
}

}  // namespace ftct
