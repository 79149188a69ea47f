#pragma once

// Chart metrics for a surface of revolution: polar (t, theta) coordinates and
// Cartesian normal coordinates centred at the pole.

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "ftct/chart.hpp"
#include "ftct/dual.hpp"
#include "ftct/model_surface.hpp"

namespace ftct {

struct RevolutionPolarMetric {
  ModelSurface surface;
  template <class T>
  T operator()(const Vec<T, 2>& x, const Vec<T, 2>& v) const {
    using std::sqrt;
    T f = surface.profile(x[0]);
    return sqrt(v[0] * v[0] + f * f * v[1] * v[1]);
  }
};

// In normal coordinates u = t (cos theta, sin theta):
//   F^2 = Q^2 |v|^2 + H (u.v)^2,  Q = f(r)/r,  H = (1 - Q^2)/r^2.
// Near the pole both are evaluated from P(r^2) = (f(r) - r)/r^3, fitted by a
// Chebyshev series in r^2, so the metric stays smooth through u = 0.
class RevolutionNormalMetric {
 public:
  RevolutionNormalMetric(ModelSurface s, double switch_radius = 0.05) : surface_(std::move(s)) {
    rs_ = std::min(switch_radius, 0.25 * surface_.t_max());
    rs2_ = rs_ * rs_;
    const int n = 14;
    std::vector<double> vals(n);
    for (int k = 0; k < n; ++k) {
      double x = std::cos(M_PI * (k + 0.5) / n);
      double r2 = 0.5 * rs2_ * (1.0 + x);
      double r = std::sqrt(r2);
      vals[k] = surface_.deviation(r) / (r2 * r);
    }
    coef_.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += vals[k] * std::cos(M_PI * j * (k + 0.5) / n);
      coef_[j] = 2.0 * s / n;
    }
    coef_[0] *= 0.5;
  }

  template <class T>
  T operator()(const Vec<T, 2>& u, const Vec<T, 2>& v) const {
    using std::sqrt;
    T rr = u[0] * u[0] + u[1] * u[1];
    T uv = u[0] * v[0] + u[1] * v[1];
    T vv = v[0] * v[0] + v[1] * v[1];
    T q2, h;
    if (value_of(rr) < rs2_) {
      T P = pole_series(rr);
      T Q = 1.0 + rr * P;
      q2 = Q * Q;
      h = -(2.0 * P + rr * P * P);
    } else {
      T r = sqrt(rr);
      T Q = surface_.profile(r) / r;
      q2 = Q * Q;
      h = (1.0 - q2) / rr;
    }
    return sqrt(q2 * vv + h * uv * uv);
  }

  const ModelSurface& surface() const { return surface_; }

 private:
  template <class T>
  T pole_series(const T& rr) const {
    T x = rr * (2.0 / rs2_) - 1.0;
    T b1 = T(0.0), b2 = T(0.0);
    for (int j = static_cast<int>(coef_.size()) - 1; j >= 1; --j) {
      T b0 = 2.0 * x * b1 - b2 + coef_[j];
      b2 = b1;
      b1 = b0;
    }
    return x * b1 - b2 + coef_[0];
  }

  ModelSurface surface_;
  double rs_ = 0.05, rs2_ = 0.0025;
  std::vector<double> coef_;
};

inline FinslerChart polar_chart(const ModelSurface& s, double t_lo, double t_hi, Vec2 base) {
  if (t_hi > s.t_max()) fail(ErrorKind::TruncationTooShort, "polar chart reaches beyond t_max");
  return FinslerChart(RevolutionPolarMetric{s}, PolarAnnulusDomain{t_lo, t_hi}, base, true, "polar_" + s.name());
}

// Normal-coordinate chart; the pole is the base point at the origin.
inline FinslerChart normal_chart(const ModelSurface& s, double radius) {
  if (radius > s.t_max()) fail(ErrorKind::TruncationTooShort, "normal chart reaches beyond t_max");
  return FinslerChart(RevolutionNormalMetric(s), DiskDomain{{0.0, 0.0}, radius}, {0.0, 0.0}, true,
                      "normal_" + s.name());
}

inline Vec2 polar_to_normal(double t, double theta) { return {t * std::cos(theta), t * std::sin(theta)}; }

}  // namespace ftct
