#pragma once

// Spray, connection and curvature of a chart metric, all generated from the
// energy E = F^2/2 by nested forward-mode differentiation.

#include <array>
#include <cmath>

#include "ftct/chart.hpp"
#include "ftct/dual.hpp"
#include "ftct/error.hpp"
#include "ftct/linalg.hpp"

namespace ftct {

namespace detail {

// Lifts (x, v) in R^4 to Dual<T> with unit seed on coordinate `a` (0,1 for
// x and 2,3 for v). a < 0 seeds nothing.
template <class T>
std::array<Dual<T>, 4> seed(const std::array<T, 4>& z, int a) {
  std::array<Dual<T>, 4> r;
  for (int i = 0; i < 4; ++i) r[i] = Dual<T>{z[i], T(i == a ? 1.0 : 0.0)};
  return r;
}

template <class T>
std::array<T, 4> pack(const Vec<T, 2>& x, const Vec<T, 2>& v) {
  return {x[0], x[1], v[0], v[1]};
}

// d^2 E / dz_a dz_b as the eps.eps part, with first derivatives alongside.
template <class T>
Dual<Dual<T>> energy_pair(const FinslerChart& chart, const std::array<T, 4>& z, int a, int b) {
  using DD = Dual<Dual<T>>;
  std::array<DD, 4> w;
  for (int i = 0; i < 4; ++i) {
    w[i] = DD{Dual<T>{z[i], T(i == b ? 1.0 : 0.0)}, Dual<T>{T(i == a ? 1.0 : 0.0), T(0.0)}};
  }
  DD f = chart.metric<DD>(Vec<DD, 2>{w[0], w[1]}, Vec<DD, 2>{w[2], w[3]});
  return 0.5 * (f * f);
}

}  // namespace detail

template <class T>
struct EnergyJet {
  Mat<T, 2> g;      // d2E/dv^i dv^j
  Mat<T, 2> mixed;  // mixed[k][l] = d2E/dx^k dv^l
  Vec<T, 2> ex;     // dE/dx^k
};

template <class T>
EnergyJet<T> energy_jet(const FinslerChart& chart, const Vec<T, 2>& x, const Vec<T, 2>& v) {
  auto z = detail::pack(x, v);
  EnergyJet<T> j;
  auto e22 = detail::energy_pair(chart, z, 2, 2);
  auto e23 = detail::energy_pair(chart, z, 2, 3);
  auto e33 = detail::energy_pair(chart, z, 3, 3);
  j.g = {{{e22.eps.eps, e23.eps.eps}, {e23.eps.eps, e33.eps.eps}}};
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      auto e = detail::energy_pair(chart, z, k, 2 + l);
      j.mixed[k][l] = e.eps.eps;
      if (l == 0) j.ex[k] = e.eps.val;
    }
  }
  return j;
}

// Fundamental tensor only (three energy evaluations).
template <class T>
Mat<T, 2> metric_tensor(const FinslerChart& chart, const Vec<T, 2>& x, const Vec<T, 2>& v) {
  auto z = detail::pack(x, v);
  auto e22 = detail::energy_pair(chart, z, 2, 2);
  auto e23 = detail::energy_pair(chart, z, 2, 3);
  auto e33 = detail::energy_pair(chart, z, 3, 3);
  return {{{e22.eps.eps, e23.eps.eps}, {e23.eps.eps, e33.eps.eps}}};
}

// Geodesic spray coefficients: G^i = 1/2 g^{il} (E_{x^k v^l} v^k - E_{x^l}).
// Geodesics satisfy x'' + 2 G(x, x') = 0.
template <class T>
Vec<T, 2> spray(const FinslerChart& chart, const Vec<T, 2>& x, const Vec<T, 2>& v) {
  EnergyJet<T> j = energy_jet(chart, x, v);
  Vec<T, 2> rhs;
  for (int l = 0; l < 2; ++l) rhs[l] = j.mixed[0][l] * v[0] + j.mixed[1][l] * v[1] - j.ex[l];
  Mat<T, 2> gi = inverse2(j.g);
  Vec<T, 2> G = matvec(gi, rhs);
  return {0.5 * G[0], 0.5 * G[1]};
}

struct SprayFirst {
  Vec2 G;
  Mat2 dx;  // dx[i][k] = dG^i/dx^k
  Mat2 dv;  // dv[i][k] = dG^i/dv^k, the nonlinear connection N^i_k
};

inline SprayFirst spray_first(const FinslerChart& chart, const Vec2& x, const Vec2& v) {
  SprayFirst s{};
  auto z = detail::pack(x, v);
  for (int a = 0; a < 4; ++a) {
    auto w = detail::seed<double>(z, a);
    Vec<D1, 2> G = spray<D1>(chart, {w[0], w[1]}, {w[2], w[3]});
    for (int i = 0; i < 2; ++i) {
      if (a < 2)
        s.dx[i][a] = G[i].eps;
      else
        s.dv[i][a - 2] = G[i].eps;
      s.G[i] = G[i].val;
    }
  }
  return s;
}

struct SpraySecond {
  Vec2 G;
  Mat2 dx;
  Mat2 dv;
  std::array<Mat2, 2> dxdv;  // dxdv[i][j][k] = d2G^i/dx^j dv^k
  std::array<Mat2, 2> dvdv;  // dvdv[i][j][k] = d2G^i/dv^j dv^k
};

inline SpraySecond spray_second(const FinslerChart& chart, const Vec2& x, const Vec2& v) {
  SpraySecond s{};
  auto z = detail::pack(x, v);
  auto eval = [&](int a, int b) {
    std::array<D2, 4> w;
    for (int i = 0; i < 4; ++i) w[i] = D2{D1{z[i], i == b ? 1.0 : 0.0}, D1{i == a ? 1.0 : 0.0, 0.0}};
    return spray<D2>(chart, {w[0], w[1]}, {w[2], w[3]});
  };
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      auto G = eval(j, 2 + k);
      for (int i = 0; i < 2; ++i) {
        s.G[i] = G[i].val.val;
        s.dxdv[i][j][k] = G[i].eps.eps;
        s.dx[i][j] = G[i].eps.val;
        s.dv[i][k] = G[i].val.eps;
      }
    }
  }
  for (int j = 0; j < 2; ++j) {
    for (int k = j; k < 2; ++k) {
      auto G = eval(2 + j, 2 + k);
      for (int i = 0; i < 2; ++i) s.dvdv[i][j][k] = s.dvdv[i][k][j] = G[i].eps.eps;
    }
  }
  return s;
}

// Riemann curvature operator R_y: R^i_k (Berwald's formula in spray terms).
inline Mat2 curvature_operator(const SpraySecond& s, const Vec2& y) {
  Mat2 R{};
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) {
      double r = 2.0 * s.dx[i][k];
      for (int j = 0; j < 2; ++j) {
        r -= y[j] * s.dxdv[i][j][k];
        r += 2.0 * s.G[j] * s.dvdv[i][j][k];
        r -= s.dv[i][j] * s.dv[j][k];
      }
      R[i][k] = r;
    }
  }
  return R;
}

inline Mat2 curvature_operator(const FinslerChart& chart, const Vec2& x, const Vec2& y) {
  return curvature_operator(spray_second(chart, x, y), y);
}

// K(v, w) = g_v(R_v w, w) / (g_v(v,v) g_v(w,w) - g_v(v,w)^2).
inline double flag_curvature(const FinslerChart& chart, const Vec2& x, const Vec2& v, const Vec2& w) {
  if (norm2<2>(v) < kZeroVectorThreshold) fail(ErrorKind::NormNotSmoothAtZero, "flag pole is zero");
  Mat2 g = metric_tensor<double>(chart, x, v);
  double gvv = bilinear(g, v, v), gww = bilinear(g, w, w), gvw = bilinear(g, v, w);
  double den = gvv * gww - gvw * gvw;
  if (!(den >= 1e-10 * gvv * gww)) fail(ErrorKind::DegenerateFlag, "flag vectors nearly dependent");
  Mat2 R = curvature_operator(chart, x, v);
  return bilinear(g, matvec(R, w), w) / den;
}

using Connection = std::array<Mat2, 2>;  // Gamma[i][j][k]

// Chern connection coefficients with reference vector y.
inline Connection chern_connection(const FinslerChart& chart, const Vec2& x, const Vec2& y) {
  auto z = detail::pack(x, y);
  // dg[a][l][k]: derivative of g_lk along coordinate a of (x, y).
  std::array<Mat2, 4> dg{};
  Mat2 g{};
  for (int a = 0; a < 4; ++a) {
    auto w = detail::seed<double>(z, a);
    Mat<D1, 2> gd = metric_tensor<D1>(chart, {w[0], w[1]}, {w[2], w[3]});
    for (int l = 0; l < 2; ++l)
      for (int k = 0; k < 2; ++k) {
        dg[a][l][k] = gd[l][k].eps;
        g[l][k] = gd[l][k].val;
      }
  }
  Mat2 N = spray_first(chart, x, y).dv;
  // delta_j g_lk = dg/dx^j - N^m_j dg/dy^m
  std::array<Mat2, 2> dd{};
  for (int j = 0; j < 2; ++j)
    for (int l = 0; l < 2; ++l)
      for (int k = 0; k < 2; ++k) dd[j][l][k] = dg[j][l][k] - N[0][j] * dg[2][l][k] - N[1][j] * dg[3][l][k];
  Mat2 gi = inverse2(g);
  Connection G{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        double s = 0.0;
        for (int l = 0; l < 2; ++l) s += gi[i][l] * (dd[j][l][k] + dd[k][j][l] - dd[l][j][k]);
        G[i][j][k] = 0.5 * s;
      }
  return G;
}

inline Vec2 contract(const Connection& G, const Vec2& a, const Vec2& b) {
  Vec2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) r[i] += G[i][j][k] * a[j] * b[k];
  return r;
}

// T(v, w) = g_v(D^Y_Y Y - D^X_Y Y, X) at x, for extensions X, Y of v, w. The
// extension enters only through the Jacobian dY of Y at x, and that term
// cancels in the difference.
inline double tangent_curvature(const FinslerChart& chart, const Vec2& x, const Vec2& v, const Vec2& w,
                                const Mat2& dY = Mat2{}) {
  if (!detail::finite<2>(v) || !detail::finite<2>(w)) fail(ErrorKind::InvalidVector, "non-finite input");
  if (norm2<2>(v) < kZeroVectorThreshold || norm2<2>(w) < kZeroVectorThreshold)
    fail(ErrorKind::InvalidVector, "tangent curvature needs nonzero vectors");
  Vec2 dYw = matvec(dY, w);
  Vec2 yy = dYw + contract(chern_connection(chart, x, w), w, w);
  Vec2 xy = dYw + contract(chern_connection(chart, x, v), w, w);
  Mat2 g = metric_tensor<double>(chart, x, v);
  return bilinear(g, yy - xy, v);
}

}  // namespace ftct
