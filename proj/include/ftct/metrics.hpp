#pragma once

// Chart metric families. Each is a callable F(x, v) templated on the scalar.

#include <utility>

#include "ftct/chart.hpp"
#include "ftct/dual.hpp"
#include "ftct/linalg.hpp"
#include "ftct/norms.hpp"

namespace ftct {

struct ConstantMatrixField {
  Mat2 m = identity2();
  template <class T>
  Mat<T, 2> operator()(const Vec<T, 2>&) const {
    return lift<T, 2>(m);
  }
};

struct ConstantCovectorField {
  Vec2 b{0.0, 0.0};
  template <class T>
  Vec<T, 2> operator()(const Vec<T, 2>&) const {
    return lift<T, 2>(b);
  }
};

// A(x) = (1 + k |x|^2) A
struct ConformalMatrixField {
  Mat2 m = identity2();
  double k = 0.0;
  template <class T>
  Mat<T, 2> operator()(const Vec<T, 2>& x) const {
    T s = 1.0 + k * (x[0] * x[0] + x[1] * x[1]);
    Mat<T, 2> r = lift<T, 2>(m);
    for (auto& row : r)
      for (auto& e : row) e = e * s;
    return r;
  }
};

// b(x) = b0 + B x
struct LinearCovectorField {
  Vec2 b0{0.0, 0.0};
  Mat2 B{};
  template <class T>
  Vec<T, 2> operator()(const Vec<T, 2>& x) const {
    Vec<T, 2> r = matvec(lift<T, 2>(B), x);
    r[0] = r[0] + b0[0];
    r[1] = r[1] + b0[1];
    return r;
  }
};

// Locally Minkowski: the same norm at every point.
struct ConstantNormMetric {
  Norm2 norm;
  template <class T>
  T operator()(const Vec<T, 2>&, const Vec<T, 2>& v) const {
    return norm.evaluate(v);
  }
};

template <class AField>
struct RiemannianMetric {
  AField a;
  template <class T>
  T operator()(const Vec<T, 2>& x, const Vec<T, 2>& v) const {
    using std::sqrt;
    return sqrt(bilinear(a(x), v, v));
  }
};

template <class AField, class BField>
struct RandersMetric {
  AField a;
  BField b;
  template <class T>
  T operator()(const Vec<T, 2>& x, const Vec<T, 2>& v) const {
    using std::sqrt;
    return sqrt(bilinear(a(x), v, v)) + dot(b(x), v);
  }
};

template <class AField>
RiemannianMetric<AField> riemannian_metric(AField a) {
  return {std::move(a)};
}

template <class AField, class BField>
RandersMetric<AField, BField> randers_metric(AField a, BField b) {
  return {std::move(a), std::move(b)};
}

inline FinslerChart euclidean_chart(ChartDomain dom = BoxDomain{{-10.0, -10.0}, {10.0, 10.0}}, Vec2 p = {0.0, 0.0}) {
  return FinslerChart(ConstantNormMetric{Norm2::euclidean()}, dom, p, true, "euclidean");
}

inline FinslerChart constant_randers_chart(const Mat2& A, const Vec2& b,
                                           ChartDomain dom = BoxDomain{{-10.0, -10.0}, {10.0, 10.0}},
                                           Vec2 p = {0.0, 0.0}) {
  Norm2 n = Norm2::randers(A, b);
  return FinslerChart(ConstantNormMetric{n}, dom, p, b[0] == 0.0 && b[1] == 0.0, "randers_const");
}

inline FinslerChart riemannian_chart(const Mat2& A, double k = 0.0,
                                     ChartDomain dom = BoxDomain{{-10.0, -10.0}, {10.0, 10.0}},
                                     Vec2 p = {0.0, 0.0}) {
  Norm2::riemannian(A);  // validates A
  return FinslerChart(riemannian_metric(ConformalMatrixField{A, k}), dom, p, true, "riemannian");
}

// Randers chart with b(x) = b0 + B x. The caller keeps |b(x)|_A < 1 on the
// domain; the constructor checks this on a sample of the domain's bounding box.
inline FinslerChart linear_randers_chart(const Mat2& A, const Vec2& b0, const Mat2& B, const DiskDomain& dom,
                                         Vec2 p = {0.0, 0.0}) {
  LinearCovectorField bf{b0, B};
  for (int i = 0; i <= 16; ++i) {
    for (int j = 0; j <= 16; ++j) {
      Vec2 x{dom.center[0] + dom.radius * (i / 8.0 - 1.0), dom.center[1] + dom.radius * (j / 8.0 - 1.0)};
      if (!domain_contains(dom, x)) continue;
      Norm2::randers(A, bf(x));  // throws StrongConvexityViolated
    }
  }
  return FinslerChart(randers_metric(ConstantMatrixField{A}, bf), dom, p, false, "randers_linear");
}

}  // namespace ftct
