#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace ftct {

template <class T, std::size_t N>
using Vec = std::array<T, N>;
template <class T, std::size_t N>
using Mat = std::array<std::array<T, N>, N>;

using Vec2 = Vec<double, 2>;
using Mat2 = Mat<double, 2>;

template <class T, std::size_t N>
Vec<T, N> operator+(const Vec<T, N>& a, const Vec<T, N>& b) {
  Vec<T, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
  return r;
}
template <class T, std::size_t N>
Vec<T, N> operator-(const Vec<T, N>& a, const Vec<T, N>& b) {
  Vec<T, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
  return r;
}
template <class T, std::size_t N>
Vec<T, N> operator-(const Vec<T, N>& a) {
  Vec<T, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = -a[i];
  return r;
}
template <class T, std::size_t N>
Vec<T, N> operator*(double s, const Vec<T, N>& a) {
  Vec<T, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
  return r;
}
template <class T, std::size_t N>
Vec<T, N> operator*(const Vec<T, N>& a, double s) {
  return s * a;
}

template <class T, std::size_t N>
T dot(const Vec<T, N>& a, const Vec<T, N>& b) {
  T s = a[0] * b[0];
  for (std::size_t i = 1; i < N; ++i) s = s + a[i] * b[i];
  return s;
}

template <std::size_t N>
double norm2(const Vec<double, N>& a) {
  return std::sqrt(dot(a, a));
}

template <class T, std::size_t N>
Vec<T, N> matvec(const Mat<T, N>& m, const Vec<T, N>& v) {
  Vec<T, N> r;
  for (std::size_t i = 0; i < N; ++i) {
    r[i] = m[i][0] * v[0];
    for (std::size_t j = 1; j < N; ++j) r[i] = r[i] + m[i][j] * v[j];
  }
  return r;
}

// v^T m w
template <class T, std::size_t N>
T bilinear(const Mat<T, N>& m, const Vec<T, N>& v, const Vec<T, N>& w) {
  return dot(v, matvec(m, w));
}

template <class T>
T det2(const Mat<T, 2>& m) {
  return m[0][0] * m[1][1] - m[0][1] * m[1][0];
}

template <class T>
Mat<T, 2> inverse2(const Mat<T, 2>& m) {
  T d = det2(m);
  T id = 1.0 / d;
  return {{{m[1][1] * id, -(m[0][1] * id)}, {-(m[1][0] * id), m[0][0] * id}}};
}

template <class T, std::size_t N>
Vec<T, N> lift(const Vec<double, N>& a) {
  Vec<T, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = T(a[i]);
  return r;
}

template <class T, std::size_t N>
Mat<T, N> lift(const Mat<double, N>& a) {
  Mat<T, N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r[i][j] = T(a[i][j]);
  return r;
}

inline Mat2 identity2() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }

inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline double polar_angle(const Vec2& v) { return std::atan2(v[1], v[0]); }

// Smallest absolute difference of two angles, in [0, pi].
inline double angle_distance(double a, double b) {
  double d = std::remainder(a - b, 2.0 * M_PI);
  return std::abs(d);
}

}  // namespace ftct
