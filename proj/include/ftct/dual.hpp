#pragma once

// Forward-mode dual numbers. Nesting Dual<Dual<double>> gives mixed second
// derivatives; the geometry code nests up to four levels.

#include <array>
#include <cmath>
#include <type_traits>

namespace ftct {

template <class T>
struct Dual {
  T val{};
  T eps{};

  constexpr Dual() = default;
  constexpr Dual(double c) : val(c), eps(0.0) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(T v, T e) : val(v), eps(e) {}
};

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

template <class T>
struct dual_depth : std::integral_constant<int, 0> {};
template <class T>
struct dual_depth<Dual<T>> : std::integral_constant<int, 1 + dual_depth<T>::value> {};

template <class T>
inline constexpr int dual_depth_v = dual_depth<T>::value;

inline constexpr double value_of(double x) { return x; }
template <class T>
constexpr double value_of(const Dual<T>& x) {
  return value_of(x.val);
}

// ---- arithmetic -----------------------------------------------------------

template <class T>
constexpr Dual<T> operator+(const Dual<T>& a) {
  return a;
}
template <class T>
constexpr Dual<T> operator-(const Dual<T>& a) {
  return {-a.val, -a.eps};
}

template <class T>
constexpr Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.val + b.val, a.eps + b.eps};
}
template <class T>
constexpr Dual<T> operator+(const Dual<T>& a, double b) {
  return {a.val + b, a.eps};
}
template <class T>
constexpr Dual<T> operator+(double a, const Dual<T>& b) {
  return {a + b.val, b.eps};
}

template <class T>
constexpr Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return {a.val - b.val, a.eps - b.eps};
}
template <class T>
constexpr Dual<T> operator-(const Dual<T>& a, double b) {
  return {a.val - b, a.eps};
}
template <class T>
constexpr Dual<T> operator-(double a, const Dual<T>& b) {
  return {a - b.val, -b.eps};
}

template <class T>
constexpr Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.val * b.val, a.val * b.eps + a.eps * b.val};
}
template <class T>
constexpr Dual<T> operator*(const Dual<T>& a, double b) {
  return {a.val * b, a.eps * b};
}
template <class T>
constexpr Dual<T> operator*(double a, const Dual<T>& b) {
  return {a * b.val, a * b.eps};
}

template <class T>
constexpr Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T inv = 1.0 / b.val;
  T q = a.val * inv;
  return {q, (a.eps - q * b.eps) * inv};
}
template <class T>
constexpr Dual<T> operator/(const Dual<T>& a, double b) {
  return {a.val / b, a.eps / b};
}
template <class T>
constexpr Dual<T> operator/(double a, const Dual<T>& b) {
  T inv = 1.0 / b.val;
  T q = a * inv;
  return {q, -q * b.eps * inv};
}

template <class T, class U>
constexpr Dual<T>& operator+=(Dual<T>& a, const U& b) {
  return a = a + b;
}
template <class T, class U>
constexpr Dual<T>& operator-=(Dual<T>& a, const U& b) {
  return a = a - b;
}
template <class T, class U>
constexpr Dual<T>& operator*=(Dual<T>& a, const U& b) {
  return a = a * b;
}
template <class T, class U>
constexpr Dual<T>& operator/=(Dual<T>& a, const U& b) {
  return a = a / b;
}

// ---- elementary functions -------------------------------------------------
// Each overload applies the chain rule one level down; `using std::f` lets the
// inner call resolve to std:: for double and back here for nested duals.

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  T s = sqrt(a.val);
  return {s, a.eps / (2.0 * s)};
}

template <class T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  T e = exp(a.val);
  return {e, e * a.eps};
}

template <class T>
Dual<T> log(const Dual<T>& a) {
  using std::log;
  return {log(a.val), a.eps / a.val};
}

template <class T>
Dual<T> sin(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {sin(a.val), cos(a.val) * a.eps};
}

template <class T>
Dual<T> cos(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {cos(a.val), -(sin(a.val) * a.eps)};
}

template <class T>
Dual<T> sinh(const Dual<T>& a) {
  using std::cosh;
  using std::sinh;
  return {sinh(a.val), cosh(a.val) * a.eps};
}

template <class T>
Dual<T> cosh(const Dual<T>& a) {
  using std::cosh;
  using std::sinh;
  return {cosh(a.val), sinh(a.val) * a.eps};
}

template <class T>
Dual<T> tanh(const Dual<T>& a) {
  using std::tanh;
  T th = tanh(a.val);
  return {th, (1.0 - th * th) * a.eps};
}

template <class T>
Dual<T> atan(const Dual<T>& a) {
  using std::atan;
  return {atan(a.val), a.eps / (1.0 + a.val * a.val)};
}

template <class T>
Dual<T> pow(const Dual<T>& a, double p) {
  using std::pow;
  T base = pow(a.val, p - 1.0);
  return {base * a.val, p * base * a.eps};
}

// Scalar ladder used by type-erased evaluators: depth k = k nested duals.
using D0 = double;
using D1 = Dual<D0>;
using D2 = Dual<D1>;
using D3 = Dual<D2>;
using D4 = Dual<D3>;

inline constexpr int kMaxDualDepth = 4;

// Lifts a plain double to any scalar of the ladder as a constant.
template <class T>
constexpr T constant(double c) {
  return T(c);
}

// Derivatives f, f', ..., f^(k) of a univariate templated callable at t,
// computed by nesting k dual levels. Returns an array of size K+1.
template <int K, class Fn>
auto univariate_jet(const Fn& fn, double t);

namespace detail {

// Seeds x + eps at every nesting level: x + e1 + e2 + ... so that the
// eps^k coefficient (all eps parts) is the k-th derivative.
template <int K>
struct SeededType {
  using type = Dual<typename SeededType<K - 1>::type>;
};
template <>
struct SeededType<0> {
  using type = double;
};

template <int K>
typename SeededType<K>::type seed_all(double x) {
  if constexpr (K == 0) {
    return x;
  } else {
    using Inner = typename SeededType<K - 1>::type;
    return {seed_all<K - 1>(x), Inner(1.0)};
  }
}

// Extracts the derivative of order `order` from a fully-seeded result. The
// pure eps_1...eps_k coefficient along one branch gives f^(k).
template <class T>
double extract(const T& r, int order) {
  if constexpr (std::is_same_v<T, double>) {
    return r;
  } else {
    if (order == 0) return value_of(r);
    // d/deps_outer lives in r.eps; recurse with order-1 on the outer eps
    // component, which holds the derivative series of the inner levels.
    return extract(r.eps, order - 1);
  }
}

}  // namespace detail

template <int K, class Fn>
auto univariate_jet(const Fn& fn, double t) {
  std::array<double, K + 1> out{};
  auto x = detail::seed_all<K>(t);
  auto r = fn(x);
  for (int k = 0; k <= K; ++k) out[k] = detail::extract(r, k);
  return out;
}

}  // namespace ftct
