#pragma once

// Minkowski norms on a single tangent space.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <variant>

#include "ftct/dual.hpp"
#include "ftct/error.hpp"
#include "ftct/linalg.hpp"

namespace ftct {

enum class NormFamily { Euclidean, Riemannian, Randers, Custom };

inline constexpr double kZeroVectorThreshold = 1e-12;

namespace detail {

template <int N>
bool finite(const Vec<double, N>& v) {
  for (double c : v)
    if (!std::isfinite(c)) return false;
  return true;
}

template <int N>
bool symmetric_positive_definite(const Mat<double, N>& m, double rel_tol = 1e-12) {
  Eigen::Matrix<double, N, N> e;
  double scale = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      e(i, j) = m[i][j];
      scale = std::max(scale, std::abs(m[i][j]));
    }
  if (!(scale > 0.0)) return false;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      if (std::abs(m[i][j] - m[j][i]) > rel_tol * scale * 1e3) return false;
  Eigen::LLT<Eigen::Matrix<double, N, N>> llt(e);
  if (llt.info() != Eigen::Success) return false;
  // Reject numerically indefinite results: smallest pivot relative to scale.
  const auto& l = llt.matrixLLT();
  for (int i = 0; i < N; ++i) {
    double piv = l(i, i) * l(i, i);
    if (piv <= rel_tol * scale) return false;
  }
  return true;
}

template <int N>
Mat<double, N> inverse(const Mat<double, N>& m) {
  Eigen::Matrix<double, N, N> e;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) e(i, j) = m[i][j];
  Eigen::Matrix<double, N, N> inv = e.inverse();
  Mat<double, N> r;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) r[i][j] = inv(i, j);
  return r;
}

// Hessian of F^2/2 at v by nested duals.
template <int N, class Fn>
Mat<double, N> energy_hessian(const Fn& F, const Vec<double, N>& v) {
  Mat<double, N> g{};
  for (int a = 0; a < N; ++a)
    for (int b = a; b < N; ++b) {
      Vec<D2, N> z;
      for (int i = 0; i < N; ++i) z[i] = D2{D1{v[i], i == b ? 1.0 : 0.0}, D1{i == a ? 1.0 : 0.0, 0.0}};
      D2 f = F(z);
      D2 e = 0.5 * (f * f);
      g[a][b] = g[b][a] = e.eps.eps;
    }
  return g;
}

}  // namespace detail

// A strongly convex, positively homogeneous norm on R^N. Immutable value type.
template <int N>
class MinkowskiNorm {
 public:
  struct Euclidean {};
  struct Riemannian {
    Mat<double, N> A;
  };
  struct Randers {
    Mat<double, N> A;
    Vec<double, N> b;
  };
  struct Custom {
    std::string name;
    std::shared_ptr<const std::tuple<std::function<D0(const Vec<D0, N>&)>, std::function<D1(const Vec<D1, N>&)>,
                                     std::function<D2(const Vec<D2, N>&)>, std::function<D3(const Vec<D3, N>&)>,
                                     std::function<D4(const Vec<D4, N>&)>>>
        fns;
  };

  MinkowskiNorm() : rep_(Euclidean{}) {}

  static MinkowskiNorm euclidean() { return MinkowskiNorm(Euclidean{}); }

  static MinkowskiNorm riemannian(const Mat<double, N>& A) {
    if (!detail::symmetric_positive_definite<N>(A))
      fail(ErrorKind::StrongConvexityViolated, "Riemannian matrix is not symmetric positive definite");
    return MinkowskiNorm(Riemannian{A});
  }

  static MinkowskiNorm randers(const Mat<double, N>& A, const Vec<double, N>& b) {
    if (!detail::symmetric_positive_definite<N>(A))
      fail(ErrorKind::StrongConvexityViolated, "Randers matrix is not symmetric positive definite");
    if (!detail::finite<N>(b)) fail(ErrorKind::InvalidNorm, "Randers covector is not finite");
    double bn = std::sqrt(bilinear(detail::inverse<N>(A), b, b));
    if (!(bn < 1.0 - 1e-9)) fail(ErrorKind::InvalidNorm, "Randers covector has dual norm >= 1");
    return MinkowskiNorm(Randers{A, b});
  }

  // fn must be a generic callable T(const Vec<T,N>&) valid for every scalar of
  // the dual ladder D0..D4. Strong convexity is checked on demand by
  // fundamental_tensor, not at construction.
  template <class Fn>
  static MinkowskiNorm custom(Fn fn, std::string name = "custom") {
    auto t = std::make_shared<typename decltype(Custom::fns)::element_type>(
        [fn](const Vec<D0, N>& v) { return fn(v); }, [fn](const Vec<D1, N>& v) { return fn(v); },
        [fn](const Vec<D2, N>& v) { return fn(v); }, [fn](const Vec<D3, N>& v) { return fn(v); },
        [fn](const Vec<D4, N>& v) { return fn(v); });
    return MinkowskiNorm(Custom{std::move(name), std::move(t)});
  }

  NormFamily family() const {
    return std::visit(
        [](const auto& r) {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, Euclidean>) return NormFamily::Euclidean;
          else if constexpr (std::is_same_v<R, Riemannian>) return NormFamily::Riemannian;
          else if constexpr (std::is_same_v<R, Randers>) return NormFamily::Randers;
          else return NormFamily::Custom;
        },
        rep_);
  }

  bool reversible() const {
    NormFamily f = family();
    if (f == NormFamily::Randers) {
      const auto& r = std::get<Randers>(rep_);
      for (double c : r.b)
        if (c != 0.0) return false;
      return true;
    }
    return f != NormFamily::Custom;
  }

  // Generic evaluation for any scalar of the dual ladder; no validation.
  template <class T>
  T evaluate(const Vec<T, N>& v) const {
    return std::visit(
        [&](const auto& r) -> T {
          using R = std::decay_t<decltype(r)>;
          using std::sqrt;
          if constexpr (std::is_same_v<R, Euclidean>) {
            return sqrt(dot(v, v));
          } else if constexpr (std::is_same_v<R, Riemannian>) {
            return sqrt(bilinear(lift<T, N>(r.A), v, v));
          } else if constexpr (std::is_same_v<R, Randers>) {
            return sqrt(bilinear(lift<T, N>(r.A), v, v)) + dot(lift<T, N>(r.b), v);
          } else {
            constexpr int k = dual_depth_v<T>;
            static_assert(k <= kMaxDualDepth, "dual nesting too deep for Custom norm");
            return std::get<k>(*r.fns)(v);
          }
        },
        rep_);
  }

  // F(v). F(0) = 0 for every family.
  double operator()(const Vec<double, N>& v) const {
    if (!detail::finite<N>(v)) fail(ErrorKind::InvalidVector, "non-finite vector");
    bool zero = true;
    for (double c : v) zero = zero && c == 0.0;
    if (zero) return 0.0;
    return evaluate(v);
  }

  // g_ij(v) = 1/2 d^2(F^2)/dv^i dv^j.
  Mat<double, N> fundamental_tensor(const Vec<double, N>& v) const {
    if (!detail::finite<N>(v)) fail(ErrorKind::InvalidVector, "non-finite vector");
    if (norm2<N>(v) < kZeroVectorThreshold) fail(ErrorKind::NormNotSmoothAtZero, "fundamental tensor at zero vector");
    Mat<double, N> g = std::visit(
        [&](const auto& r) -> Mat<double, N> {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, Euclidean>) {
            Mat<double, N> id{};
            for (int i = 0; i < N; ++i) id[i][i] = 1.0;
            return id;
          } else if constexpr (std::is_same_v<R, Riemannian>) {
            return r.A;
          } else if constexpr (std::is_same_v<R, Randers>) {
            // g = (F/alpha)(A - l l^T) + (l + b)(l + b)^T with l = Av/alpha.
            Vec<double, N> Av = matvec(r.A, v);
            double alpha = std::sqrt(dot(v, Av));
            double F = alpha + dot(r.b, v);
            Vec<double, N> l = (1.0 / alpha) * Av;
            Mat<double, N> out;
            for (int i = 0; i < N; ++i)
              for (int j = 0; j < N; ++j)
                out[i][j] = (F / alpha) * (r.A[i][j] - l[i] * l[j]) + (l[i] + r.b[i]) * (l[j] + r.b[j]);
            return out;
          } else {
            return detail::energy_hessian<N>([&](const Vec<D2, N>& z) { return std::get<2>(*r.fns)(z); }, v);
          }
        },
        rep_);
    if (!detail::symmetric_positive_definite<N>(g))
      fail(ErrorKind::StrongConvexityViolated, "fundamental tensor is not positive definite");
    return g;
  }

  // g_v(a, b).
  double inner(const Vec<double, N>& v, const Vec<double, N>& a, const Vec<double, N>& b) const {
    return bilinear(fundamental_tensor(v), a, b);
  }

 private:
  using Rep = std::variant<Euclidean, Riemannian, Randers, Custom>;
  explicit MinkowskiNorm(Rep r) : rep_(std::move(r)) {}
  Rep rep_;
};

using Norm2 = MinkowskiNorm<2>;

}  // namespace ftct
