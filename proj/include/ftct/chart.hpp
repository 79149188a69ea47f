#pragma once

// Coordinate charts carrying a Finsler metric F(x, v).

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <variant>

#include "ftct/dual.hpp"
#include "ftct/error.hpp"
#include "ftct/linalg.hpp"
#include "ftct/norms.hpp"

namespace ftct {

struct BoxDomain {
  Vec2 lo{-1.0, -1.0};
  Vec2 hi{1.0, 1.0};
};
struct DiskDomain {
  Vec2 center{0.0, 0.0};
  double radius = 1.0;
};
// Polar chart (t, theta) with t in (t_lo, t_hi); theta is unrestricted.
struct PolarAnnulusDomain {
  double t_lo = 0.0;
  double t_hi = 1.0;
};

using ChartDomain = std::variant<BoxDomain, DiskDomain, PolarAnnulusDomain>;

inline bool domain_contains(const ChartDomain& d, const Vec2& x) {
  if (!std::isfinite(x[0]) || !std::isfinite(x[1])) return false;
  return std::visit(
      [&](const auto& dom) {
        using D = std::decay_t<decltype(dom)>;
        if constexpr (std::is_same_v<D, BoxDomain>) {
          return x[0] > dom.lo[0] && x[0] < dom.hi[0] && x[1] > dom.lo[1] && x[1] < dom.hi[1];
        } else if constexpr (std::is_same_v<D, DiskDomain>) {
          return norm2<2>(x - dom.center) < dom.radius;
        } else {
          return x[0] > dom.t_lo && x[0] < dom.t_hi;
        }
      },
      d);
}

namespace detail {

struct MetricErasure {
  virtual ~MetricErasure() = default;
  virtual D0 eval(const Vec<D0, 2>& x, const Vec<D0, 2>& v) const = 0;
  virtual D1 eval(const Vec<D1, 2>& x, const Vec<D1, 2>& v) const = 0;
  virtual D2 eval(const Vec<D2, 2>& x, const Vec<D2, 2>& v) const = 0;
  virtual D3 eval(const Vec<D3, 2>& x, const Vec<D3, 2>& v) const = 0;
  virtual D4 eval(const Vec<D4, 2>& x, const Vec<D4, 2>& v) const = 0;
};

template <class M>
struct MetricModel final : MetricErasure {
  explicit MetricModel(M m) : m(std::move(m)) {}
  D0 eval(const Vec<D0, 2>& x, const Vec<D0, 2>& v) const override { return m(x, v); }
  D1 eval(const Vec<D1, 2>& x, const Vec<D1, 2>& v) const override { return m(x, v); }
  D2 eval(const Vec<D2, 2>& x, const Vec<D2, 2>& v) const override { return m(x, v); }
  D3 eval(const Vec<D3, 2>& x, const Vec<D3, 2>& v) const override { return m(x, v); }
  D4 eval(const Vec<D4, 2>& x, const Vec<D4, 2>& v) const override { return m(x, v); }
  M m;
};

}  // namespace detail

// A 2D chart with metric F(x, v), a domain and a base point p. The metric is
// any callable with a templated call operator over the dual ladder; it is
// type-erased here so downstream code does not template on the family.
class FinslerChart {
 public:
  template <class Metric>
  FinslerChart(Metric metric, ChartDomain domain, Vec2 base_point, bool reversible = false,
               std::string name = "chart")
      : metric_(std::make_shared<detail::MetricModel<Metric>>(std::move(metric))),
        domain_(domain),
        base_(base_point),
        reversible_(reversible),
        name_(std::move(name)) {
    if (!contains(base_)) fail(ErrorKind::PreconditionFailed, "base point outside chart domain");
  }

  template <class T>
  T metric(const Vec<T, 2>& x, const Vec<T, 2>& v) const {
    static_assert(dual_depth_v<T> <= kMaxDualDepth, "dual nesting too deep");
    return metric_->eval(x, v);
  }

  double F(const Vec2& x, const Vec2& v) const {
    if (!detail::finite<2>(x) || !detail::finite<2>(v)) fail(ErrorKind::InvalidVector, "non-finite input");
    if (v[0] == 0.0 && v[1] == 0.0) return 0.0;
    return metric_->eval(x, v);
  }

  // Tangent norm F(x, .) as a MinkowskiNorm value.
  Norm2 norm_at(const Vec2& x) const {
    auto m = metric_;
    return Norm2::custom([m, x](const auto& v) {
      using T = std::decay_t<decltype(v[0])>;
      return m->eval(lift<T, 2>(x), v);
    });
  }

  Mat2 fundamental_tensor(const Vec2& x, const Vec2& v) const { return norm_at(x).fundamental_tensor(v); }

  bool contains(const Vec2& x) const { return domain_contains(domain_, x); }
  const ChartDomain& domain() const { return domain_; }
  const Vec2& base_point() const { return base_; }
  bool reversible() const { return reversible_; }
  const std::string& name() const { return name_; }

  FinslerChart with_base_point(const Vec2& p) const {
    FinslerChart c = *this;
    if (!c.contains(p)) fail(ErrorKind::PreconditionFailed, "base point outside chart domain");
    c.base_ = p;
    return c;
  }

 private:
  std::shared_ptr<const detail::MetricErasure> metric_;
  ChartDomain domain_;
  Vec2 base_;
  bool reversible_;
  std::string name_;
};

}  // namespace ftct
