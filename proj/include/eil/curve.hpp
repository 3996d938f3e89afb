#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "eil/errors.hpp"
#include "eil/geometry.hpp"

namespace eil {

/// Position and derivatives up to order 4 of a plane curve at one parameter
/// value. `estimated` marks finite-difference jets (downstream tolerances
/// widen by 10x for those).
struct CurveJet {
  double t = 0.0;
  Vec2 x, d1, d2, d3, d4;
  bool estimated = false;

  bool regular(double tol = 1e-12) const { return norm(d1) > tol; }
};

/// Immutable smooth plane curve over [t0, t1] with a total jet evaluator.
/// Evaluators are pure and safe to call from multiple threads.
class ParamCurve {
 public:
  using Evaluator = std::function<CurveJet(double)>;

  ParamCurve(std::string label, double t0, double t1, bool closed,
             Evaluator eval)
      : label_(std::move(label)),
        t0_(t0),
        t1_(t1),
        closed_(closed),
        eval_(std::move(eval)) {
    if (!(t1_ > t0_)) throw ConfigError("ParamCurve: empty domain");
  }

  const std::string& label() const { return label_; }
  double t0() const { return t0_; }
  double t1() const { return t1_; }
  double period() const { return t1_ - t0_; }
  bool closed() const { return closed_; }

  /// Closed curves reduce t modulo the period into [t0, t1); open arcs
  /// reject parameters outside the domain (with a small tolerance).
  double reduce(double t) const {
    if (closed_) {
      double u = std::fmod(t - t0_, period());
      if (u < 0.0) u += period();
      return t0_ + u;
    }
    const double slack = 1e-9 * period();
    if (t < t0_ - slack || t > t1_ + slack)
      throw DomainError("parameter " + std::to_string(t) +
                        " outside open arc domain of " + label_);
    return std::clamp(t, t0_, t1_);
  }

  CurveJet eval(double t) const { return eval_(reduce(t)); }

  /// Bounding-box diagonal of n samples; the "curve scale" used by
  /// relative tolerances.
  double scale(int n = 64) const {
    BBox b;
    for (int i = 0; i < n; ++i)
      b.add(eval_(t0_ + period() * (i + 0.5) / n).x);
    return std::max(b.diag(), 1e-12);
  }

 private:
  std::string label_;
  double t0_, t1_;
  bool closed_;
  Evaluator eval_;
};

namespace detail {

/// Coefficients of f and its first four derivatives, f = sum c_k t^k.
inline std::array<std::vector<double>, 5> derivative_tables(
    std::vector<double> c) {
  std::array<std::vector<double>, 5> tab;
  tab[0] = std::move(c);
  for (int d = 1; d <= 4; ++d) {
    const auto& prev = tab[d - 1];
    std::vector<double> next;
    for (std::size_t k = 1; k < prev.size(); ++k)
      next.push_back(prev[k] * static_cast<double>(k));
    tab[d] = std::move(next);
  }
  return tab;
}

inline double horner(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * t + c[i];
  return v;
}

}  // namespace detail

/// Open arc (t, f(t)) where f is a polynomial given by monomial coefficients
/// c0 + c1 t + c2 t^2 + ...; derivatives are exact.
inline ParamCurve graph_arc(std::vector<double> coeffs, double t0 = -1.0,
                            double t1 = 1.0, std::string label = "graph_arc") {
  auto tab = std::make_shared<std::array<std::vector<double>, 5>>(
      detail::derivative_tables(std::move(coeffs)));
  auto eval = [tab](double t) {
    CurveJet j;
    j.t = t;
    j.x = {t, detail::horner((*tab)[0], t)};
    j.d1 = {1.0, detail::horner((*tab)[1], t)};
    j.d2 = {0.0, detail::horner((*tab)[2], t)};
    j.d3 = {0.0, detail::horner((*tab)[3], t)};
    j.d4 = {0.0, detail::horner((*tab)[4], t)};
    return j;
  };
  return ParamCurve(std::move(label), t0, t1, false, eval);
}

inline ParamCurve circle_curve(double r = 1.0) {
  if (!(r > 0.0)) throw ConfigError("circle: radius must be positive");
  auto eval = [r](double t) {
    const double c = std::cos(t), s = std::sin(t);
    CurveJet j;
    j.t = t;
    j.x = {r * c, r * s};
    j.d1 = {-r * s, r * c};
    j.d2 = {-r * c, -r * s};
    j.d3 = {r * s, -r * c};
    j.d4 = {r * c, r * s};
    return j;
  };
  return ParamCurve("circle", 0.0, 2.0 * std::numbers::pi, true, eval);
}

inline ParamCurve ellipse_curve(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw ConfigError("ellipse: axes must be positive");
  auto eval = [a, b](double t) {
    const double c = std::cos(t), s = std::sin(t);
    CurveJet j;
    j.t = t;
    j.x = {a * c, b * s};
    j.d1 = {-a * s, b * c};
    j.d2 = {-a * c, -b * s};
    j.d3 = {a * s, -b * c};
    j.d4 = {a * c, b * s};
    return j;
  };
  return ParamCurve("ellipse", 0.0, 2.0 * std::numbers::pi, true, eval);
}

/// gamma(t) = (0.1 cos(2 pi t) + cos(pi t), 0.1 sin(2 pi t + 1) + sin(pi t)),
/// a closed oval with period 2.
inline ParamCurve bean_curve() {
  constexpr double pi = std::numbers::pi;
  auto eval = [](double t) {
    const double w = 2.0 * pi * t, v = pi * t;
    CurveJet j;
    j.t = t;
    j.x = {0.1 * std::cos(w) + std::cos(v), 0.1 * std::sin(w + 1.0) + std::sin(v)};
    j.d1 = {-0.2 * pi * std::sin(w) - pi * std::sin(v),
            0.2 * pi * std::cos(w + 1.0) + pi * std::cos(v)};
    j.d2 = {-0.4 * pi * pi * std::cos(w) - pi * pi * std::cos(v),
            -0.4 * pi * pi * std::sin(w + 1.0) - pi * pi * std::sin(v)};
    j.d3 = {0.8 * pi * pi * pi * std::sin(w) + pi * pi * pi * std::sin(v),
            -0.8 * pi * pi * pi * std::cos(w + 1.0) - pi * pi * pi * std::cos(v)};
    j.d4 = {1.6 * pi * pi * pi * pi * std::cos(w) + pi * pi * pi * pi * std::cos(v),
            1.6 * pi * pi * pi * pi * std::sin(w + 1.0) + pi * pi * pi * pi * std::sin(v)};
    return j;
  };
  return ParamCurve("bean", 0.0, 2.0, true, eval);
}

inline ParamCurve parabola_arc(double t0 = -1.0, double t1 = 1.0) {
  return graph_arc({0.0, 0.0, 0.5}, t0, t1, "parabola_arc");
}

/// Local Monge graph y = sum_{k>=2} a_k t^k / k!, so a_k = f^(k)(0).
/// params = {a2, a3, a4, ...}.
inline ParamCurve monge_arc(const std::vector<double>& params,
                            double t0 = -1.0, double t1 = 1.0) {
  if (params.empty()) throw ConfigError("monge_arc: needs at least a2");
  std::vector<double> coeffs{0.0, 0.0};
  double fact = 2.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    coeffs.push_back(params[i] / fact);
    fact *= static_cast<double>(i + 3);
  }
  return graph_arc(std::move(coeffs), t0, t1, "monge_arc");
}

/// Named curve factory backing the curve-spec JSON interface.
inline ParamCurve builtin_curve(const std::string& name,
                                const std::vector<double>& params = {}) {
  if (name == "circle") return circle_curve(params.empty() ? 1.0 : params[0]);
  if (name == "ellipse") {
    if (params.size() < 2) throw ConfigError("ellipse: needs params [a, b]");
    return ellipse_curve(params[0], params[1]);
  }
  if (name == "bean") return bean_curve();
  if (name == "parabola_arc") {
    if (params.size() >= 2) return parabola_arc(params[0], params[1]);
    return parabola_arc();
  }
  if (name == "monge_arc") return monge_arc(params);
  throw ConfigError("unknown builtin curve: " + name);
}

/// Image curve under an invertible affine map: x -> L x + v, d_k -> L d_k.
inline ParamCurve transform(const ParamCurve& c, const AffineMap& map) {
  if (map.linear.det() == 0.0)
    throw SingularMapError("transform: singular linear part");
  auto eval = [c, map](double t) {
    CurveJet j = c.eval(t);
    j.x = map.apply_point(j.x);
    j.d1 = map.apply_vector(j.d1);
    j.d2 = map.apply_vector(j.d2);
    j.d3 = map.apply_vector(j.d3);
    j.d4 = map.apply_vector(j.d4);
    return j;
  };
  return ParamCurve(c.label(), c.t0(), c.t1(), c.closed(), eval);
}

/// Curve from (t, x, y) samples. Position comes from local polynomial
/// interpolation through the 6 nearest samples; derivative jets are 5-point
/// central differences of that interpolant and carry the `estimated` flag.
inline ParamCurve sampled_curve(std::vector<double> ts, std::vector<Vec2> xs,
                                bool closed, std::string label = "samples") {
  if (ts.size() != xs.size() || ts.size() < 6)
    throw ConfigError("sampled_curve: need >= 6 (t, x, y) samples");
  std::vector<std::size_t> order(ts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ts[a] < ts[b]; });
  auto t_sorted = std::make_shared<std::vector<double>>();
  auto x_sorted = std::make_shared<std::vector<Vec2>>();
  for (std::size_t i : order) {
    t_sorted->push_back(ts[i]);
    x_sorted->push_back(xs[i]);
  }
  const double t0 = t_sorted->front();
  double t1 = t_sorted->back();
  if (closed) t1 += (*t_sorted)[1] - (*t_sorted)[0];  // wrap step
  const double span = t1 - t0;

  // Lagrange interpolation through the 6 samples nearest to t (Neville).
  auto position = [t_sorted, x_sorted, closed, t0, span](double t) -> Vec2 {
    const auto& T = *t_sorted;
    const auto& X = *x_sorted;
    const std::size_t n = T.size();
    double u = t;
    if (closed) {
      u = std::fmod(t - t0, span);
      if (u < 0.0) u += span;
      u += t0;
    }
    auto it = std::lower_bound(T.begin(), T.end(), u);
    long k = it - T.begin();
    std::array<double, 6> tt;
    std::array<Vec2, 6> xx;
    for (int m = 0; m < 6; ++m) {
      long idx = k - 3 + m;
      double shift = 0.0;
      if (closed) {
        while (idx < 0) {
          idx += static_cast<long>(n);
          shift -= span;
        }
        while (idx >= static_cast<long>(n)) {
          idx -= static_cast<long>(n);
          shift += span;
        }
      } else {
        idx = std::clamp(idx, 0L, static_cast<long>(n) - 1);
      }
      tt[m] = T[static_cast<std::size_t>(idx)] + shift;
      xx[m] = X[static_cast<std::size_t>(idx)];
    }
    for (int lev = 1; lev < 6; ++lev)
      for (int i = 0; i < 6 - lev; ++i) {
        const double den = tt[i + lev] - tt[i];
        xx[i] = ((u - tt[i]) * xx[i + 1] + (tt[i + lev] - u) * xx[i]) / den;
      }
    return xx[0];
  };

  const double h = std::max(1e-4, span * 1e-5);
  auto eval = [position, h](double t) {
    const Vec2 f2m = position(t - 2 * h), f1m = position(t - h);
    const Vec2 f0 = position(t);
    const Vec2 f1 = position(t + h), f2 = position(t + 2 * h);
    CurveJet j;
    j.t = t;
    j.x = f0;
    j.d1 = (f2m - f2 + 8.0 * (f1 - f1m)) / (12.0 * h);
    j.d2 = (-f2 + 16.0 * f1 - 30.0 * f0 + 16.0 * f1m - f2m) / (12.0 * h * h);
    j.d3 = (f2 - 2.0 * f1 + 2.0 * f1m - f2m) / (2.0 * h * h * h);
    j.d4 = (f2 - 4.0 * f1 + 6.0 * f0 - 4.0 * f1m + f2m) / (h * h * h * h);
    j.estimated = true;
    return j;
  };
  return ParamCurve(std::move(label), t0, t1, closed, eval);
}

}  // namespace eil
