#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "eil/errors.hpp"

namespace eil {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2 operator*(double k) const { return {k * x, k * y}; }
  Vec2 operator/(double k) const { return {x / k, y / k}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
};

inline Vec2 operator*(double k, Vec2 v) { return v * k; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Determinant [a, b] of the 2x2 matrix with columns a, b.
inline double bracket(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Rotation of v by +90 degrees; dot(perp(a), b) == bracket(a, b).
inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

inline double norm2(Vec2 v) { return v.x * v.x + v.y * v.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

/// Real cube root with sign: signed_cbrt(-8) == -2.
inline double signed_cbrt(double x) { return std::cbrt(x); }

struct Mat2 {
  // row-major: [[a, b], [c, d]]
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  double det() const { return a * d - b * c; }
  Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

  Mat2 inverse() const {
    const double dt = det();
    if (dt == 0.0) throw SingularMapError("Mat2::inverse: zero determinant");
    return {d / dt, -b / dt, -c / dt, a / dt};
  }

  static Mat2 rotation(double angle) {
    const double cs = std::cos(angle), sn = std::sin(angle);
    return {cs, -sn, sn, cs};
  }
};

/// Invertible affine map x |-> L x + v. Vectors (derivatives) see only L.
struct AffineMap {
  Mat2 linear;
  Vec2 translation;

  Vec2 apply_point(Vec2 p) const { return linear.apply(p) + translation; }
  Vec2 apply_vector(Vec2 v) const { return linear.apply(v); }

  AffineMap inverse() const {
    const Mat2 inv = linear.inverse();
    return {inv, -inv.apply(translation)};
  }
};

/// Line F(x, y) = l1*x + l2*y + l3 = 0. Direction vector is (-l2, l1).
struct LineEq {
  double l1 = 0.0, l2 = 0.0, l3 = 0.0;

  double eval(Vec2 p) const { return l1 * p.x + l2 * p.y + l3; }

  /// Same line scaled so that l1^2 + l2^2 = 1.
  LineEq normalized() const {
    const double n = std::hypot(l1, l2);
    if (n == 0.0) throw DegenerateLineError("LineEq::normalized: zero normal");
    return {l1 / n, l2 / n, l3 / n};
  }

  /// Line through p with direction dir.
  static LineEq through(Vec2 p, Vec2 dir) {
    const Vec2 n = perp(dir);
    return {n.x, n.y, -dot(n, p)};
  }
};

/// Intersection of two lines; throws ConsecutiveParallel when near-parallel.
inline Vec2 intersect(const LineEq& a, const LineEq& b) {
  const double den = a.l1 * b.l2 - a.l2 * b.l1;
  const double sc = std::hypot(a.l1, a.l2) * std::hypot(b.l1, b.l2);
  if (std::abs(den) < 1e-14 * sc)
    throw ConsecutiveParallel("intersect: lines nearly parallel");
  return {(a.l2 * b.l3 - a.l3 * b.l2) / den, (a.l3 * b.l1 - a.l1 * b.l3) / den};
}

struct BBox {
  Vec2 lo{std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec2 hi{-std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void add(Vec2 p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  bool empty() const { return lo.x > hi.x; }
  double diag() const { return empty() ? 0.0 : dist(lo, hi); }
};

inline BBox bounding_box(std::span<const Vec2> pts) {
  BBox b;
  for (const Vec2& p : pts) b.add(p);
  return b;
}

/// Distance from p to the segment [a, b].
inline double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = norm2(ab);
  if (len2 == 0.0) return dist(p, a);
  const double u = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return dist(p, a + u * ab);
}

/// Distance from p to a polyline (vertex list, consecutive segments).
inline double dist_point_polyline(Vec2 p, std::span<const Vec2> poly) {
  if (poly.empty()) return std::numeric_limits<double>::infinity();
  if (poly.size() == 1) return dist(p, poly[0]);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < poly.size(); ++i)
    best = std::min(best, dist_point_segment(p, poly[i], poly[i + 1]));
  return best;
}

/// One-sided Hausdorff: sup over vertices of a of the distance to polyline b.
inline double hausdorff_directed(std::span<const Vec2> a,
                                 std::span<const Vec2> b) {
  double worst = 0.0;
  for (const Vec2& p : a) worst = std::max(worst, dist_point_polyline(p, b));
  return worst;
}

inline double hausdorff(std::span<const Vec2> a, std::span<const Vec2> b) {
  return std::max(hausdorff_directed(a, b), hausdorff_directed(b, a));
}

/// Minimum vertex-to-vertex distance between two point sets; +inf when empty.
inline double min_distance(std::span<const Vec2> a, std::span<const Vec2> b) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& p : a)
    for (const Vec2& q : b) best = std::min(best, dist(p, q));
  return best;
}

}  // namespace eil
