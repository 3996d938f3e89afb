#pragma once

#include <cmath>

#include "eil/curve.hpp"
#include "eil/errors.hpp"
#include "eil/geometry.hpp"

namespace eil {

/// kappa = [gamma_t, gamma_tt]; the bracket itself, not normalized by |d1|^3.
inline double bracket_curvature(const CurveJet& j) { return bracket(j.d1, j.d2); }

/// |kappa| below this is treated as an inflection. Estimated jets widen it 10x.
inline double inflection_threshold(const CurveJet& j) {
  const double s = std::max(norm(j.d1), 1e-30);
  return (j.estimated ? 1e-8 : 1e-9) * s * s * s;
}

/// Affine-differential frame at a point: bracket curvature kappa and its
/// t-derivative, affine tangent gamma_s, affine normal xi, affine curvature mu.
struct AffineFrame {
  double t = 0.0;
  double kappa = 0.0;
  double kappa_t = 0.0;
  Vec2 tangent_affine;
  Vec2 normal_affine;
  double mu = 0.0;
};

inline AffineFrame affine_frame(const CurveJet& j) {
  if (!j.regular()) throw InflectionError("affine_frame: jet not regular");
  const double kappa = bracket_curvature(j);
  if (std::abs(kappa) < inflection_threshold(j))
    throw InflectionError("affine_frame: |kappa| below inflection threshold");
  const double kappa_t = bracket(j.d1, j.d3);
  const double kappa_tt = bracket(j.d1, j.d4) + bracket(j.d2, j.d3);
  const double cr = signed_cbrt(kappa);
  const double cr2 = cr * cr;

  AffineFrame f;
  f.t = j.t;
  f.kappa = kappa;
  f.kappa_t = kappa_t;
  f.tangent_affine = j.d1 / cr;
  // xi = kappa^{-2/3} gamma_tt - (1/3) kappa_t kappa^{-5/3} gamma_t
  f.normal_affine = j.d2 / cr2 - j.d1 * (kappa_t / (3.0 * cr2 * kappa));
  // mu = (1/9)(3 kappa kappa_tt - 5 kappa_t^2 + 9 kappa [d2, d3]) kappa^{-8/3}
  f.mu = (3.0 * kappa * kappa_tt - 5.0 * kappa_t * kappa_t +
          9.0 * kappa * bracket(j.d2, j.d3)) /
         (9.0 * cr2 * cr2 * cr2 * cr2);
  return f;
}

/// The conormal covector nu at a point: nu(tangent) = 0, nu(affine normal) = 1.
/// Acts on plane vectors through the dual pairing nu(U) = dot(n, U).
struct ConormalCovector {
  Vec2 n;
  double t = 0.0;

  double operator()(Vec2 U) const { return dot(n, U); }
};

/// nu(U) = [gamma_t, U] kappa^{-1/3}.
inline ConormalCovector conormal(const CurveJet& j) {
  if (!j.regular()) throw InflectionError("conormal: jet not regular");
  const double kappa = bracket_curvature(j);
  if (std::abs(kappa) < inflection_threshold(j))
    throw InflectionError("conormal: |kappa| below inflection threshold");
  return {perp(j.d1) / signed_cbrt(kappa), j.t};
}

/// d/dt of the conormal along the curve:
/// nu'(U) = [gamma_tt, U] kappa^{-1/3} - (1/3) kappa_t kappa^{-4/3} [gamma_t, U].
inline ConormalCovector conormal_derivative(const CurveJet& j) {
  if (!j.regular()) throw InflectionError("conormal_derivative: jet not regular");
  const double kappa = bracket_curvature(j);
  if (std::abs(kappa) < inflection_threshold(j))
    throw InflectionError("conormal_derivative: |kappa| below threshold");
  const double kappa_t = bracket(j.d1, j.d3);
  const double cr = signed_cbrt(kappa);
  const Vec2 n = perp(j.d2) / cr - perp(j.d1) * (kappa_t / (3.0 * cr * kappa));
  return {n, j.t};
}

/// Coefficients of nu1', nu2' in the dual basis {nu1, nu2}:
/// nu1' = a nu1 + b nu2, nu2' = a_bar nu1 + b_bar nu2.
struct ConormalDecomp {
  double a = 0.0, b = 0.0, a_bar = 0.0, b_bar = 0.0;
};

inline ConormalDecomp conormal_decomp(const CurveJet& j1, const CurveJet& j2) {
  const double cross = bracket(j1.d1, j2.d1);
  if (std::abs(cross) < 1e-9 * norm(j1.d1) * norm(j2.d1))
    throw ParallelTangentsError("conormal_decomp: tangents nearly parallel");
  const ConormalCovector nu1 = conormal(j1), nu2 = conormal(j2);
  const ConormalCovector dnu1 = conormal_derivative(j1);
  const ConormalCovector dnu2 = conormal_derivative(j2);
  ConormalDecomp d;
  d.a = dnu1(j2.d1) / nu1(j2.d1);
  d.b = dnu1(j1.d1) / nu2(j1.d1);
  d.a_bar = dnu2(j2.d1) / nu1(j2.d1);
  d.b_bar = dnu2(j1.d1) / nu2(j1.d1);
  return d;
}

}  // namespace eil
