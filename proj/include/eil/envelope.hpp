#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "eil/affine_invariants.hpp"
#include "eil/curve.hpp"
#include "eil/errors.hpp"
#include "eil/geometry.hpp"
#include "eil/pair_locus.hpp"

namespace eil {

enum class EnvelopeTag { AEIL, IPTL, CTL, EVOLUTE };

inline const char* to_string(EnvelopeTag t) {
  switch (t) {
    case EnvelopeTag::AEIL: return "AEIL";
    case EnvelopeTag::IPTL: return "IPTL";
    case EnvelopeTag::CTL: return "CTL";
    case EnvelopeTag::EVOLUTE: return "EVOLUTE";
  }
  return "?";
}

enum class SingClass { Regular, OrdinaryCusp, Cusp34, Degenerate };

inline const char* to_string(SingClass k) {
  switch (k) {
    case SingClass::Regular: return "Regular";
    case SingClass::OrdinaryCusp: return "OrdinaryCusp";
    case SingClass::Cusp34: return "Cusp34";
    case SingClass::Degenerate: return "Degenerate";
  }
  return "?";
}

struct CuspMarker {
  std::size_t index = 0;
  SingClass klass = SingClass::Degenerate;
};

struct EnvelopePoint {
  Vec2 X;
  double t = 0.0, s = 0.0;
  double alpha = 0.5;
  EnvelopeTag tag = EnvelopeTag::AEIL;
};

/// Ordered polyline of envelope points; consecutive source pairs are
/// adjacent on the pair branch it was built from.
struct EnvelopeBranch {
  EnvelopeTag tag = EnvelopeTag::AEIL;
  int branch_id = 0;
  bool closed = false;
  std::vector<EnvelopePoint> points;
  std::vector<CuspMarker> cusp_markers;
  std::vector<double> online_residual;  // |F_hat(X)| per point
  std::vector<double> detm_residual;    // |det M| per point (0 for CTL)
  double oracle_max_gap = 0.0;          // consecutive-intersection cross-check

  std::vector<Vec2> positions() const {
    std::vector<Vec2> p;
    p.reserve(points.size());
    for (const auto& q : points) p.push_back(q.X);
    return p;
  }
};

// ---------------------------------------------------------------------------
// Intermediate lines

/// Bilinear conormal form of the intermediate-line equation:
/// F(X) = (1-a) nu2(C) nu1(X - M) + a nu1(C) nu2(X - M).
/// Smooth in (t, s) away from inflections, including across parallel pairs;
/// degenerates only at t = s.
inline LineEq intermediate_line_raw(const CurveJet& j1, const CurveJet& j2,
                                    double alpha) {
  const ConormalCovector nu1 = conormal(j1), nu2 = conormal(j2);
  const Vec2 C = j2.x - j1.x;
  const Vec2 M = (1.0 - alpha) * j1.x + alpha * j2.x;
  const Vec2 n = (1.0 - alpha) * nu2(C) * nu1.n + alpha * nu1(C) * nu2.n;
  return {n.x, n.y, -dot(n, M)};
}

/// The intermediate line of a pair, by geometric case:
/// (i) transversal tangents: through M_alpha and the tangent intersection,
/// (ii) parallel tangents: through M_alpha, parallel to them,
/// (iii) t = s: the tangent line (alpha != 1/2) or the affine normal line.
inline LineEq intermediate_line(const ParamCurve& c1, double t,
                                const ParamCurve& c2, double s, double alpha,
                                double parallel_rel = 1e-9) {
  const CurveJet j1 = c1.eval(t), j2 = c2.eval(s);
  if (norm(j2.x - j1.x) < 1e-14 * std::max(1.0, norm(j1.x))) {
    if (alpha == 0.5) {
      const AffineFrame f = affine_frame(j1);
      return LineEq::through(j1.x, f.normal_affine);
    }
    return LineEq::through(j1.x, j1.d1);
  }
  const Vec2 M = (1.0 - alpha) * j1.x + alpha * j2.x;
  if (std::abs(bracket(j1.d1, j2.d1)) < parallel_rel * norm(j1.d1) * norm(j2.d1))
    return LineEq::through(M, j1.d1);
  return intermediate_line_raw(j1, j2, alpha);
}

inline LineEq intermediate_line(const ParamCurve& c, double t, double s,
                                double alpha) {
  return intermediate_line(c, t, c, s, alpha);
}

// ---------------------------------------------------------------------------
// Envelope point formulas (two independent routes)

namespace detail {

inline void check_pairing(const CurveJet& j1, const CurveJet& j2,
                          const AlphaParam& a, double tol) {
  const double g = pairing_residual(j1, j2, a);
  const double scale =
      std::abs(conormal(j1)(j2.x - j1.x)) +
      a.alpha * std::abs(conormal(j2)(j2.x - j1.x)) + 1e-30;
  if (std::abs(g) > tol * std::max(1.0, scale))
    throw PairingViolated("envelope point: pairing residual " +
                          std::to_string(g) + " above tolerance");
}

}  // namespace detail

/// Envelope point from the closed-form solution of F = F_s = F_t = 0:
/// X - M = a nu1(C) / (a nu2(g1') nu1(C) + b nu2(C)^2)
///         * ((1-a) nu2(C) g1' - a nu1(C) nu2(g1') / nu1(g2') g2').
inline EnvelopePoint envelope_point_closed_form(const ParamCurve& c1, double t,
                                                const ParamCurve& c2, double s,
                                                const AlphaParam& a,
                                                double pairing_tol = 1e-6) {
  const CurveJet j1 = c1.eval(t), j2 = c2.eval(s);
  const double cross = bracket(j1.d1, j2.d1);
  if (std::abs(cross) < 1e-12 * norm(j1.d1) * norm(j2.d1))
    throw ParallelTangentsError("envelope_point_closed_form: parallel pair");
  detail::check_pairing(j1, j2, a, pairing_tol);

  const ConormalCovector nu1 = conormal(j1), nu2 = conormal(j2);
  const ConormalCovector dnu1 = conormal_derivative(j1);
  const Vec2 C = j2.x - j1.x;
  const double b = dnu1(j1.d1) / nu2(j1.d1);
  const double n1C = nu1(C), n2C = nu2(C);
  const double den = a.alpha * nu2(j1.d1) * n1C + b * n2C * n2C;
  const Vec2 dir = (1.0 - a.alpha) * n2C * j1.d1 -
                   (a.alpha * n1C * nu2(j1.d1) / nu1(j2.d1)) * j2.d1;
  const double num_scale = std::abs(a.alpha * n1C) * norm(dir);
  if (std::abs(den) < 1e-12 * std::max(num_scale, 1e-30))
    throw DenominatorDegenerate("envelope_point_closed_form: point at infinity");
  const Vec2 M = (1.0 - a.alpha) * j1.x + a.alpha * j2.x;
  return {M + (a.alpha * n1C / den) * dir, t, s, a.alpha, EnvelopeTag::AEIL};
}

inline EnvelopePoint envelope_point_closed_form(const ParamCurve& c, double t,
                                                double s, const AlphaParam& a,
                                                double pairing_tol = 1e-6) {
  return envelope_point_closed_form(c, t, c, s, a, pairing_tol);
}

/// Second route, in affine-arc-length tangents g_i' = d1_i / cbrt(kappa_i):
/// X - M = a l [g2', C][g2', g1'] / (a l [g2', g1']^2 + [g2', C])
///         * ((1-a) g1' - a l g2').
inline EnvelopePoint envelope_point_affine_form(const ParamCurve& c1, double t,
                                                const ParamCurve& c2, double s,
                                                const AlphaParam& a,
                                                double pairing_tol = 1e-6) {
  const CurveJet j1 = c1.eval(t), j2 = c2.eval(s);
  detail::check_pairing(j1, j2, a, pairing_tol);
  const double k1 = bracket_curvature(j1), k2 = bracket_curvature(j2);
  if (std::abs(k1) < inflection_threshold(j1) ||
      std::abs(k2) < inflection_threshold(j2))
    throw InflectionError("envelope_point_affine_form: inflectional jet");
  const Vec2 g1 = j1.d1 / signed_cbrt(k1);
  const Vec2 g2 = j2.d1 / signed_cbrt(k2);
  const Vec2 C = j2.x - j1.x;
  const double g2C = bracket(g2, C), g21 = bracket(g2, g1);
  const double den = a.alpha * a.lambda * g21 * g21 + g2C;
  const Vec2 dir = (1.0 - a.alpha) * g1 - (a.alpha * a.lambda) * g2;
  const double num_scale = std::abs(a.alpha * a.lambda * g2C * g21) * norm(dir);
  if (std::abs(den) < 1e-12 * std::max(num_scale, 1e-30))
    throw DenominatorDegenerate("envelope_point_affine_form: point at infinity");
  const Vec2 M = (1.0 - a.alpha) * j1.x + a.alpha * j2.x;
  return {M + (a.alpha * a.lambda * g2C * g21 / den) * dir, t, s, a.alpha,
          EnvelopeTag::AEIL};
}

inline EnvelopePoint envelope_point_affine_form(const ParamCurve& c, double t,
                                                double s, const AlphaParam& a,
                                                double pairing_tol = 1e-6) {
  return envelope_point_affine_form(c, t, c, s, a, pairing_tol);
}

/// The alpha = 1/2 specialization (Affine Envelope Symmetry Set):
/// X - M = 1/2 [g2', g1 - g2][g1', g2'] / (-2 [g2', g1 - g2] + [g1', g2']^2)
///         * (g1' - g2').
inline Vec2 aess_point(const ParamCurve& c, double t, double s) {
  const CurveJet j1 = c.eval(t), j2 = c.eval(s);
  const Vec2 g1 = j1.d1 / signed_cbrt(bracket_curvature(j1));
  const Vec2 g2 = j2.d1 / signed_cbrt(bracket_curvature(j2));
  const double q = bracket(g2, j1.x - j2.x);
  const double r = bracket(g1, g2);
  const double den = -2.0 * q + r * r;
  if (std::abs(den) < 1e-30)
    throw DenominatorDegenerate("aess_point: point at infinity");
  const Vec2 M = 0.5 * (j1.x + j2.x);
  return M + (0.5 * q * r / den) * (g1 - g2);
}

/// IPTL point of a parallel pair: the intermediate point M_alpha itself.
inline EnvelopePoint iptl_point(const ParamCurve& c1, double t,
                                const ParamCurve& c2, double s,
                                const AlphaParam& a,
                                double parallel_rel = 1e-6) {
  const CurveJet j1 = c1.eval(t), j2 = c2.eval(s);
  if (std::abs(bracket(j1.d1, j2.d1)) > parallel_rel * norm(j1.d1) * norm(j2.d1))
    throw NotParallel("iptl_point: tangents not parallel");
  return {(1.0 - a.alpha) * j1.x + a.alpha * j2.x, t, s, a.alpha,
          EnvelopeTag::IPTL};
}

inline EnvelopePoint iptl_point(const ParamCurve& c, double t, double s,
                                const AlphaParam& a,
                                double parallel_rel = 1e-6) {
  return iptl_point(c, t, c, s, a, parallel_rel);
}

// ---------------------------------------------------------------------------
// Coincident-tangent component and the affine evolute

/// Affine evolute: centers of affine curvature gamma + xi / mu. The curve
/// escapes to infinity where mu -> 0 (affine inflections), so the polyline
/// is split there; every piece carries the EVOLUTE tag.
inline std::vector<EnvelopeBranch> affine_evolute(const ParamCurve& c,
                                                  int samples = 512,
                                                  double mu_cut = 1e-3) {
  std::vector<EnvelopeBranch> out;
  EnvelopeBranch b;
  b.tag = EnvelopeTag::EVOLUTE;
  auto flush = [&] {
    if (b.points.size() >= 2) out.push_back(std::move(b));
    b = EnvelopeBranch{};
    b.tag = EnvelopeTag::EVOLUTE;
  };
  double mu_prev = 0.0;
  bool have_prev = false;
  for (int i = 0; i < samples; ++i) {
    const double t = c.t0() + c.period() * i / samples;
    try {
      const CurveJet j = c.eval(t);
      const AffineFrame f = affine_frame(j);
      if (std::abs(f.mu) < mu_cut ||
          (have_prev && (f.mu > 0) != (mu_prev > 0))) {
        flush();
        if (std::abs(f.mu) < mu_cut) {
          have_prev = false;
          continue;
        }
      }
      mu_prev = f.mu;
      have_prev = true;
      b.points.push_back(
          {j.x + f.normal_affine / f.mu, t, t, 0.5, EnvelopeTag::EVOLUTE});
    } catch (const InflectionError&) {
      flush();
      have_prev = false;
      continue;
    }
  }
  flush();
  return out;
}

/// Coincident-point component: the curve itself for alpha != 1/2, the affine
/// evolute (possibly several pieces) for alpha = 1/2.
inline std::vector<EnvelopeBranch> ctl(const ParamCurve& c,
                                       const AlphaParam& a,
                                       int samples = 512) {
  if (a.alpha == 0.5) return affine_evolute(c, samples);
  EnvelopeBranch b;
  b.tag = EnvelopeTag::CTL;
  b.closed = c.closed();
  for (int i = 0; i < samples; ++i) {
    const double t = c.t0() + c.period() * i / samples;
    b.points.push_back({c.eval(t).x, t, t, a.alpha, EnvelopeTag::CTL});
  }
  return {b};
}

// ---------------------------------------------------------------------------
// Limit slope of the intermediate line in a local graph frame

/// Slope A(s, t) of the intermediate line in the frame rotated so that the
/// tangent at t is horizontal (hence non-vertical):
/// A = ((1-a) f'(t) (a f''(s))^{1/3} - a f'(s) ((1-a) f''(t))^{1/3})
///   / ((1-a) (a f''(s))^{1/3} - a ((1-a) f''(t))^{1/3}).
/// As s -> t this tends to f'(t) = 0 for alpha != 1/2 and to the slope of
/// the affine normal for alpha = 1/2.
inline double limit_slope(const ParamCurve& c, double t, double s,
                          const AlphaParam& a) {
  const CurveJet jt = c.eval(t);
  const Mat2 rot = Mat2::rotation(-std::atan2(jt.d1.y, jt.d1.x));
  auto graph = [&](const CurveJet& j, double& fp, double& fpp) {
    const Vec2 u1 = rot.apply(j.d1), u2 = rot.apply(j.d2);
    if (std::abs(u1.x) < 1e-12 * norm(u1))
      throw DomainError("limit_slope: curve not a graph in this frame");
    fp = u1.y / u1.x;
    fpp = (u2.y * u1.x - u1.y * u2.x) / (u1.x * u1.x * u1.x);
  };
  double fpt, fppt, fps, fpps;
  graph(jt, fpt, fppt);

  if (c.reduce(s) == c.reduce(t)) {
    if (a.alpha != 0.5) return fpt;  // tangent slope in the frame (zero)
    const AffineFrame f = affine_frame(jt);
    const Vec2 xi = rot.apply(f.normal_affine);
    if (std::abs(xi.x) < 1e-14 * norm(xi))
      throw DenominatorDegenerate("limit_slope: vertical affine normal");
    return xi.y / xi.x;
  }

  const CurveJet js = c.eval(s);
  graph(js, fps, fpps);
  if (std::abs(fppt) < 1e-14 || std::abs(fpps) < 1e-14)
    throw DenominatorDegenerate("limit_slope: f'' vanishes at a base point");
  const double cs = signed_cbrt(a.alpha * fpps);
  const double ct = signed_cbrt((1.0 - a.alpha) * fppt);
  const double den = (1.0 - a.alpha) * cs - a.alpha * ct;
  const double num = (1.0 - a.alpha) * fpt * cs - a.alpha * fps * ct;
  if (std::abs(den) < 1e-14 * (std::abs(cs) + std::abs(ct)))
    throw DenominatorDegenerate("limit_slope: denominator vanished");
  return num / den;
}

// ---------------------------------------------------------------------------
// Discriminant determinant cross-check

/// det of [[l1, l2, l3], [d/ds l], [d/dt l]] for the normalized line family;
/// zero exactly when F = F_s = F_t = 0 has a solution. Partials by central
/// differences.
inline double discriminant_check(const ParamCurve& c1, double t,
                                 const ParamCurve& c2, double s, double alpha,
                                 double h_rel = 1e-5) {
  const double h = h_rel * std::min(c1.period(), c2.period());
  auto line = [&](double tt, double ss) {
    return intermediate_line_raw(c1.eval(tt), c2.eval(ss), alpha).normalized();
  };
  const LineEq L = line(t, s);
  const LineEq Lsp = line(t, s + h), Lsm = line(t, s - h);
  const LineEq Ltp = line(t + h, s), Ltm = line(t - h, s);
  const double s1 = (Lsp.l1 - Lsm.l1) / (2 * h), s2 = (Lsp.l2 - Lsm.l2) / (2 * h),
               s3 = (Lsp.l3 - Lsm.l3) / (2 * h);
  const double t1 = (Ltp.l1 - Ltm.l1) / (2 * h), t2 = (Ltp.l2 - Ltm.l2) / (2 * h),
               t3 = (Ltp.l3 - Ltm.l3) / (2 * h);
  return L.l1 * (s2 * t3 - s3 * t2) - L.l2 * (s1 * t3 - s3 * t1) +
         L.l3 * (s1 * t2 - s2 * t1);
}

inline double discriminant_check(const ParamCurve& c, double t, double s,
                                 double alpha, double h_rel = 1e-5) {
  return discriminant_check(c, t, c, s, alpha, h_rel);
}

// ---------------------------------------------------------------------------
// Independent oracle: consecutive-line intersections

/// Point i is the intersection of line i and line i+1; converges to the
/// true envelope as the sampling step goes to zero. Near-parallel
/// consecutive lines yield nullopt (skipped with flag).
inline std::vector<std::optional<Vec2>> oracle_envelope(
    const std::vector<LineEq>& lines) {
  if (lines.size() < 2)
    throw ConfigError("oracle_envelope: need at least two lines");
  std::vector<std::optional<Vec2>> out;
  out.reserve(lines.size() - 1);
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    try {
      out.push_back(intersect(lines[i], lines[i + 1]));
    } catch (const ConsecutiveParallel&) {
      out.push_back(std::nullopt);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole-envelope assembly

struct BuildOptions {
  int grid_n = 256;
  int ctl_samples = 256;
  double pairing_tol = 1e-6;
  double online_tol = 1e-8;    // |F_hat(X)| <= online_tol * scale
  bool with_detm = true;
  TraceOptions trace;
};

struct BuildResult {
  std::vector<EnvelopeBranch> branches;
  double aeil_iptl_min_distance = std::numeric_limits<double>::infinity();
  std::vector<std::string> log;

  std::vector<const EnvelopeBranch*> tagged(EnvelopeTag tag) const {
    std::vector<const EnvelopeBranch*> v;
    for (const auto& b : branches)
      if (b.tag == tag) v.push_back(&b);
    return v;
  }
};

/// Max distance between a branch polyline and its consecutive-intersection
/// oracle polyline (both from the same source pairs).
inline double oracle_gap(const ParamCurve& curve, const EnvelopeBranch& b,
                         double alpha) {
  if (b.points.size() < 3) return 0.0;
  std::vector<LineEq> lines;
  lines.reserve(b.points.size());
  for (const auto& p : b.points)
    lines.push_back(intermediate_line(curve, p.t, curve, p.s, alpha));
  const auto oracle = oracle_envelope(lines);
  const auto poly = b.positions();
  double worst = 0.0;
  for (const auto& op : oracle)
    if (op) worst = std::max(worst, dist_point_polyline(*op, poly));
  return worst;
}

/// Assemble AEIL + IPTL + CTL for one alpha. Constituent failures are
/// logged per branch; they do not abort the build.
inline BuildResult build_envelope(const ParamCurve& curve, const AlphaParam& a,
                                  const BuildOptions& opt = {}) {
  if (!curve.closed()) throw ConfigError("build_envelope: curve must be closed");
  BuildResult res;
  int next_id = 0;

  auto finish_branch = [&](EnvelopeBranch& b) {
    if (b.points.size() < 2) return;
    for (const auto& p : b.points) {
      LineEq L = intermediate_line(curve, p.t, curve, p.s, a.alpha);
      b.online_residual.push_back(std::abs(L.normalized().eval(p.X)));
      const bool coincident = p.t == p.s;
      b.detm_residual.push_back(
          (opt.with_detm && !coincident)
              ? std::abs(discriminant_check(curve, p.t, p.s, a.alpha))
              : 0.0);
    }
    if (b.tag == EnvelopeTag::AEIL || b.tag == EnvelopeTag::IPTL)
      b.oracle_max_gap = oracle_gap(curve, b, a.alpha);
    b.branch_id = next_id++;
    res.branches.push_back(std::move(b));
  };

  // AEIL: transversal pairing locus -> closed-form envelope points
  try {
    const auto locus = trace_locus(curve, a, opt.grid_n, opt.trace);
    for (const auto& pb : locus) {
      EnvelopeBranch b;
      b.tag = EnvelopeTag::AEIL;
      b.closed = pb.closed;
      bool split = false;
      for (const auto& pr : pb.points) {
        try {
          b.points.push_back(envelope_point_closed_form(curve, pr.t, pr.s, a,
                                                        opt.pairing_tol));
        } catch (const DenominatorDegenerate&) {
          res.log.push_back("AEIL point at infinity near (t, s) = (" +
                            std::to_string(pr.t) + ", " + std::to_string(pr.s) +
                            "); branch split");
          split = true;
          b.closed = false;
          finish_branch(b);
          b = EnvelopeBranch{};
          b.tag = EnvelopeTag::AEIL;
        } catch (const Error& e) {
          res.log.push_back(std::string("AEIL point skipped: ") + e.what());
        }
      }
      if (split) b.closed = false;
      finish_branch(b);
    }
  } catch (const NoBranchFound& e) {
    res.log.push_back(std::string("AEIL: ") + e.what());
  } catch (const DegenerateResidual& e) {
    res.log.push_back(std::string("AEIL degenerate: ") + e.what());
  }

  // IPTL: parallel pairs -> intermediate points
  try {
    const PairBranch pb = parallel_pairs(curve, opt.grid_n, opt.trace);
    EnvelopeBranch b;
    b.tag = EnvelopeTag::IPTL;
    b.closed = pb.closed;
    for (const auto& pr : pb.points) {
      try {
        b.points.push_back(
            iptl_point(curve, pr.t, pr.s, a, opt.trace.parallel_rel));
      } catch (const NotParallel& e) {
        res.log.push_back(std::string("IPTL point skipped: ") + e.what());
      }
    }
    finish_branch(b);
  } catch (const NoBranchFound& e) {
    res.log.push_back(std::string("IPTL: ") + e.what());
  }

  // CTL / affine evolute
  for (EnvelopeBranch& b : ctl(curve, a, opt.ctl_samples)) finish_branch(b);

  // record the AEIL-IPTL proximity for disjointness reporting
  std::vector<Vec2> aeil, iptl;
  for (const auto& b : res.branches) {
    if (b.tag == EnvelopeTag::AEIL)
      for (const auto& p : b.points) aeil.push_back(p.X);
    if (b.tag == EnvelopeTag::IPTL)
      for (const auto& p : b.points) iptl.push_back(p.X);
  }
  res.aeil_iptl_min_distance = min_distance(aeil, iptl);
  if (a.alpha != 0.5 && !aeil.empty() && !iptl.empty() &&
      res.aeil_iptl_min_distance <= 0.0)
    res.log.push_back("warning: AEIL and IPTL touch at alpha != 1/2");

  (void)scale;
  return res;
}

/// Minimum distance between AEIL and IPTL polylines; +inf sentinel when
/// either set is absent.
inline double disjointness_report(const std::vector<EnvelopeBranch>& branches) {
  std::vector<Vec2> aeil, iptl;
  for (const auto& b : branches) {
    if (b.tag == EnvelopeTag::AEIL)
      for (const auto& p : b.points) aeil.push_back(p.X);
    if (b.tag == EnvelopeTag::IPTL)
      for (const auto& p : b.points) iptl.push_back(p.X);
  }
  return min_distance(aeil, iptl);
}

}  // namespace eil
