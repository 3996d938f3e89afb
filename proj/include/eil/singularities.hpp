#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eil/curve.hpp"
#include "eil/envelope.hpp"
#include "eil/errors.hpp"
#include "eil/geometry.hpp"
#include "eil/pair_locus.hpp"

namespace eil {

// ---------------------------------------------------------------------------
// Local normal form of a curve pair

/// Coefficient tuple of the local normal form used by the analytic
/// classifiers: p1 = (t, t^2/2 + a3 t^3 + a4 t^4 + a5 t^5) and
/// p2 = (s, b0 + b1 s + ... + b5 s^5). With p1_inflection set, p1 becomes
/// (t, a3 t^3 + a4 t^4 + a5 t^5).
struct MongeJetPair {
  double a3 = 0.0, a4 = 0.0, a5 = 0.0;
  double b0 = 1.0, b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0, b5 = 0.0;
  double alpha = 0.5;
  bool p1_inflection = false;

  void validate() const {
    if (!(b0 > 0.0)) throw InvariantViolation("MongeJetPair: b0 must be > 0");
    if (!(alpha > 0.0) || !(alpha < 1.0))
      throw InvariantViolation("MongeJetPair: alpha must lie in (0, 1)");
  }

  /// Warnings for the classifier assumptions a3 > 0 and b1^2 - b0 > 0;
  /// violations are reported, not rejected.
  std::vector<std::string> assumption_report() const {
    std::vector<std::string> notes;
    if (!p1_inflection && !(a3 > 0.0))
      notes.push_back("assumption a3 > 0 does not hold");
    if (b1 != 0.0 && !(b1 * b1 - b0 > 0.0))
      notes.push_back("assumption b1^2 - b0 > 0 does not hold");
    return notes;
  }
};

/// Realize the two arcs of the normal form as polynomial graphs.
inline std::pair<ParamCurve, ParamCurve> monge_arcs(const MongeJetPair& m,
                                                    double halfwidth = 6.0) {
  m.validate();
  std::vector<double> c1 = m.p1_inflection
                               ? std::vector<double>{0, 0, 0, m.a3, m.a4, m.a5}
                               : std::vector<double>{0, 0, 0.5, m.a3, m.a4, m.a5};
  std::vector<double> c2{m.b0, m.b1, m.b2, m.b3, m.b4, m.b5};
  return {graph_arc(std::move(c1), -halfwidth, halfwidth, "p1"),
          graph_arc(std::move(c2), -halfwidth, halfwidth, "p2")};
}

struct SingularityVerdict {
  SingClass klass = SingClass::Regular;
  std::optional<bool> versal;
  std::vector<std::pair<std::string, double>> witness;

  double witness_value(const std::string& name) const {
    for (const auto& [k, v] : witness)
      if (k == name) return v;
    throw ConfigError("no witness named " + name);
  }
};

namespace detail {

inline bool nearly(double x, double scale, double tol = 1e-9) {
  return std::abs(x) < tol * std::max(1.0, scale);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Analytic classifiers

/// Transversal-tangent case. Requires the local solvability condition
/// b2 = (alpha - 1)/(2 alpha); the envelope branch through the pair is
/// regular unless b3 hits the critical value (then an ordinary cusp).
inline SingularityVerdict classify_nonparallel(const MongeJetPair& m) {
  m.validate();
  const double al = m.alpha;
  SingularityVerdict v;

  if (m.p1_inflection) {
    // p1 = (t, a3 t^3 + ...): solvability requires b2 = 0
    const double B00 = 16.0 * al * m.b0 * m.b0 * m.b0 * m.b2;
    if (!detail::nearly(m.b2, std::abs(m.b2) + 1.0))
      throw PreconditionViolated(
          "classify_nonparallel (inflection): b2 != 0, no local branch "
          "(B(0,0) = " + std::to_string(B00) + ")");
    v.witness.emplace_back("B00", B00);
    v.witness.emplace_back("b3", m.b3);
    v.klass = detail::nearly(m.b3, 1.0) ? SingClass::Degenerate
                                        : SingClass::Regular;
    return v;
  }

  const double solv = 2.0 * al * m.b2 - al + 1.0;
  const double B00 = 8.0 * solv * m.b0 * m.b0 * m.b0;
  if (!detail::nearly(solv, std::abs(m.b2) + 1.0))
    throw PreconditionViolated(
        "classify_nonparallel: b2 != (alpha-1)/(2 alpha), no local branch "
        "(B(0,0) = " + std::to_string(B00) + ")");
  v.witness.emplace_back("B00", B00);

  const double pole = al * m.b1 * m.b1 - m.b0;
  v.witness.emplace_back("alpha_pole", pole);
  if (detail::nearly(pole, m.b0 + m.b1 * m.b1)) {
    v.klass = SingClass::Degenerate;  // alpha = b0 / b1^2: branch at infinity
    return v;
  }

  const double num = -6.0 * al * m.a3 * m.b0 * m.b1 * m.b1 +
                     4.0 * al * m.a3 * m.b0 * m.b0 -
                     3.0 * al * m.b1 * m.b1 * m.b1 - 2.0 * m.a3 * m.b0 * m.b0;
  const double den = 2.0 * al * m.b0 *
                     (6.0 * al * m.a3 * m.b0 * m.b1 + 3.0 * al * m.b1 * m.b1 +
                      2.0 * al * m.b0 - m.b0);
  const double b3_crit = (al - 1.0) * num / den;
  const double w = m.b3 - b3_crit;
  v.witness.emplace_back("b3_critical", b3_crit);
  v.witness.emplace_back("b3_witness", w);
  v.klass = detail::nearly(w, std::abs(m.b3) + std::abs(b3_crit))
                ? SingClass::OrdinaryCusp
                : SingClass::Regular;
  return v;
}

/// Parallel-tangent case (b1 = 0): regular / ordinary cusp / (3,4)-cusp of
/// the IPTL at s = 0, decided by the b2, b3, b4 thresholds.
inline SingularityVerdict classify_parallel(const MongeJetPair& m) {
  m.validate();
  if (std::abs(m.b1) > 1e-12 * (1.0 + std::abs(m.b1)))
    throw PreconditionViolated("classify_parallel: b1 != 0 (tangents not parallel)");
  const double r = m.alpha / (m.alpha - 1.0);  // negative for alpha in (0,1)
  const double w2 = m.b2 - 0.5 * r;
  const double w3 = m.b3 - r * r * m.a3;
  const double w4 = m.b4 - r * r * r * m.a4;
  SingularityVerdict v;
  v.witness.emplace_back("b2_witness", w2);
  v.witness.emplace_back("b3_witness", w3);
  v.witness.emplace_back("b4_witness", w4);
  if (!detail::nearly(w2, std::abs(m.b2) + std::abs(r)))
    v.klass = SingClass::Regular;
  else if (!detail::nearly(w3, std::abs(m.b3) + std::abs(r * r * m.a3)))
    v.klass = SingClass::OrdinaryCusp;
  else if (!detail::nearly(w4, std::abs(m.b4) + std::abs(r * r * r * m.a4)))
    v.klass = SingClass::Cusp34;
  else
    v.klass = SingClass::Degenerate;
  return v;
}

struct ParallelInflectionVerdict {
  SingularityVerdict verdict;
  /// IPTL inflection order (1 or 2) mirroring p1's order; 0 when not
  /// reported (both points inflectional).
  int inflection_order = 0;
};

/// Parallel tangents with p1 (or both points) inflectional: the IPTL passes
/// through M_alpha = (0, alpha b0) and is regular for every alpha in (0,1).
inline ParallelInflectionVerdict classify_parallel_inflection(
    const MongeJetPair& m) {
  m.validate();
  if (!m.p1_inflection)
    throw PreconditionViolated("classify_parallel_inflection: p1_inflection not set");
  if (std::abs(m.b1) > 1e-12 * (1.0 + std::abs(m.b1)))
    throw PreconditionViolated("classify_parallel_inflection: b1 != 0");
  ParallelInflectionVerdict out;
  out.verdict.klass = SingClass::Regular;
  out.verdict.witness.emplace_back("m_alpha_y", m.alpha * m.b0);
  if (!detail::nearly(m.b2, 1.0)) {
    out.inflection_order = !detail::nearly(m.a3, 1.0)   ? 1
                           : !detail::nearly(m.a4, 1.0) ? 2
                                                        : 0;
    out.verdict.witness.emplace_back("iptl_cubic", m.a3 * (1.0 - m.alpha));
    out.verdict.witness.emplace_back(
        "iptl_quartic",
        (9.0 * m.alpha * m.a3 * m.a3 + 4.0 * m.a4 * m.b2 * (1.0 - m.alpha)) /
            m.b2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Numeric cusp scan on a sampled branch

struct ScanOptions {
  double deep_speed_ratio = 0.12;  ///< deep-minimum candidate threshold
  double d2_significant = 0.35;    ///< |d2| vs |d4| split: A2 path vs A3 path
  double angle_tol = 0.08;         ///< sine threshold for the bracket tests
  int margin = 3;                  ///< stencil margin from the branch ends
};

/// Mark and classify singular points of a sampled branch. Candidates are
/// speed minima with tangent reversal, plus deep isolated speed minima
/// (a (3,4)-cusp reverses no tangent). Classification uses index-parameter
/// finite differences: [d2, d3] != 0 -> ordinary cusp, else [d3, d4] != 0
/// -> (3,4)-cusp.
inline std::vector<CuspMarker> numeric_cusp_scan(const std::vector<Vec2>& pts,
                                                 const ScanOptions& opt = {}) {
  const std::size_t n = pts.size();
  std::vector<CuspMarker> markers;
  if (n < 7) return markers;

  const double scale = bounding_box(pts).diag();
  if (scale <= 0.0) return markers;
  std::vector<Vec2> P(n);
  for (std::size_t i = 0; i < n; ++i) P[i] = pts[i] / scale;

  std::vector<double> speed(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) speed[i] = 0.5 * dist(P[i + 1], P[i - 1]);

  std::vector<std::size_t> cand;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    // a join turning by more than 90 degrees, or a one-point straddle of it
    bool reversal = dot(P[i] - P[i - 1], P[i + 1] - P[i]) < 0.0;
    if (!reversal && i + 2 < n)
      reversal = dot(P[i] - P[i - 1], P[i + 2] - P[i + 1]) < 0.0 &&
                 speed[i] <= speed[i - 1] && speed[i] <= speed[i + 1];
    bool deep = false;
    if (i >= 3 && i + 3 < n && speed[i] <= speed[i - 1] &&
        speed[i] <= speed[i + 1])
      deep = speed[i] < opt.deep_speed_ratio * std::min(speed[i - 3], speed[i + 3]);
    if (reversal || deep) cand.push_back(i);
  }
  if (cand.empty()) return markers;

  // merge runs of adjacent candidates, keeping the slowest index
  std::vector<std::size_t> merged;
  for (std::size_t k = 0; k < cand.size();) {
    std::size_t j = k, best = cand[k];
    while (j + 1 < cand.size() && cand[j + 1] - cand[j] <= 2) {
      ++j;
      if (speed[cand[j]] < speed[best]) best = cand[j];
    }
    merged.push_back(best);
    k = j + 1;
  }
  for (std::size_t k = 0; k + 1 < merged.size(); ++k)
    if (merged[k + 1] - merged[k] < 2 * static_cast<std::size_t>(opt.margin))
      throw InsufficientResolution("numeric_cusp_scan: candidates not isolated");

  for (std::size_t i : merged) {
    if (i < static_cast<std::size_t>(opt.margin) + 2 ||
        i + static_cast<std::size_t>(opt.margin) + 2 >= n) {
      // no stencil room to classify; end regions of trimmed branches are
      // noisy, so candidates there are dropped rather than guessed at
      continue;
    }
    const Vec2 d2 = P[i + 1] - 2.0 * P[i] + P[i - 1];
    const Vec2 d3 = 0.5 * (P[i + 2] - 2.0 * P[i + 1] + 2.0 * P[i - 1] - P[i - 2]);
    const Vec2 d4 = P[i + 2] - 4.0 * P[i + 1] + 6.0 * P[i] - 4.0 * P[i - 1] + P[i - 2];
    CuspMarker mk;
    mk.index = i;
    if (norm(d2) > opt.d2_significant * norm(d4)) {
      mk.klass = std::abs(bracket(d2, d3)) > opt.angle_tol * norm(d2) * norm(d3)
                     ? SingClass::OrdinaryCusp
                     : SingClass::Degenerate;
    } else {
      mk.klass = std::abs(bracket(d3, d4)) > opt.angle_tol * norm(d3) * norm(d4)
                     ? SingClass::Cusp34
                     : SingClass::Degenerate;
    }
    markers.push_back(mk);
  }
  return markers;
}

inline std::vector<CuspMarker> numeric_cusp_scan(const EnvelopeBranch& b,
                                                 const ScanOptions& opt = {}) {
  return numeric_cusp_scan(b.positions(), opt);
}

/// Cusp scan for traced envelope branches. An envelope point moves along
/// its own line, X' = phi * d with d the line direction, so cusps are the
/// zeros of the scalar phi = <X_{i+1} - X_{i-1}, d_i>. Sign crossings of
/// phi are ordinary cusps; an even-order touch of zero (phi dips to ~0
/// without changing sign) is a (3,4)-cusp. The test is insensitive to the
/// uneven vertex spacing that marching squares produces.
inline std::vector<CuspMarker> scan_branch(const ParamCurve& curve,
                                           const EnvelopeBranch& b,
                                           double even_touch_rel = 1e-4) {
  const std::size_t n = b.points.size();
  std::vector<CuspMarker> out;
  if (n < 5) return out;
  const bool closed = b.closed;
  const std::size_t m = closed ? n : n - 2;  // phi samples
  if (m < 4) return out;

  std::vector<double> phi(m);
  std::vector<std::size_t> idx(m);
  Vec2 dprev{0, 0};
  for (std::size_t k = 0; k < m; ++k) {
    // keep the direction field continuous along the branch
    const std::size_t i = closed ? k : k + 1;
    const auto& p = b.points[i];
    const LineEq L = intermediate_line(curve, p.t, curve, p.s, p.alpha);
    Vec2 d{-L.l2, L.l1};
    d = d / std::max(norm(d), 1e-300);
    if (k > 0 && dot(d, dprev) < 0.0) d = -d;
    dprev = d;
    const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
    phi[k] = dot(b.points[ip].X - b.points[im].X, d);
    idx[k] = i;
  }

  double phi_max = 0.0;
  for (double v : phi) phi_max = std::max(phi_max, std::abs(v));
  if (phi_max == 0.0) return out;

  const std::size_t last = closed ? m : m - 1;
  for (std::size_t k = 0; k < last; ++k) {
    const std::size_t k1 = (k + 1) % m;
    if ((phi[k] >= 0.0) != (phi[k1] >= 0.0)) {
      const std::size_t pick =
          std::abs(phi[k]) <= std::abs(phi[k1]) ? idx[k] : idx[k1];
      if (out.empty() || out.back().index + 1 < pick)
        out.push_back({pick, SingClass::OrdinaryCusp});
    }
  }
  // even-order touches: |phi| locally minimal and far below the branch scale
  for (std::size_t k = 1; k + 1 < m; ++k) {
    if (std::abs(phi[k]) > even_touch_rel * phi_max) continue;
    if (std::abs(phi[k]) > std::abs(phi[k - 1]) ||
        std::abs(phi[k]) > std::abs(phi[k + 1])) continue;
    if ((phi[k - 1] >= 0.0) != (phi[k + 1] >= 0.0)) continue;  // a crossing
    bool near_existing = false;
    for (const auto& mk : out)
      if (idx[k] + 3 >= mk.index && mk.index + 3 >= idx[k]) near_existing = true;
    if (!near_existing) out.push_back({idx[k], SingClass::Cusp34});
  }
  std::sort(out.begin(), out.end(),
            [](const CuspMarker& a, const CuspMarker& b2) {
              return a.index < b2.index;
            });
  return out;
}

// ---------------------------------------------------------------------------
// Realized IPTL branches from the local normal form

/// Largest |s| for which the parallel-tangent relation t(s) of the
/// normal-form pair stays fold-free: both graph second derivatives must
/// keep their sign over the window (g'' roots bound the s side, f'' roots
/// bound the t side through t ~ 2 b2 s).
inline double parallel_window(const MongeJetPair& m, double requested) {
  auto first_root = [](double c0, double c1, double c2) {
    // smallest |x| with c0 + c1 x + c2 x^2 = 0
    if (c2 == 0.0) {
      if (c1 == 0.0) return std::numeric_limits<double>::infinity();
      return std::abs(c0 / c1);
    }
    const double disc = c1 * c1 - 4 * c2 * c0;
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    const double r1 = (-c1 + std::sqrt(disc)) / (2 * c2);
    const double r2 = (-c1 - std::sqrt(disc)) / (2 * c2);
    return std::min(std::abs(r1), std::abs(r2));
  };
  double w = requested;
  // g''(s) = 2 b2 + 6 b3 s + 12 b4 s^2
  w = std::min(w, 0.5 * first_root(2 * m.b2, 6 * m.b3, 12 * m.b4));
  // f''(t) = 1 + 6 a3 t + 12 a4 t^2 in t ~ 2 b2 s
  const double tstar = first_root(1.0, 6 * m.a3, 12 * m.a4);
  if (std::isfinite(tstar))
    w = std::min(w, 0.5 * tstar / std::max(std::abs(2 * m.b2), 0.25));
  return w;
}

/// Sample the IPTL of the two normal-form arcs uniformly in s over
/// [-window, window] (shrunk to stay inside the fold-free window of the
/// parallel relation); t(s) solves the relation by Newton continuation.
inline EnvelopeBranch realize_iptl(const MongeJetPair& m, double window = 0.35,
                                   int n = 281) {
  auto [p1, p2] = monge_arcs(m);
  const double w = parallel_window(m, window);
  EnvelopeBranch b;
  b.tag = EnvelopeTag::IPTL;
  double t_prev = 2.0 * m.b2 * (-w);
  for (int i = 0; i < n; ++i) {
    const double s = -w + 2.0 * w * i / (n - 1);
    double t;
    try {
      t = solve_parallel_t(p1, p2, s, t_prev);
    } catch (const Error&) {
      continue;
    }
    t_prev = t;
    const Vec2 X =
        (1.0 - m.alpha) * p1.eval(t).x + m.alpha * p2.eval(s).x;
    b.points.push_back({X, t, s, m.alpha, EnvelopeTag::IPTL});
  }
  return b;
}

/// Same construction parametrized by t, for the p1-inflection case where
/// s(t) ~ (3 a3 / 2 b2) t^2 is the well-conditioned direction.
inline EnvelopeBranch realize_iptl_inflection(const MongeJetPair& m,
                                              double window = 0.35,
                                              int n = 281) {
  auto [p1, p2] = monge_arcs(m);
  EnvelopeBranch b;
  b.tag = EnvelopeTag::IPTL;
  for (int i = 0; i < n; ++i) {
    const double t = -window + 2.0 * window * i / (n - 1);
    const double seed =
        std::abs(m.b2) > 1e-12 ? 1.5 * m.a3 * t * t / m.b2 : 0.0;
    double s;
    try {
      // solve g'(s) = f'(t) for s
      const CurveJet jt = p1.eval(t);
      s = seed;
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        const CurveJet js = p2.eval(s);
        const double r = bracket(jt.d1, js.d1);
        const double dr = bracket(jt.d1, js.d2);
        if (dr == 0.0) break;
        const double step = r / dr;
        s -= step;
        if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(s))) {
          ok = true;
          break;
        }
      }
      if (!ok) continue;
    } catch (const Error&) {
      continue;
    }
    const Vec2 X = (1.0 - m.alpha) * p1.eval(t).x + m.alpha * p2.eval(s).x;
    b.points.push_back({X, t, s, m.alpha, EnvelopeTag::IPTL});
  }
  return b;
}

// ---------------------------------------------------------------------------
// Family type along a branch chart

/// Chart s(t) of the parallel-tangent relation between two arcs. Newton is
/// seeded by linear prediction from the base solution (t0, s0), so stencil
/// sweeps stay on one solution branch.
class ParallelChart {
 public:
  ParallelChart(ParamCurve c1, ParamCurve c2, double t0, double s0)
      : c1_(std::move(c1)), c2_(std::move(c2)), t0_(t0), s0_(s0), slope_(0.0) {
    const double dt = 1e-6;
    const double sp = solve(t0 + dt, s0), sm = solve(t0 - dt, s0);
    slope_ = (sp - sm) / (2 * dt);
  }

  double operator()(double t) const {
    return solve(t, s0_ + slope_ * (t - t0_));
  }

 private:
  double solve(double t, double seed) const {
    const CurveJet jt = c1_.eval(t);
    double s = seed;
    for (int it = 0; it < 60; ++it) {
      const CurveJet js = c2_.eval(s);
      const double f = bracket(jt.d1, js.d1);
      const double df = bracket(jt.d1, js.d2);
      if (df == 0.0) break;
      const double step = f / df;
      s -= step;
      if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(s))) return s;
    }
    throw NotParallel("ParallelChart: Newton did not converge");
  }

  ParamCurve c1_, c2_;
  double t0_, s0_, slope_;
};

/// Chart t(s) of the transversal pairing relation G = 0, with the same
/// continuation seeding.
class PairingChart {
 public:
  PairingChart(ParamCurve c1, ParamCurve c2, AlphaParam a, double s0,
               double t0)
      : c1_(std::move(c1)), c2_(std::move(c2)), a_(a), s0_(s0), t0_(t0),
        slope_(0.0) {
    const double ds = 1e-6;
    const double tp = solve_pairing_t(c1_, c2_, s0 + ds, t0, a_);
    const double tm = solve_pairing_t(c1_, c2_, s0 - ds, t0, a_);
    slope_ = (tp - tm) / (2 * ds);
  }

  double operator()(double s) const {
    return solve_pairing_t(c1_, c2_, s, t0_ + slope_ * (s - s0_), a_);
  }

 private:
  ParamCurve c1_, c2_;
  AlphaParam a_;
  double s0_, t0_, slope_;
};

enum class FamilyType { A1, A2, A3, Higher };

inline const char* to_string(FamilyType t) {
  switch (t) {
    case FamilyType::A1: return "A1";
    case FamilyType::A2: return "A2";
    case FamilyType::A3: return "A3";
    case FamilyType::Higher: return "higher";
  }
  return "?";
}

namespace detail {

/// Derivatives 1..4 of f at 0 by 7-point central stencils with one
/// Richardson level (h and h/2); throws InsufficientPrecision when the two
/// levels disagree beyond 10% on a requested order.
struct StencilDerivs {
  std::array<double, 5> d{};       // d[k] = f^(k), k = 1..4 (extrapolated)
  std::array<double, 5> coarse{};  // level h
  std::array<double, 5> fine{};    // level h/2
  double fscale = 0.0;             // max |f| over the sampled window
};

inline StencilDerivs stencil_derivs(const std::function<double(double)>& f,
                                    double h) {
  auto level = [&](double hh, std::array<double, 5>& out, double& fs) {
    std::array<double, 7> v;
    for (int k = -3; k <= 3; ++k) {
      v[k + 3] = f(k * hh);
      fs = std::max(fs, std::abs(v[k + 3]));
    }
    out[1] = (-v[0] + 9 * v[1] - 45 * v[2] + 45 * v[4] - 9 * v[5] + v[6]) / (60 * hh);
    out[2] = (2 * v[0] - 27 * v[1] + 270 * v[2] - 490 * v[3] + 270 * v[4] -
              27 * v[5] + 2 * v[6]) /
             (180 * hh * hh);
    out[3] = (v[0] - 8 * v[1] + 13 * v[2] - 13 * v[4] + 8 * v[5] - v[6]) /
             (8 * hh * hh * hh);
    out[4] = (-v[0] + 12 * v[1] - 39 * v[2] + 56 * v[3] - 39 * v[4] +
              12 * v[5] - v[6]) /
             (6 * hh * hh * hh * hh);
  };
  StencilDerivs out;
  level(h, out.coarse, out.fscale);
  level(0.5 * h, out.fine, out.fscale);
  // Richardson: order 6 for d1, d2; order 4 for d3, d4
  out.d[1] = (64.0 * out.fine[1] - out.coarse[1]) / 63.0;
  out.d[2] = (64.0 * out.fine[2] - out.coarse[2]) / 63.0;
  out.d[3] = (16.0 * out.fine[3] - out.coarse[3]) / 15.0;
  out.d[4] = (16.0 * out.fine[4] - out.coarse[4]) / 15.0;
  return out;
}

}  // namespace detail

/// Type of f(sigma) = F(X0, sigma) where F is the normalized line-family
/// value along the branch chart sigma -> (t(sigma), s(sigma)). A1 on a
/// regular envelope stretch, A2 at an ordinary cusp, A3 at a (3,4)-cusp.
inline FamilyType family_type(
    const ParamCurve& c1, const ParamCurve& c2, Vec2 X0, double alpha,
    double t0, const std::function<double(double)>& s_of_t, double h,
    bool parallel_family = false, double vanish_rel = 1e-6) {
  auto f = [&](double dt) {
    const double t = t0 + dt;
    const double s = s_of_t(t);
    const CurveJet j1 = c1.eval(t), j2 = c2.eval(s);
    LineEq L;
    if (parallel_family) {
      const Vec2 M = (1.0 - alpha) * j1.x + alpha * j2.x;
      L = LineEq::through(M, j1.d1);
    } else {
      L = intermediate_line_raw(j1, j2, alpha);
    }
    return L.normalized().eval(X0);
  };
  const auto d = detail::stencil_derivs(f, h);
  const double scale = std::max(d.fscale, 1e-300);
  // Taylor-normalized contribution of each order at step h
  std::array<double, 5> tau{};
  double fact = 1.0;
  for (int k = 1; k <= 4; ++k) {
    fact *= k;
    tau[k] = std::abs(d.d[k]) * std::pow(h, k) / fact;
  }
  const double thr = vanish_rel * scale;
  auto decisive = [&](int k) {
    // the deciding derivative must be stable across extrapolation levels
    if (std::abs(d.fine[k] - d.coarse[k]) > 0.1 * std::abs(d.d[k]))
      throw InsufficientPrecision(
          "family_type: extrapolation levels disagree on f^(" +
          std::to_string(k) + ")");
  };
  if (tau[1] > thr)
    throw PreconditionViolated("family_type: F_sigma != 0, not a discriminant point");
  if (tau[2] > thr) {
    decisive(2);
    return FamilyType::A1;
  }
  if (tau[3] > thr) {
    decisive(3);
    return FamilyType::A2;
  }
  if (tau[4] > thr) {
    decisive(4);
    return FamilyType::A3;
  }
  return FamilyType::Higher;
}

// ---------------------------------------------------------------------------
// Versality of the transversal family at an A2 point

struct VersalityReport {
  bool versal = false;             ///< the rank-test answer
  bool closed_form_versal = false; ///< a3 != -(5 alpha - 1)/(6 alpha^2 b1)
  int rank = 0;                    ///< rank of the 1x3 coefficient row
  std::array<double, 3> coeff_row{};
  double a3_critical = 0.0;
};

/// Versality of the intermediate-line family at an A2 point of the
/// transversal case. The first-order coefficient row of (F_x, F_y, F_alpha)
/// shares the critical factor 6 alpha^2 a3 b1 + 5 alpha - 1; rank 0 of the
/// row (non-versal) happens exactly at the critical a3.
inline VersalityReport versality_check(const MongeJetPair& m,
                                       double tol = 1e-9) {
  m.validate();
  {
    const SingularityVerdict v = classify_nonparallel(m);
    if (v.klass != SingClass::OrdinaryCusp)
      throw PreconditionViolated(
          "versality_check: not at an A2 point of the transversal family");
  }
  const double al = m.alpha, b1 = m.b1, a3 = m.a3;
  VersalityReport r;
  r.a3_critical = -(5.0 * al - 1.0) / (6.0 * al * al * b1);
  r.closed_form_versal =
      std::abs(a3 - r.a3_critical) >
      tol * std::max(1.0, std::abs(a3) + std::abs(r.a3_critical));

  const double V = 6.0 * al * al * a3 * b1 + 5.0 * al - 1.0;
  const double D = 2.0 * (3.0 * al * a3 * b1 + al + 1.0);
  // columns scale with (x, y, alpha) slots: (-alpha b1^2, b1, alpha b1^3)
  r.coeff_row = {-al * b1 * b1 * V / D, b1 * V / D, al * b1 * b1 * b1 * V / D};
  const double row_scale =
      (al * b1 * b1 + std::abs(b1) + al * std::abs(b1 * b1 * b1)) *
      std::max(1.0, (std::abs(6.0 * al * al * a3 * b1) + std::abs(5.0 * al - 1.0))) /
      std::max(std::abs(D), 1e-12);
  int rank = 0;
  for (double c : r.coeff_row)
    if (std::abs(c) > tol * std::max(1.0, row_scale)) {
      rank = 1;
      break;
    }
  r.rank = rank;
  r.versal = rank == 1;
  return r;
}

// ---------------------------------------------------------------------------
// Alpha sweep: cusp inventory and transition events

struct CuspLocation {
  EnvelopeTag tag;
  double t, s;
  SingClass klass;
};

struct AlphaInventory {
  double alpha = 0.0;
  int aeil_count = 0;
  int iptl_count = 0;
  std::vector<CuspLocation> locations;
};

struct TransitionEvent {
  double alpha_star = 0.0;
  bool birth = true;  ///< count increases as alpha increases through alpha_star
  EnvelopeTag tag = EnvelopeTag::AEIL;
  double t_seed = 0.0, s_seed = 0.0;

  const char* kind() const { return birth ? "cusp_birth" : "cusp_death"; }
};

struct SweepOptions {
  BuildOptions build;
  double bisect_tol = 1e-4;
};

struct SweepResult {
  std::vector<AlphaInventory> inventory;
  std::vector<TransitionEvent> events;
  std::vector<std::string> log;
};

/// Default grid: alpha in {0.01, ..., 0.99} minus 0.5.
inline std::vector<double> default_alpha_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 99; ++i) {
    const double a = i / 100.0;
    if (a != 0.5) g.push_back(a);
  }
  return g;
}

namespace detail {

inline AlphaInventory sweep_inventory(const ParamCurve& curve, double alpha,
                                      const SweepOptions& opt,
                                      std::vector<std::string>* log) {
  AlphaInventory inv;
  inv.alpha = alpha;
  BuildResult res;
  try {
    res = build_envelope(curve, AlphaParam(alpha), opt.build);
  } catch (const Error& e) {
    if (log) log->push_back("alpha " + std::to_string(alpha) + ": " + e.what());
    return inv;
  }
  for (const auto& b : res.branches) {
    if (b.tag != EnvelopeTag::AEIL && b.tag != EnvelopeTag::IPTL) continue;
    for (const auto& mk : scan_branch(curve, b)) {
      if (mk.klass == SingClass::Degenerate) continue;
      (b.tag == EnvelopeTag::AEIL ? inv.aeil_count : inv.iptl_count) += 1;
      inv.locations.push_back(
          {b.tag, b.points[mk.index].t, b.points[mk.index].s, mk.klass});
    }
  }
  return inv;
}

}  // namespace detail

/// Sweep a grid of alpha values, record the per-alpha cusp inventory, and
/// localize every cusp-count change to |d alpha| < bisect_tol by recursive
/// subdivision. Because every boundary is resolved to the tolerance, the
/// event list depends only on the count function, not on the initial grid.
inline SweepResult alpha_sweep(const ParamCurve& curve,
                               std::vector<double> alphas,
                               const SweepOptions& opt = {}) {
  if (!curve.closed()) throw ConfigError("alpha_sweep: curve must be closed");
  std::sort(alphas.begin(), alphas.end());
  SweepResult out;
  for (double a : alphas)
    out.inventory.push_back(detail::sweep_inventory(curve, a, opt, &out.log));

  auto count_of = [](const AlphaInventory& inv, EnvelopeTag tag) {
    return tag == EnvelopeTag::AEIL ? inv.aeil_count : inv.iptl_count;
  };
  auto emit = [&](const AlphaInventory& lo, const AlphaInventory& hi,
                  EnvelopeTag tag) {
    TransitionEvent ev;
    ev.alpha_star = 0.5 * (lo.alpha + hi.alpha);
    ev.birth = count_of(hi, tag) > count_of(lo, tag);
    ev.tag = tag;
    // seed: on the richer side, the cusp farthest from the poorer side's set
    const AlphaInventory& rich = ev.birth ? hi : lo;
    const AlphaInventory& poor = ev.birth ? lo : hi;
    double best = -1.0;
    for (const auto& loc : rich.locations) {
      if (loc.tag != tag) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& q : poor.locations) {
        if (q.tag != tag) continue;
        nearest = std::min(nearest, std::hypot(loc.t - q.t, loc.s - q.s));
      }
      if (nearest > best) {
        best = nearest;
        ev.t_seed = loc.t;
        ev.s_seed = loc.s;
      }
    }
    out.events.push_back(ev);
  };
  std::function<void(const AlphaInventory&, const AlphaInventory&, int)> refine =
      [&](const AlphaInventory& lo, const AlphaInventory& hi, int depth) {
        const bool aeil = count_of(lo, EnvelopeTag::AEIL) !=
                          count_of(hi, EnvelopeTag::AEIL);
        const bool iptl = count_of(lo, EnvelopeTag::IPTL) !=
                          count_of(hi, EnvelopeTag::IPTL);
        if (!aeil && !iptl) return;
        if (hi.alpha - lo.alpha <= opt.bisect_tol || depth > 40) {
          if (aeil) emit(lo, hi, EnvelopeTag::AEIL);
          if (iptl) emit(lo, hi, EnvelopeTag::IPTL);
          return;
        }
        const AlphaInventory mid = detail::sweep_inventory(
            curve, 0.5 * (lo.alpha + hi.alpha), opt, &out.log);
        refine(lo, mid, depth + 1);
        refine(mid, hi, depth + 1);
      };
  for (std::size_t i = 0; i + 1 < out.inventory.size(); ++i)
    refine(out.inventory[i], out.inventory[i + 1], 0);

  std::sort(out.events.begin(), out.events.end(),
            [](const TransitionEvent& a, const TransitionEvent& b) {
              if (a.alpha_star != b.alpha_star) return a.alpha_star < b.alpha_star;
              return static_cast<int>(a.tag) < static_cast<int>(b.tag);
            });
  return out;
}

}  // namespace eil
