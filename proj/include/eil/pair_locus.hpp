#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "eil/affine_invariants.hpp"
#include "eil/curve.hpp"
#include "eil/errors.hpp"
#include "eil/geometry.hpp"

namespace eil {

/// Family parameter alpha in (0, 1) with lambda = ((1 - alpha)/alpha)^(1/3).
struct AlphaParam {
  double alpha;
  double lambda;

  explicit AlphaParam(double a) : alpha(a), lambda(signed_cbrt((1.0 - a) / a)) {
    if (!(a > 0.0) || !(a < 1.0))
      throw ConfigError("AlphaParam: alpha must lie in (0, 1)");
  }
};

struct ParamPair {
  double t = 0.0;
  double s = 0.0;
};

/// A traced solution branch of the pairing condition (kind transversal) or
/// of the parallel-tangent condition (kind parallel) on the (t, s) torus.
struct PairBranch {
  enum class Kind { transversal, parallel };
  Kind kind = Kind::transversal;
  std::vector<ParamPair> points;
  bool closed = false;
};

// ---------------------------------------------------------------------------
// Residuals

/// G = nu1(C) + lambda nu2(C) with C = gamma2(s) - gamma1(t). Zero iff the
/// pair contributes an envelope point (transversal tangents).
inline double pairing_residual(const CurveJet& j1, const CurveJet& j2,
                               const AlphaParam& a) {
  const Vec2 C = j2.x - j1.x;
  return conormal(j1)(C) + a.lambda * conormal(j2)(C);
}

/// G scaled by cbrt(kappa1) cbrt(kappa2): same zero set away from
/// inflections, but pole-free, so it is what the grid tracer samples.
inline double pairing_residual_scaled(const CurveJet& j1, const CurveJet& j2,
                                      const AlphaParam& a) {
  const Vec2 C = j2.x - j1.x;
  const double cr1 = signed_cbrt(bracket_curvature(j1));
  const double cr2 = signed_cbrt(bracket_curvature(j2));
  return cr2 * bracket(j1.d1, C) + a.lambda * cr1 * bracket(j2.d1, C);
}

/// Same zero set as pairing_residual, written with the affine-arc-length
/// tangents: [gamma1' + lambda gamma2', gamma2 - gamma1].
inline double pairing_residual_affine(const CurveJet& j1, const CurveJet& j2,
                                      const AlphaParam& a) {
  const double k1 = bracket_curvature(j1);
  const double k2 = bracket_curvature(j2);
  if (std::abs(k1) < inflection_threshold(j1) ||
      std::abs(k2) < inflection_threshold(j2))
    throw InflectionError("pairing_residual_affine: inflectional jet");
  const Vec2 g1 = j1.d1 / signed_cbrt(k1);
  const Vec2 g2 = j2.d1 / signed_cbrt(k2);
  return bracket(g1 + a.lambda * g2, j2.x - j1.x);
}

/// P = [gamma_t(t), gamma_t(s)]; zero iff the tangents are parallel.
inline double parallel_residual(const CurveJet& j1, const CurveJet& j2) {
  return bracket(j1.d1, j2.d1);
}

inline double pairing_residual(const ParamCurve& c1, double t,
                               const ParamCurve& c2, double s,
                               const AlphaParam& a) {
  return pairing_residual(c1.eval(t), c2.eval(s), a);
}
inline double pairing_residual(const ParamCurve& c, double t, double s,
                               const AlphaParam& a) {
  return pairing_residual(c, t, c, s, a);
}
inline double pairing_residual_affine(const ParamCurve& c, double t, double s,
                                      const AlphaParam& a) {
  return pairing_residual_affine(c.eval(t), c.eval(s), a);
}
inline double parallel_residual(const ParamCurve& c1, double t,
                                const ParamCurve& c2, double s) {
  return parallel_residual(c1.eval(t), c2.eval(s));
}
inline double parallel_residual(const ParamCurve& c, double t, double s) {
  return parallel_residual(c, t, c, s);
}

// ---------------------------------------------------------------------------
// Newton solvers in one parameter

/// dG/ds with t fixed: nu1(gamma2') + lambda nu2'(C).
inline double pairing_residual_ds(const CurveJet& j1, const CurveJet& j2,
                                  const AlphaParam& a) {
  const Vec2 C = j2.x - j1.x;
  return conormal(j1)(j2.d1) + a.lambda * conormal_derivative(j2)(C);
}

/// dG/dt with s fixed: nu1'(C) - lambda nu2(gamma1').
inline double pairing_residual_dt(const CurveJet& j1, const CurveJet& j2,
                                  const AlphaParam& a) {
  const Vec2 C = j2.x - j1.x;
  return conormal_derivative(j1)(C) - a.lambda * conormal(j2)(j1.d1);
}

/// Solve G(t, s) = 0 for t at fixed s (two-arc form used by the local
/// Monge-model machinery). Throws PairingViolated when Newton stalls.
inline double solve_pairing_t(const ParamCurve& c1, const ParamCurve& c2,
                              double s, double t_guess, const AlphaParam& a,
                              int max_iter = 50) {
  const CurveJet j2 = c2.eval(s);
  double t = t_guess;
  for (int it = 0; it < max_iter; ++it) {
    const CurveJet j1 = c1.eval(t);
    const double g = pairing_residual(j1, j2, a);
    const double dg = pairing_residual_dt(j1, j2, a);
    if (dg == 0.0) break;
    const double step = g / dg;
    t -= step;
    if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(t))) return t;
  }
  throw PairingViolated("solve_pairing_t: Newton did not converge");
}

/// Solve [gamma1'(t), gamma2'(s)] = 0 for t at fixed s.
inline double solve_parallel_t(const ParamCurve& c1, const ParamCurve& c2,
                               double s, double t_guess, int max_iter = 50) {
  const CurveJet j2 = c2.eval(s);
  double t = t_guess;
  for (int it = 0; it < max_iter; ++it) {
    const CurveJet j1 = c1.eval(t);
    const double p = bracket(j1.d1, j2.d1);
    const double dp = bracket(j1.d2, j2.d1);
    if (dp == 0.0) break;
    const double step = p / dp;
    t -= step;
    if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(t))) return t;
  }
  throw NotParallel("solve_parallel_t: Newton did not converge");
}

// ---------------------------------------------------------------------------
// Grid tracing on the torus

struct TraceOptions {
  double diag_band_cells = 8.0;  ///< diagonal exclusion: |t-s| < cells*h
  double tol_refine = 1e-10;     ///< residual bound after Newton refinement
  double parallel_rel = 1e-6;    ///< near-parallel routing threshold
  double degenerate_rel = 1e-12; ///< max|G| / scale below which G ~ 0
  std::size_t min_branch_points = 4;
};

namespace detail {

struct Crossing {
  double t, s;      // interpolated crossing location
  double a_t, a_s;  // edge endpoints (bisection bracket)
  double b_t, b_s;
};

struct EdgeKey {
  int i, j;
  bool horizontal;
  bool operator<(const EdgeKey& o) const {
    if (i != o.i) return i < o.i;
    if (j != o.j) return j < o.j;
    return horizontal < o.horizontal;
  }
};

inline double torus_gap(double d, double period) {
  double u = std::fmod(std::abs(d), period);
  return std::min(u, period - u);
}

/// Marching-squares scan of a sign field on the periodic grid, followed by
/// chain linking. `segment_of` receives the 4 corner values and the center
/// value and the cell edge crossings; exclusion decisions are sign- or
/// parameter-based so that traced point sets are affine equivariant.
struct GridScan {
  int n;
  double t0, h;
  std::vector<double> value;              // n*n field samples
  std::vector<char> cell_ok;              // n*n cell inclusion mask

  double at(int i, int j) const {
    return value[static_cast<std::size_t>((j % n + n) % n) * n +
                 static_cast<std::size_t>((i % n + n) % n)];
  }
  double node_t(int i) const { return t0 + h * i; }
};

inline std::vector<std::vector<Crossing>> extract_chains(
    const GridScan& g,
    const std::function<double(double, double)>& center_value,
    bool* any_cell_accepted) {
  const int n = g.n;
  std::map<EdgeKey, int> edge_to_crossing;
  std::vector<Crossing> crossings;
  std::vector<std::vector<int>> adj;
  *any_cell_accepted = false;

  auto crossing_on_edge = [&](int i, int j, bool horizontal) -> int {
    const double v0 = g.at(i, j);
    const double v1 = horizontal ? g.at(i + 1, j) : g.at(i, j + 1);
    if ((v0 >= 0.0) == (v1 >= 0.0)) return -1;
    EdgeKey key{(i % n + n) % n, (j % n + n) % n, horizontal};
    auto it = edge_to_crossing.find(key);
    if (it != edge_to_crossing.end()) return it->second;
    const double z = v0 / (v0 - v1);
    Crossing c;
    c.a_t = g.node_t(i);
    c.a_s = g.node_t(j);
    c.b_t = horizontal ? g.node_t(i + 1) : g.node_t(i);
    c.b_s = horizontal ? g.node_t(j) : g.node_t(j + 1);
    c.t = c.a_t + z * (c.b_t - c.a_t);
    c.s = c.a_s + z * (c.b_s - c.a_s);
    const int id = static_cast<int>(crossings.size());
    crossings.push_back(c);
    adj.emplace_back();
    edge_to_crossing.emplace(key, id);
    return id;
  };

  auto link = [&](int a, int b) {
    if (a < 0 || b < 0 || a == b) return;
    adj[a].push_back(b);
    adj[b].push_back(a);
  };

  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!g.cell_ok[static_cast<std::size_t>(j) * n + i]) continue;
      *any_cell_accepted = true;
      const int bottom = crossing_on_edge(i, j, true);
      const int top = crossing_on_edge(i, j + 1, true);
      const int left = crossing_on_edge(i, j, false);
      const int right = crossing_on_edge(i + 1, j, false);
      const int count = (bottom >= 0) + (top >= 0) + (left >= 0) + (right >= 0);
      if (count == 2) {
        int a = -1, b = -1;
        for (int e : {bottom, top, left, right})
          if (e >= 0) (a < 0 ? a : b) = e;
        link(a, b);
      } else if (count == 4) {
        // saddle cell: pair edges using the center sample
        const double vc = center_value(g.node_t(i) + 0.5 * g.h,
                                       g.node_t(j) + 0.5 * g.h);
        const bool corner_pos = g.at(i, j) >= 0.0;
        if ((vc >= 0.0) == corner_pos) {
          link(bottom, right);
          link(top, left);
        } else {
          link(bottom, left);
          link(top, right);
        }
      }
    }

  // walk chains: open paths first (degree-1 endpoints), then cycles
  const std::size_t m = crossings.size();
  std::vector<char> used(m, 0);
  std::vector<std::vector<Crossing>> chains;
  auto walk = [&](int start) {
    std::vector<Crossing> chain;
    int prev = -1, cur = start;
    while (cur >= 0 && !used[cur]) {
      used[cur] = 1;
      chain.push_back(crossings[cur]);
      int next = -1;
      for (int nb : adj[cur])
        if (nb != prev && !used[nb]) {
          next = nb;
          break;
        }
      prev = cur;
      cur = next;
    }
    return chain;
  };
  for (std::size_t k = 0; k < m; ++k)
    if (!used[k] && adj[k].size() == 1) chains.push_back(walk(static_cast<int>(k)));
  for (std::size_t k = 0; k < m; ++k)
    if (!used[k] && !adj[k].empty()) {
      auto chain = walk(static_cast<int>(k));
      if (!chain.empty()) chains.push_back(std::move(chain));
    }
  return chains;
}

}  // namespace detail

/// Transversal pairing locus G = 0 traced on the torus. Cells crossed by the
/// diagonal band, by an inflection of either jet, or by the parallel locus
/// are excluded; every surviving vertex is Newton-refined in s.
inline std::vector<PairBranch> trace_locus(const ParamCurve& curve,
                                           const AlphaParam& alpha, int grid_n,
                                           const TraceOptions& opt = {}) {
  if (!curve.closed()) throw ConfigError("trace_locus: curve must be closed");
  if (grid_n < 16) throw ConfigError("trace_locus: grid_n too small");
  const int n = grid_n;
  const double period = curve.period();
  const double h = period / n;
  const double t0 = curve.t0();

  std::vector<CurveJet> jets(n);
  std::vector<double> kappa(n), crk(n), d1n(n);
  for (int i = 0; i < n; ++i) {
    jets[i] = curve.eval(t0 + h * i);
    kappa[i] = bracket_curvature(jets[i]);
    crk[i] = signed_cbrt(kappa[i]);
    d1n[i] = norm(jets[i].d1);
  }

  detail::GridScan g;
  g.n = n;
  g.t0 = t0;
  g.h = h;
  g.value.resize(static_cast<std::size_t>(n) * n);
  g.cell_ok.assign(static_cast<std::size_t>(n) * n, 0);

  double max_abs_g = 0.0, max_scale = 0.0;
  std::vector<double> pval(static_cast<std::size_t>(n) * n);
  const double band = opt.diag_band_cells * h;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 C = jets[j].x - jets[i].x;
      const double gt = crk[j] * bracket(jets[i].d1, C) +
                        alpha.lambda * crk[i] * bracket(jets[j].d1, C);
      g.value[static_cast<std::size_t>(j) * n + i] = gt;
      pval[static_cast<std::size_t>(j) * n + i] =
          bracket(jets[i].d1, jets[j].d1);
      if (detail::torus_gap((t0 + h * i) - (t0 + h * j), period) >= band &&
          std::abs(kappa[i]) > inflection_threshold(jets[i]) &&
          std::abs(kappa[j]) > inflection_threshold(jets[j])) {
        const double gg = gt / (crk[i] * crk[j]);
        max_abs_g = std::max(max_abs_g, std::abs(gg));
        max_scale = std::max(max_scale,
                             std::abs(bracket(jets[i].d1, C) / crk[i]) +
                                 alpha.lambda *
                                     std::abs(bracket(jets[j].d1, C) / crk[j]));
      }
    }

  if (max_abs_g < opt.degenerate_rel * std::max(1.0, max_scale))
    throw DegenerateResidual("trace_locus: residual vanishes on the grid");

  auto infl = [&](int i) {
    return std::abs(kappa[(i % n + n) % n]) <=
           inflection_threshold(jets[(i % n + n) % n]);
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      bool ok = true;
      // diagonal exclusion band (torus distance), checked at all corners
      for (int dj = 0; dj <= 1 && ok; ++dj)
        for (int di = 0; di <= 1 && ok; ++di)
          if (detail::torus_gap(h * (i + di) - h * (j + dj), period) < band)
            ok = false;
      // inflection exclusion: kappa tiny or sign change across the cell
      // (per axis; a constant kappa1*kappa2 sign keeps the scaled residual's
      // crossings identical to G's)
      if (ok)
        ok = !infl(i) && !infl(i + 1) && !infl(j) && !infl(j + 1) &&
             (kappa[i] > 0) == (kappa[(i + 1) % n] > 0) &&
             (kappa[j] > 0) == (kappa[(j + 1) % n] > 0);
      // near-parallel routing: the conormal system degenerates there
      if (ok) {
        bool sign_set = false, sign = false, flip = false, tiny = false;
        for (int dj = 0; dj <= 1; ++dj)
          for (int di = 0; di <= 1; ++di) {
            const int ii = (i + di) % n, jj = (j + dj) % n;
            const double p = pval[static_cast<std::size_t>(jj) * n + ii];
            if (std::abs(p) < opt.parallel_rel * d1n[ii] * d1n[jj]) tiny = true;
            const bool sp = p >= 0.0;
            if (!sign_set) {
              sign = sp;
              sign_set = true;
            } else if (sp != sign) {
              flip = true;
            }
          }
        ok = !flip && !tiny;
      }
      g.cell_ok[static_cast<std::size_t>(j) * n + i] = ok ? 1 : 0;
    }

  auto center_value = [&](double t, double s) {
    return pairing_residual_scaled(curve.eval(t), curve.eval(s), alpha);
  };
  bool any_cell = false;
  auto chains = detail::extract_chains(g, center_value, &any_cell);
  if (!any_cell || chains.empty())
    throw NoBranchFound("trace_locus: no transversal branch on this grid");

  // Newton refinement in s at fixed t; bisection along the original edge
  // when the s-derivative is too small.
  auto refine = [&](detail::Crossing& c) -> bool {
    const CurveJet j1 = curve.eval(c.t);
    double s = c.s;
    for (int it = 0; it < 60; ++it) {
      double gval, dg;
      try {
        const CurveJet j2 = curve.eval(s);
        gval = pairing_residual(j1, j2, alpha);
        dg = pairing_residual_ds(j1, j2, alpha);
      } catch (const InflectionError&) {
        return false;
      }
      if (!std::isfinite(dg) || dg == 0.0) break;
      double step = gval / dg;
      step = std::clamp(step, -2.0 * h, 2.0 * h);
      s -= step;
      if (std::abs(step) < 1e-13 * period) {
        c.s = s;
        return true;
      }
    }
    // bisection along the edge bracket
    double ta = c.a_t, sa = c.a_s, tb = c.b_t, sb = c.b_s;
    auto f = [&](double tt, double ss) {
      return pairing_residual_scaled(curve.eval(tt), curve.eval(ss), alpha);
    };
    double fa = f(ta, sa);
    for (int it = 0; it < 80; ++it) {
      const double tm = 0.5 * (ta + tb), sm = 0.5 * (sa + sb);
      const double fm = f(tm, sm);
      if ((fm >= 0.0) == (fa >= 0.0)) {
        ta = tm;
        sa = sm;
        fa = fm;
      } else {
        tb = tm;
        sb = sm;
      }
    }
    c.t = 0.5 * (ta + tb);
    c.s = 0.5 * (sa + sb);
    return true;
  };

  std::vector<PairBranch> branches;
  for (auto& chain : chains) {
    PairBranch b;
    b.kind = PairBranch::Kind::transversal;
    b.closed = chain.size() > 2 &&
               detail::torus_gap(chain.front().t - chain.back().t, period) < 1.5 * h &&
               detail::torus_gap(chain.front().s - chain.back().s, period) < 1.5 * h;
    for (auto& c : chain) {
      if (!refine(c)) continue;
      double t = c.t, s = c.s;
      try {
        const CurveJet j1 = curve.eval(t), j2 = curve.eval(s);
        if (std::abs(pairing_residual(j1, j2, alpha)) >
            opt.tol_refine *
                std::max(1.0, std::abs(conormal(j1)(j2.x - j1.x))))
          continue;
      } catch (const InflectionError&) {
        continue;
      }
      t = curve.reduce(t);
      s = curve.reduce(s);
      if (!b.points.empty() &&
          detail::torus_gap(b.points.back().t - t, period) < 1e-12 * period &&
          detail::torus_gap(b.points.back().s - s, period) < 1e-12 * period)
        continue;
      b.points.push_back({t, s});
    }
    if (b.points.size() >= opt.min_branch_points) branches.push_back(std::move(b));
  }
  if (branches.empty())
    throw NoBranchFound("trace_locus: no branch survived refinement");

  for (auto& b : branches)
    if (!b.closed && b.points.size() > 1 && b.points.back().t < b.points.front().t)
      std::reverse(b.points.begin(), b.points.end());
  std::sort(branches.begin(), branches.end(),
            [](const PairBranch& a, const PairBranch& b) {
              return a.points.front().t < b.points.front().t;
            });
  return branches;
}

/// Parallel-tangent locus P = 0 with t != s, Newton-refined in s. For an
/// oval this is a single closed branch (t, s(t)); the longest chain is
/// returned.
inline PairBranch parallel_pairs(const ParamCurve& curve, int grid_n,
                                 const TraceOptions& opt = {}) {
  if (!curve.closed())
    throw NoBranchFound("parallel_pairs: open arc has no traced branch");
  if (grid_n < 16) throw ConfigError("parallel_pairs: grid_n too small");
  const int n = grid_n;
  const double period = curve.period();
  const double h = period / n;
  const double t0 = curve.t0();

  std::vector<CurveJet> jets(n);
  for (int i = 0; i < n; ++i) jets[i] = curve.eval(t0 + h * i);

  detail::GridScan g;
  g.n = n;
  g.t0 = t0;
  g.h = h;
  g.value.resize(static_cast<std::size_t>(n) * n);
  g.cell_ok.assign(static_cast<std::size_t>(n) * n, 0);
  const double band = opt.diag_band_cells * h;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      g.value[static_cast<std::size_t>(j) * n + i] =
          bracket(jets[i].d1, jets[j].d1);
      bool ok = true;
      for (int dj = 0; dj <= 1 && ok; ++dj)
        for (int di = 0; di <= 1 && ok; ++di)
          if (detail::torus_gap(h * (i + di) - h * (j + dj), period) < band)
            ok = false;
      g.cell_ok[static_cast<std::size_t>(j) * n + i] = ok ? 1 : 0;
    }

  auto center_value = [&](double t, double s) {
    return parallel_residual(curve.eval(t), curve.eval(s));
  };
  bool any_cell = false;
  auto chains = detail::extract_chains(g, center_value, &any_cell);
  if (chains.empty())
    throw NoBranchFound("parallel_pairs: no parallel branch on this grid");

  auto refine = [&](detail::Crossing& c) -> bool {
    const CurveJet j1 = curve.eval(c.t);
    double s = c.s;
    for (int it = 0; it < 60; ++it) {
      const CurveJet j2 = curve.eval(s);
      const double p = bracket(j1.d1, j2.d1);
      const double dp = bracket(j1.d1, j2.d2);
      if (dp == 0.0) break;
      const double step = p / dp;
      s -= step;
      if (std::abs(step) < 1e-13 * period) {
        c.s = s;
        return true;
      }
    }
    return false;
  };

  PairBranch best;
  best.kind = PairBranch::Kind::parallel;
  for (auto& chain : chains) {
    PairBranch b;
    b.kind = PairBranch::Kind::parallel;
    b.closed = chain.size() > 2 &&
               detail::torus_gap(chain.front().t - chain.back().t, period) < 1.5 * h &&
               detail::torus_gap(chain.front().s - chain.back().s, period) < 1.5 * h;
    for (auto& c : chain) {
      if (!refine(c)) continue;
      const double t = curve.reduce(c.t), s = curve.reduce(c.s);
      const CurveJet j1 = curve.eval(t), j2 = curve.eval(s);
      if (std::abs(bracket(j1.d1, j2.d1)) >
          opt.tol_refine * std::max(1.0, norm(j1.d1) * norm(j2.d1)))
        continue;
      b.points.push_back({t, s});
    }
    if (b.points.size() > best.points.size()) best = std::move(b);
  }
  if (best.points.size() < opt.min_branch_points)
    throw NoBranchFound("parallel_pairs: no branch survived refinement");
  return best;
}

}  // namespace eil
