#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eil/affine_invariants.hpp"
#include "eil/curve.hpp"
#include "eil/envelope.hpp"
#include "eil/errors.hpp"
#include "eil/pair_locus.hpp"
#include "eil/singularities.hpp"

namespace eil {

using json = nlohmann::ordered_json;

// Numbers carry 12 significant digits; residual columns use scientific
// notation. Output is bit-identical across runs (pure pipeline, no clock).
inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string fmt_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Curve specification JSON:
//   {"name": "bean", "params": []}                      built-in curves
//   {"samples": [[t, x, y], ...], "closed": true}       sampled curves

inline ParamCurve curve_from_json(const json& spec) {
  if (spec.contains("name")) {
    std::vector<double> params;
    if (spec.contains("params"))
      for (const auto& p : spec["params"]) params.push_back(p.get<double>());
    return builtin_curve(spec["name"].get<std::string>(), params);
  }
  if (spec.contains("samples")) {
    std::vector<double> ts;
    std::vector<Vec2> xs;
    for (const auto& row : spec["samples"]) {
      if (row.size() != 3)
        throw ConfigError("curve samples must be [t, x, y] triples");
      ts.push_back(row[0].get<double>());
      xs.push_back({row[1].get<double>(), row[2].get<double>()});
    }
    return sampled_curve(std::move(ts), std::move(xs),
                         spec.value("closed", false));
  }
  throw ConfigError("curve spec needs either \"name\" or \"samples\"");
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  json curve_spec = {{"name", "bean"}};
  std::vector<double> alphas{0.5};
  int grid_n = 256;
  int samples = 256;
  double tol_refine = 1e-10;
  double tol_online = 1e-8;
  double tol_detm = 1e-6;
  std::string out_dir = "out";
  bool emit_csv = true;
  bool emit_json = true;
  bool emit_svg = true;

  void validate() const {
    for (double a : alphas)
      if (!(a > 0.0) || !(a < 1.0))
        throw ConfigError("alpha values must lie in (0, 1)");
    if (grid_n < 64) throw ConfigError("grid_n must be >= 64");
    if (!(tol_refine > 0.0) || !(tol_online > 0.0) || !(tol_detm > 0.0))
      throw ConfigError("tolerances must be positive");
  }

  ParamCurve curve() const { return curve_from_json(curve_spec); }

  static RunConfig from_json(const json& j) {
    RunConfig c;
    if (j.contains("curve")) c.curve_spec = j["curve"];
    if (j.contains("alphas")) {
      c.alphas.clear();
      for (const auto& a : j["alphas"]) c.alphas.push_back(a.get<double>());
    }
    c.grid_n = j.value("grid_n", c.grid_n);
    c.samples = j.value("samples", c.samples);
    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      c.tol_refine = t.value("refine", c.tol_refine);
      c.tol_online = t.value("online", c.tol_online);
      c.tol_detm = t.value("detm", c.tol_detm);
    }
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("emit")) {
      const auto& e = j["emit"];
      c.emit_csv = e.value("csv", c.emit_csv);
      c.emit_json = e.value("json", c.emit_json);
      c.emit_svg = e.value("svg", c.emit_svg);
    }
    c.validate();
    return c;
  }
};

// ---------------------------------------------------------------------------
// CSV emitters

/// Per-point invariant table. Rows where the affine frame is undefined
/// (inflections) carry nan in the mu and xi columns.
inline void write_invariants_csv(std::ostream& os, const ParamCurve& c,
                                 int samples) {
  os << "t,x,y,kappa,mu,xi_x,xi_y\n";
  for (int i = 0; i < samples; ++i) {
    const double t = c.t0() + c.period() * i / samples;
    const CurveJet j = c.eval(t);
    os << fmt_num(t) << ',' << fmt_num(j.x.x) << ',' << fmt_num(j.x.y) << ','
       << fmt_num(bracket_curvature(j)) << ',';
    try {
      const AffineFrame f = affine_frame(j);
      os << fmt_num(f.mu) << ',' << fmt_num(f.normal_affine.x) << ','
         << fmt_num(f.normal_affine.y) << '\n';
    } catch (const InflectionError&) {
      os << "nan,nan,nan\n";
    }
  }
}

inline void write_pairs_csv(std::ostream& os,
                            const std::vector<PairBranch>& branches,
                            const ParamCurve& curve, const AlphaParam& a) {
  os << "branch_id,kind,t,s,residual\n";
  int id = 0;
  for (const auto& b : branches) {
    const char* kind =
        b.kind == PairBranch::Kind::transversal ? "transversal" : "parallel";
    for (const auto& p : b.points) {
      const double r = b.kind == PairBranch::Kind::transversal
                           ? pairing_residual(curve, p.t, p.s, a)
                           : parallel_residual(curve, p.t, p.s);
      os << id << ',' << kind << ',' << fmt_num(p.t) << ',' << fmt_num(p.s)
         << ',' << fmt_sci(r) << '\n';
    }
    ++id;
  }
}

inline void write_envelope_csv(std::ostream& os,
                               const std::vector<EnvelopeBranch>& branches) {
  os << "tag,branch_id,t,s,alpha,x,y,online_residual,detM_residual\n";
  for (const auto& b : branches)
    for (std::size_t i = 0; i < b.points.size(); ++i) {
      const auto& p = b.points[i];
      os << to_string(b.tag) << ',' << b.branch_id << ',' << fmt_num(p.t) << ','
         << fmt_num(p.s) << ',' << fmt_num(p.alpha) << ',' << fmt_num(p.X.x)
         << ',' << fmt_num(p.X.y) << ','
         << fmt_sci(i < b.online_residual.size() ? b.online_residual[i] : 0.0)
         << ','
         << fmt_sci(i < b.detm_residual.size() ? b.detm_residual[i] : 0.0)
         << '\n';
    }
}

// ---------------------------------------------------------------------------
// SVG emitter. Fixed viewBox: curve bounding box padded 20%; stroke width
// 0.3% of the box diagonal. Colors: curve black, AEIL blue, IPTL red,
// CTL/evolute green; cusp markers are crosses.

inline const char* svg_color(EnvelopeTag tag) {
  switch (tag) {
    case EnvelopeTag::AEIL: return "blue";
    case EnvelopeTag::IPTL: return "red";
    case EnvelopeTag::CTL: return "green";
    case EnvelopeTag::EVOLUTE: return "green";
  }
  return "black";
}

inline void write_envelope_svg(std::ostream& os, const ParamCurve& curve,
                               const std::vector<EnvelopeBranch>& branches,
                               int curve_samples = 512) {
  std::vector<Vec2> cpts;
  for (int i = 0; i <= curve_samples; ++i)
    cpts.push_back(
        curve.eval(curve.t0() + curve.period() * i / curve_samples).x);
  BBox box = bounding_box(cpts);
  const double pad = 0.2 * std::max(box.hi.x - box.lo.x, box.hi.y - box.lo.y);
  const double w = (box.hi.x - box.lo.x) + 2 * pad;
  const double hgt = (box.hi.y - box.lo.y) + 2 * pad;
  const double stroke = 0.003 * std::hypot(w, hgt);
  // y axis flipped so the figure is in math orientation
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\""
     << fmt_num(box.lo.x - pad) << ' ' << fmt_num(-box.hi.y - pad) << ' '
     << fmt_num(w) << ' ' << fmt_num(hgt) << "\">\n";

  auto polyline = [&](const std::vector<Vec2>& pts, const char* color) {
    if (pts.size() < 2) return;
    os << "  <path fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
       << fmt_num(stroke) << "\" d=\"M " << fmt_num(pts[0].x) << ' '
       << fmt_num(-pts[0].y);
    for (std::size_t i = 1; i < pts.size(); ++i)
      os << " L " << fmt_num(pts[i].x) << ' ' << fmt_num(-pts[i].y);
    os << "\"/>\n";
  };

  polyline(cpts, "black");
  for (const auto& b : branches) polyline(b.positions(), svg_color(b.tag));
  const double cs = 4.0 * stroke;  // cusp cross half-size
  for (const auto& b : branches)
    for (const auto& mk : b.cusp_markers) {
      const Vec2 p = b.points[mk.index].X;
      os << "  <path stroke=\"black\" stroke-width=\"" << fmt_num(stroke)
         << "\" d=\"M " << fmt_num(p.x - cs) << ' ' << fmt_num(-p.y) << " L "
         << fmt_num(p.x + cs) << ' ' << fmt_num(-p.y) << " M " << fmt_num(p.x)
         << ' ' << fmt_num(-p.y - cs) << " L " << fmt_num(p.x) << ' '
         << fmt_num(-p.y + cs) << "\"/>\n";
    }
  os << "</svg>\n";
}

// ---------------------------------------------------------------------------
// JSON reports

inline json sweep_report_json(const SweepResult& sweep) {
  json rep;
  rep["schema"] = "1";
  json events = json::array();
  for (const auto& ev : sweep.events) {
    json e;
    e["alpha_star"] = ev.alpha_star;
    e["kind"] = ev.kind();
    e["tag"] = to_string(ev.tag);
    e["t"] = ev.t_seed;
    e["s"] = ev.s_seed;
    events.push_back(e);
  }
  rep["events"] = events;
  json inv = json::array();
  for (const auto& i : sweep.inventory) {
    json row;
    row["alpha"] = i.alpha;
    row["counts"] = {{"AEIL", i.aeil_count}, {"IPTL", i.iptl_count}};
    json locs = json::array();
    for (const auto& l : i.locations)
      locs.push_back({{"tag", to_string(l.tag)},
                      {"t", l.t},
                      {"s", l.s},
                      {"klass", to_string(l.klass)}});
    row["locations"] = locs;
    inv.push_back(row);
  }
  rep["inventory"] = inv;
  rep["log"] = sweep.log;
  return rep;
}

inline MongeJetPair monge_from_json(const json& j) {
  MongeJetPair m;
  m.a3 = j.value("a3", 0.0);
  m.a4 = j.value("a4", 0.0);
  m.a5 = j.value("a5", 0.0);
  m.b0 = j.value("b0", 1.0);
  m.b1 = j.value("b1", 0.0);
  m.b2 = j.value("b2", 0.0);
  m.b3 = j.value("b3", 0.0);
  m.b4 = j.value("b4", 0.0);
  m.b5 = j.value("b5", 0.0);
  m.alpha = j.value("alpha", 0.5);
  m.p1_inflection = j.value("p1_inflection", false);
  m.validate();
  return m;
}

/// Verdict report for the classify subcommand. Routes by the jet data:
/// b1 = 0 selects the parallel classifiers, p1_inflection the inflection
/// variants; an explicit "family" field overrides.
inline json classify_report_json(const MongeJetPair& m,
                                 const std::string& family_override = "") {
  std::string family = family_override;
  if (family.empty()) {
    const bool parallel = std::abs(m.b1) < 1e-12;
    if (parallel && m.p1_inflection)
      family = "parallel_inflection";
    else if (parallel)
      family = "parallel";
    else
      family = "nonparallel";
  }
  json rep;
  rep["schema"] = "1";
  rep["family"] = family;
  auto fill = [&](const SingularityVerdict& v) {
    rep["klass"] = to_string(v.klass);
    json w;
    for (const auto& [k, val] : v.witness) w[k] = val;
    rep["witness"] = w;
  };
  if (family == "parallel") {
    fill(classify_parallel(m));
  } else if (family == "parallel_inflection") {
    const auto out = classify_parallel_inflection(m);
    fill(out.verdict);
    if (out.inflection_order > 0)
      rep["inflection_order"] = out.inflection_order;
  } else if (family == "nonparallel") {
    const SingularityVerdict v = classify_nonparallel(m);
    fill(v);
    if (v.klass == SingClass::OrdinaryCusp) {
      const VersalityReport vr = versality_check(m);
      rep["versal"] = vr.versal;
      rep["versality"] = {{"closed_form", vr.closed_form_versal},
                          {"rank", vr.rank},
                          {"a3_critical", vr.a3_critical}};
    }
  } else {
    throw ConfigError("unknown family: " + family);
  }
  const auto notes = m.assumption_report();
  if (!notes.empty()) rep["notes"] = notes;
  return rep;
}

}  // namespace eil
