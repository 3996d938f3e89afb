#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "eil/curve.hpp"
#include "eil/envelope.hpp"
#include "eil/pair_locus.hpp"

using namespace eil;
using Catch::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<ParamPair> traced_pairs(const ParamCurve& c, double alpha,
                                    int grid = 256, std::size_t cap = 400) {
  std::vector<ParamPair> out;
  for (const auto& b : trace_locus(c, AlphaParam(alpha), grid))
    for (const auto& p : b.points) {
      out.push_back(p);
      if (out.size() >= cap) return out;
    }
  return out;
}
}  // namespace

TEST_CASE("intermediate line cases") {
  const ParamCurve c = circle_curve();
  SECTION("antipodal pair: vertical line x = 1 - 2 alpha") {
    for (double al : {0.3, 0.5, 0.7}) {
      const LineEq L = intermediate_line(c, 0.0, kPi, al).normalized();
      CHECK(L.eval({1 - 2 * al, 0.0}) == Approx(0.0).margin(1e-12));
      CHECK(L.eval({1 - 2 * al, 0.7}) == Approx(0.0).margin(1e-12));
      CHECK(std::abs(L.l2) < 1e-12);
    }
  }
  SECTION("coincident points: tangent line for alpha != 1/2") {
    const LineEq L = intermediate_line(c, 0.8, 0.8, 0.6);
    const CurveJet j = c.eval(0.8);
    CHECK(L.eval(j.x) == Approx(0.0).margin(1e-12));
    CHECK(L.eval(j.x + j.d1) == Approx(0.0).margin(1e-12));
  }
  SECTION("coincident points at alpha = 1/2: the affine normal line") {
    const LineEq L = intermediate_line(c, 0.8, 0.8, 0.5);
    // the circle's affine normal line passes through the center
    CHECK(L.eval(c.eval(0.8).x) == Approx(0.0).margin(1e-12));
    CHECK(L.eval({0, 0}) == Approx(0.0).margin(1e-12));
  }
  SECTION("mid-lines of the circle pass through the center") {
    const LineEq L = intermediate_line(c, 0.0, kPi / 2, 0.5);
    CHECK(L.eval({0, 0}) == Approx(0.0).margin(1e-12));
    const Vec2 M{0.5, 0.5};
    CHECK(L.eval(M) == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("closed-form envelope point satisfies the line and det M checks") {
  const ParamCurve bean = bean_curve();
  const AlphaParam a(0.6);
  const auto pairs = traced_pairs(bean, 0.6, 256, 120);
  REQUIRE(pairs.size() > 50);
  const double scale = bean.scale();
  for (const auto& p : pairs) {
    const EnvelopePoint X = envelope_point_closed_form(bean, p.t, p.s, a);
    const LineEq L = intermediate_line(bean, p.t, p.s, a.alpha).normalized();
    CHECK(std::abs(L.eval(X.X)) < 1e-8 * scale);
    CHECK(std::abs(discriminant_check(bean, p.t, p.s, a.alpha)) < 1e-6 * scale);
  }
}

TEST_CASE("discriminant check: negative control on non-solution pairs") {
  const ParamCurve bean = bean_curve();
  // pairs picked off the locus: G != 0 there
  double worst = 0.0;
  for (auto [t, s] : std::initializer_list<std::pair<double, double>>{
           {0.1, 0.9}, {0.4, 1.5}, {1.1, 1.9}}) {
    if (std::abs(pairing_residual(bean, t, s, AlphaParam(0.6))) < 1e-3) continue;
    worst = std::max(worst, std::abs(discriminant_check(bean, t, s, 0.6)));
    CHECK(std::abs(discriminant_check(bean, t, s, 0.6)) > 1e-3);
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("parallel circle pairs satisfy the det M check") {
  const ParamCurve c = circle_curve();
  for (double t : {0.0, 0.9, 2.2})
    CHECK(std::abs(discriminant_check(c, t, t + kPi, 0.6)) < 1e-8);
}

TEST_CASE("dual-formula agreement on traced pairs") {
  const ParamCurve bean = bean_curve();
  for (double al : {0.35, 0.6}) {
    const AlphaParam a(al);
    const auto pairs = traced_pairs(bean, al, 256, 150);
    REQUIRE(!pairs.empty());
    for (const auto& p : pairs) {
      const Vec2 xc = envelope_point_closed_form(bean, p.t, p.s, a).X;
      const Vec2 xa = envelope_point_affine_form(bean, p.t, p.s, a).X;
      CHECK(dist(xc, xa) < 1e-6 * (1 + norm(xc)));
    }
  }
}

TEST_CASE("alpha = 1/2 reduces to the AESS expression") {
  const ParamCurve bean = bean_curve();
  const AlphaParam a(0.5);
  const auto pairs = traced_pairs(bean, 0.5, 256, 120);
  REQUIRE(pairs.size() > 50);
  for (const auto& p : pairs) {
    const Vec2 xc = envelope_point_closed_form(bean, p.t, p.s, a).X;
    const Vec2 xs = aess_point(bean, p.t, p.s);
    CHECK(dist(xc, xs) < 1e-8 * (1 + norm(xc)));
  }
}

TEST_CASE("ellipse pair symmetric about an axis maps to the axis") {
  const ParamCurve e = ellipse_curve(2, 1);
  const AlphaParam a(0.5);
  // gamma(t) and gamma(pi - t) are mirror images across the y-axis
  for (double t : {0.4, 1.0}) {
    const double s = kPi - t;
    if (std::abs(pairing_residual(e, t, s, a)) > 1e-10) continue;
    const Vec2 X = envelope_point_closed_form(e, t, s, a).X;
    CHECK(std::abs(X.x) < 1e-9);
  }
}

TEST_CASE("pairing violation and parallel pairs are rejected") {
  const ParamCurve bean = bean_curve();
  const AlphaParam a(0.6);
  CHECK_THROWS_AS(envelope_point_closed_form(bean, 0.1, 0.9, a, 1e-9),
                  PairingViolated);
  const ParamCurve c = circle_curve();
  CHECK_THROWS_AS(envelope_point_closed_form(c, 0.0, kPi, AlphaParam(0.5)),
                  ParallelTangentsError);
}

TEST_CASE("IPTL of the circle is the circle of radius |1 - 2 alpha|") {
  const ParamCurve c = circle_curve();
  for (double al : {0.2, 0.35, 0.6, 0.8}) {
    const AlphaParam a(al);
    for (double t : {0.0, 1.1, 3.0}) {
      const EnvelopePoint p = iptl_point(c, t, t + kPi, a);
      CHECK(norm(p.X) == Approx(std::abs(1 - 2 * al)).margin(1e-12));
    }
  }
  // alpha = 1/2: the locus degenerates to the center
  CHECK(norm(iptl_point(c, 0.7, 0.7 + kPi, AlphaParam(0.5)).X) < 1e-12);
  // affine image: ellipse IPTL is the ellipse scaled by |1 - 2 alpha|
  const ParamCurve e = ellipse_curve(2, 1);
  const EnvelopePoint q = iptl_point(e, 0.9, 0.9 + kPi, AlphaParam(0.3));
  const Vec2 expected = 0.4 * e.eval(0.9).x;
  CHECK(dist(q.X, expected) < 1e-12);
  CHECK_THROWS_AS(iptl_point(c, 0.0, 1.0, AlphaParam(0.3)), NotParallel);
}

TEST_CASE("CTL is the curve itself for alpha != 1/2") {
  const ParamCurve bean = bean_curve();
  const auto branches = ctl(bean, AlphaParam(0.6), 128);
  REQUIRE(branches.size() == 1);
  const EnvelopeBranch& b = branches.front();
  CHECK(b.tag == EnvelopeTag::CTL);
  REQUIRE(b.points.size() == 128);
  for (const auto& p : b.points)
    CHECK(dist(p.X, bean.eval(p.t).x) < 1e-14);
}

TEST_CASE("affine evolute of an ellipse is its center") {
  const auto branches = ctl(ellipse_curve(2, 1), AlphaParam(0.5), 64);
  REQUIRE(!branches.empty());
  for (const auto& b : branches) {
    CHECK(b.tag == EnvelopeTag::EVOLUTE);
    for (const auto& p : b.points) CHECK(norm(p.X) < 1e-9);
  }
}

TEST_CASE("bean affine evolute matches the affine-normal-line oracle") {
  // mu crosses zero twice on the bean, so the evolute has asymptotic
  // branches; the comparison is restricted to a bounded window
  const ParamCurve bean = bean_curve();
  const double bound = bean.scale();
  const int n = 8192;
  std::vector<LineEq> normals;
  for (int i = 0; i <= n; ++i) {
    const double t = bean.period() * i / n;
    const AffineFrame f = affine_frame(bean.eval(t));
    normals.push_back(LineEq::through(bean.eval(t).x, f.normal_affine));
  }
  std::vector<Vec2> oracle_pts;
  for (const auto& p : oracle_envelope(normals))
    if (p && norm(*p) < bound) oracle_pts.push_back(*p);
  const auto pieces = affine_evolute(bean, 1024);
  REQUIRE(pieces.size() >= 2);  // split at the two mu zeros
  REQUIRE(oracle_pts.size() > 100);
  // oracle points lie on the closed-form evolute polylines
  double worst = 0.0;
  for (const Vec2& q : oracle_pts) {
    double best = 1e300;
    for (const auto& piece : pieces) {
      const auto poly = piece.positions();
      best = std::min(best, dist_point_polyline(q, poly));
    }
    worst = std::max(worst, best);
  }
  CHECK(worst < 1e-2 * bean.scale());
}

TEST_CASE("oracle envelope rejects fewer than two lines") {
  CHECK_THROWS_AS(oracle_envelope({LineEq{1, 0, 0}}), ConfigError);
}

TEST_CASE("oracle envelope of circle tangents converges quadratically") {
  const ParamCurve c = circle_curve();
  auto max_err = [&](int n) {
    std::vector<LineEq> tangents;
    for (int i = 0; i <= n; ++i) {
      const double t = 2 * kPi * i / n;
      tangents.push_back(LineEq::through(c.eval(t).x, c.eval(t).d1));
    }
    double worst = 0.0;
    for (const auto& p : oracle_envelope(tangents))
      if (p) worst = std::max(worst, std::abs(norm(*p) - 1.0));
    return worst;
  };
  const double e1 = max_err(128), e2 = max_err(256);
  CHECK(e1 < 1e-3);
  CHECK(e2 < 0.35 * e1);  // O(h^2)
}

TEST_CASE("oracle envelope: concurrency cases") {
  const ParamCurve e = ellipse_curve(2, 1);
  std::vector<LineEq> normals;
  const int n = 256;
  for (int i = 0; i <= n; ++i) {
    const double t = 2 * kPi * i / n;
    const AffineFrame f = affine_frame(e.eval(t));
    normals.push_back(LineEq::through(e.eval(t).x, f.normal_affine));
  }
  for (const auto& p : oracle_envelope(normals))
    if (p) CHECK(norm(*p) < 1e-8);

  // mid-lines of the antipodal circle family pass through the center
  const ParamCurve c = circle_curve();
  std::vector<LineEq> midlines;
  for (int i = 0; i <= n; ++i) {
    const double t = 2 * kPi * i / n;
    midlines.push_back(intermediate_line(c, t, t + kPi, 0.5));
  }
  for (const auto& p : oracle_envelope(midlines))
    if (p) CHECK(norm(*p) < 1e-8);
}

TEST_CASE("oracle gap shrinks with the branch step") {
  const ParamCurve bean = bean_curve();
  const AlphaParam a(0.6);
  BuildOptions coarse, fine;
  coarse.grid_n = 128;
  fine.grid_n = 256;
  coarse.with_detm = fine.with_detm = false;
  const BuildResult rc = build_envelope(bean, a, coarse);
  const BuildResult rf = build_envelope(bean, a, fine);
  double gap_c = 0.0, gap_f = 0.0;
  for (const auto& b : rc.branches)
    if (b.tag == EnvelopeTag::AEIL) gap_c = std::max(gap_c, b.oracle_max_gap);
  for (const auto& b : rf.branches)
    if (b.tag == EnvelopeTag::AEIL) gap_f = std::max(gap_f, b.oracle_max_gap);
  CHECK(gap_c > 0.0);
  CHECK(gap_f < 0.75 * gap_c);
}

TEST_CASE("build_envelope on the bean curve") {
  const ParamCurve bean = bean_curve();
  SECTION("alpha = 0.6: three disjoint components") {
    const BuildResult res = build_envelope(bean, AlphaParam(0.6));
    CHECK(!res.tagged(EnvelopeTag::AEIL).empty());
    CHECK(!res.tagged(EnvelopeTag::IPTL).empty());
    CHECK(!res.tagged(EnvelopeTag::CTL).empty());
    CHECK(res.aeil_iptl_min_distance > 0.0);
    for (const auto& b : res.branches)
      for (double r : b.online_residual) CHECK(r < 1e-8 * bean.scale());
  }
  SECTION("alpha = 0.5: AESS and MPTL meet near their cusps") {
    const BuildResult res = build_envelope(bean, AlphaParam(0.5));
    CHECK(!res.tagged(EnvelopeTag::AEIL).empty());
    CHECK(!res.tagged(EnvelopeTag::IPTL).empty());
    // sampling step along the IPTL branch
    const EnvelopeBranch* iptl = res.tagged(EnvelopeTag::IPTL).front();
    double step = 0.0;
    for (std::size_t i = 0; i + 1 < iptl->points.size(); ++i)
      step = std::max(step, dist(iptl->points[i].X, iptl->points[i + 1].X));
    CHECK(res.aeil_iptl_min_distance <= step);
  }
}

TEST_CASE("build_envelope on the circle: AEIL empty, IPTL a circle") {
  const BuildResult res = build_envelope(circle_curve(), AlphaParam(0.6));
  CHECK(res.tagged(EnvelopeTag::AEIL).empty());
  REQUIRE(!res.tagged(EnvelopeTag::IPTL).empty());
  for (const auto& p : res.tagged(EnvelopeTag::IPTL).front()->points)
    CHECK(norm(p.X) == Approx(0.2).margin(1e-8));
  REQUIRE(!res.tagged(EnvelopeTag::CTL).empty());
  for (const auto& p : res.tagged(EnvelopeTag::CTL).front()->points)
    CHECK(norm(p.X) == Approx(1.0).margin(1e-12));
  CHECK(res.aeil_iptl_min_distance ==
        std::numeric_limits<double>::infinity());
}

TEST_CASE("limit slope") {
  const ParamCurve bean = bean_curve();
  SECTION("tends to the tangent slope linearly for alpha != 1/2") {
    const AlphaParam a(0.6);
    const double t = 0.37;
    // frame is rotated so the tangent slope at t is 0
    const double a1 = std::abs(limit_slope(bean, t, t + 0.08, a));
    const double a2 = std::abs(limit_slope(bean, t, t + 0.04, a));
    const double a3 = std::abs(limit_slope(bean, t, t + 0.02, a));
    CHECK(a2 / a1 == Approx(0.5).margin(0.2));
    CHECK(a3 / a2 == Approx(0.5).margin(0.2));
    CHECK(std::abs(limit_slope(bean, t, t, a)) < 1e-14);
  }
  SECTION("degenerate denominator: constant f'' in the graph frame") {
    // at t = 0 the parabola needs no rotation and f'' is constant, so the
    // alpha = 1/2 slope denominator vanishes identically
    const ParamCurve p = parabola_arc(-2, 2);
    CHECK_THROWS_AS(limit_slope(p, 0.0, 0.4, AlphaParam(0.5)),
                    DenominatorDegenerate);
  }
  SECTION("alpha = 1/2 limit is the affine normal slope (parabola arc)") {
    const ParamCurve p = parabola_arc(-2, 2);
    const AlphaParam a(0.5);
    const double t = 0.5;
    // Richardson extrapolation of A(t, t + h) as h -> 0
    const double h = 0.02;
    const double s1 = limit_slope(p, t, t + h, a);
    const double s2 = limit_slope(p, t, t + h / 2, a);
    const double s4 = limit_slope(p, t, t + h / 4, a);
    const double extrap = (8 * s4 - 6 * s2 + s1) / 3.0;
    const double direct = limit_slope(p, t, t, a);
    CHECK(extrap == Approx(direct).margin(1e-6 * (1 + std::abs(direct))));
  }
}

TEST_CASE("envelope is affine equivariant per tag") {
  const ParamCurve bean = bean_curve();
  const AffineMap A{{1.1, 0.3, -0.2, 0.8}, {0.4, 1.2}};
  const AlphaParam a(0.6);
  BuildOptions opt;
  opt.grid_n = 192;
  opt.with_detm = false;
  const BuildResult orig = build_envelope(bean, a, opt);
  const BuildResult img = build_envelope(transform(bean, A), a, opt);
  const double scale = transform(bean, A).scale();
  for (EnvelopeTag tag : {EnvelopeTag::AEIL, EnvelopeTag::IPTL, EnvelopeTag::CTL}) {
    std::vector<Vec2> mapped, direct;
    for (const auto* b : orig.tagged(tag))
      for (const auto& p : b->points) mapped.push_back(A.apply_point(p.X));
    for (const auto* b : img.tagged(tag))
      for (const auto& p : b->points) direct.push_back(p.X);
    REQUIRE(!mapped.empty());
    REQUIRE(!direct.empty());
    CHECK(hausdorff(mapped, direct) < 1e-6 * scale);
  }
}

TEST_CASE("alpha and 1 - alpha give the same envelope point sets") {
  const ParamCurve bean = bean_curve();
  const AlphaParam a(0.4), a_swap(0.6);
  const double scale = bean.scale();

  // pointwise: the swapped pair at 1 - alpha gives the identical point
  std::size_t checked = 0;
  for (const auto& br : trace_locus(bean, a, 192)) {
    for (const auto& p : br.points) {
      const Vec2 x = envelope_point_closed_form(bean, p.t, p.s, a).X;
      const Vec2 y = envelope_point_closed_form(bean, p.s, p.t, a_swap).X;
      CHECK(dist(x, y) < 1e-9 * scale);
      if (++checked > 250) break;
    }
    if (checked > 250) break;
  }
  CHECK(checked > 100);
  // same for IPTL: M_alpha(t, s) = M_{1-alpha}(s, t)
  const PairBranch pp = parallel_pairs(bean, 192);
  for (const auto& p : pp.points) {
    const Vec2 x = iptl_point(bean, p.t, p.s, a).X;
    const Vec2 y = iptl_point(bean, p.s, p.t, a_swap).X;
    CHECK(dist(x, y) < 1e-12 * scale);
  }

  // set level, limited by the polyline discretization near cusps
  BuildOptions opt;
  opt.grid_n = 192;
  opt.with_detm = false;
  const BuildResult lo = build_envelope(bean, a, opt);
  const BuildResult hi = build_envelope(bean, a_swap, opt);
  for (EnvelopeTag tag : {EnvelopeTag::AEIL, EnvelopeTag::IPTL}) {
    std::vector<Vec2> a_pts, b_pts;
    for (const auto* b : lo.tagged(tag))
      for (const auto& p : b->points) a_pts.push_back(p.X);
    for (const auto* b : hi.tagged(tag))
      for (const auto& p : b->points) b_pts.push_back(p.X);
    REQUIRE(!a_pts.empty());
    CHECK(hausdorff(a_pts, b_pts) < 1e-3 * scale);
  }
}
