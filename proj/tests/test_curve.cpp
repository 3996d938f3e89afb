#include <catch2/catch_amalgamated.hpp>
#include <array>
#include <cmath>
#include <numbers>
#include <thread>

#include "eil/curve.hpp"

using namespace eil;
using Catch::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

void check_vec(Vec2 got, Vec2 want, double tol = 1e-12) {
  CHECK(got.x == Approx(want.x).margin(tol));
  CHECK(got.y == Approx(want.y).margin(tol));
}
}  // namespace

TEST_CASE("unit circle jet at t = 0") {
  const CurveJet j = circle_curve().eval(0.0);
  check_vec(j.x, {1, 0});
  check_vec(j.d1, {0, 1});
  check_vec(j.d2, {-1, 0});
  CHECK(j.regular());
}

TEST_CASE("parabola arc jet at t = 1") {
  const CurveJet j = parabola_arc(-2, 2).eval(1.0);
  check_vec(j.x, {1, 0.5});
  check_vec(j.d1, {1, 1});
  check_vec(j.d2, {0, 1});
  check_vec(j.d3, {0, 0});
  check_vec(j.d4, {0, 0});
}

TEST_CASE("bean curve caption parametrization at t = 0") {
  const CurveJet j = bean_curve().eval(0.0);
  check_vec(j.x, {0.1 + 1.0, 0.1 * std::sin(1.0)});
  CHECK(bean_curve().t0() == 0.0);
  CHECK(bean_curve().t1() == 2.0);
  CHECK(bean_curve().closed());
}

TEST_CASE("builtin curves") {
  const ParamCurve e = builtin_curve("ellipse", {2, 1});
  CHECK(e.closed());
  CHECK(e.period() == Approx(2 * kPi));

  const ParamCurve m = builtin_curve("monge_arc", {1.0, 0.3});
  CHECK_FALSE(m.closed());
  const CurveJet j = m.eval(0.0);
  check_vec(j.x, {0, 0});
  CHECK(j.d2.y == Approx(1.0));  // f''(0) = a2
  CHECK(j.d3.y == Approx(0.3));  // f'''(0) = a3

  CHECK_THROWS_AS(builtin_curve("trefoil"), ConfigError);
  CHECK_THROWS_AS(builtin_curve("ellipse", {2, -1}), ConfigError);
  CHECK_THROWS_AS(builtin_curve("ellipse", {2}), ConfigError);
  CHECK_THROWS_AS(builtin_curve("monge_arc", {}), ConfigError);
}

TEST_CASE("closed-curve periodicity and parameter reduction") {
  for (const ParamCurve& c :
       {circle_curve(), ellipse_curve(2, 1), bean_curve()}) {
    const CurveJet a = c.eval(c.t0());
    const CurveJet b = c.eval(c.t0() + c.period());
    check_vec(a.x, b.x, 1e-10);
    check_vec(a.d1, b.d1, 1e-10);
    check_vec(a.d2, b.d2, 1e-9);
    CHECK(c.reduce(c.t0() + 2.5 * c.period()) ==
          Approx(c.t0() + 0.5 * c.period()));
    CHECK(c.reduce(c.t0() - 0.25 * c.period()) ==
          Approx(c.t0() + 0.75 * c.period()));
  }
}

TEST_CASE("open arcs reject out-of-domain parameters") {
  const ParamCurve p = parabola_arc(-1, 1);
  CHECK_THROWS_AS(p.eval(1.5), DomainError);
  CHECK_NOTHROW(p.eval(1.0));
}

TEST_CASE("finite differences of d_k match d_{k+1}") {
  const double h = 1e-4;
  for (const ParamCurve& c :
       {circle_curve(), ellipse_curve(2, 1), bean_curve()}) {
    for (double u : {0.12, 0.41, 0.77}) {
      const double t = c.t0() + u * c.period();
      const CurveJet p = c.eval(t + h), m = c.eval(t - h), j = c.eval(t);
      const Vec2 fd1 = (p.x - m.x) / (2 * h);
      const Vec2 fd2 = (p.d1 - m.d1) / (2 * h);
      const Vec2 fd3 = (p.d2 - m.d2) / (2 * h);
      const Vec2 fd4 = (p.d3 - m.d3) / (2 * h);
      CHECK(dist(fd1, j.d1) < 1e-5 * (1 + norm(j.d1)));
      CHECK(dist(fd2, j.d2) < 1e-5 * (1 + norm(j.d2)));
      CHECK(dist(fd3, j.d3) < 1e-4 * (1 + norm(j.d3)));
      CHECK(dist(fd4, j.d4) < 1e-4 * (1 + norm(j.d4)));
    }
  }
}

TEST_CASE("transform: identity, scaling, shear") {
  const ParamCurve c = circle_curve();
  const AffineMap id{{1, 0, 0, 1}, {0, 0}};
  const CurveJet j0 = transform(c, id).eval(0.7);
  check_vec(j0.x, c.eval(0.7).x);

  // circle under diag(a, b) has the jets of ellipse(a, b)
  const AffineMap diag{{2, 0, 0, 1}, {0, 0}};
  const ParamCurve img = transform(c, diag);
  const ParamCurve ell = ellipse_curve(2, 1);
  for (double t : {0.0, 0.9, 2.5}) {
    check_vec(img.eval(t).x, ell.eval(t).x);
    check_vec(img.eval(t).d2, ell.eval(t).d2);
  }

  // shear commutes with differentiation
  const AffineMap shear{{1, 1, 0, 1}, {0, 0}};
  const ParamCurve sh = transform(ell, shear);
  for (double t : {0.3, 1.7}) {
    check_vec(sh.eval(t).d2, shear.apply_vector(ell.eval(t).d2));
  }

  CHECK_THROWS_AS(transform(c, AffineMap{{1, 2, 2, 4}, {0, 0}}),
                  SingularMapError);
}

TEST_CASE("transform round trip reproduces jets") {
  const AffineMap A{{1.3, 0.4, -0.2, 0.9}, {0.7, -1.1}};
  const ParamCurve c = bean_curve();
  const ParamCurve back = transform(transform(c, A), A.inverse());
  for (double t : {0.1, 0.65, 1.4}) {
    const CurveJet a = c.eval(t), b = back.eval(t);
    CHECK(dist(a.x, b.x) < 1e-10 * (1 + norm(a.x)));
    CHECK(dist(a.d1, b.d1) < 1e-10 * (1 + norm(a.d1)));
    CHECK(dist(a.d3, b.d3) < 1e-10 * (1 + norm(a.d3)));
  }
}

TEST_CASE("evaluators are safe to call from multiple threads") {
  const ParamCurve bean = bean_curve();
  std::array<std::thread, 4> workers;
  std::array<double, 4> sums{};
  for (int w = 0; w < 4; ++w)
    workers[w] = std::thread([&, w] {
      double acc = 0.0;
      for (int i = 0; i < 2000; ++i)
        acc += bean.eval(w * 0.5 + 2.0 * i / 2000).x.x;
      sums[w] = acc;
    });
  for (auto& th : workers) th.join();
  // same parameter set per thread modulo the period shift: finite results
  for (double s : sums) CHECK(std::isfinite(s));
}

TEST_CASE("sampled curve estimates jets") {
  std::vector<double> ts;
  std::vector<Vec2> xs;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    const double t = 2 * kPi * i / n;
    ts.push_back(t);
    xs.push_back({std::cos(t), std::sin(t)});
  }
  const ParamCurve c = sampled_curve(ts, xs, true);
  const CurveJet j = c.eval(1.234);
  CHECK(j.estimated);
  CHECK(dist(j.x, {std::cos(1.234), std::sin(1.234)}) < 1e-8);
  CHECK(dist(j.d1, {-std::sin(1.234), std::cos(1.234)}) < 1e-5);
  CHECK(dist(j.d2, {-std::cos(1.234), -std::sin(1.234)}) < 1e-3);
  CHECK_THROWS_AS(sampled_curve({0, 1}, {{0, 0}, {1, 1}}, false), ConfigError);
}
