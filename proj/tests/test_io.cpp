#include <catch2/catch_amalgamated.hpp>
#include <sstream>

#include "eil/io.hpp"

using namespace eil;
using Catch::Approx;

TEST_CASE("number formatting") {
  CHECK(fmt_num(0.5) == "0.5");
  CHECK(fmt_num(2.0 / 3.0) == "0.666666666667");
  CHECK(fmt_sci(1.5e-12).find("e-12") != std::string::npos);
}

TEST_CASE("curve_from_json") {
  const ParamCurve bean = curve_from_json(json{{"name", "bean"}});
  CHECK(bean.label() == "bean");
  const ParamCurve ell =
      curve_from_json(json{{"name", "ellipse"}, {"params", {2.0, 1.0}}});
  CHECK(ell.closed());
  json samples = json::object();
  samples["closed"] = false;
  samples["samples"] = json::array();
  for (int i = 0; i < 12; ++i)
    samples["samples"].push_back({0.1 * i, 0.1 * i, 0.005 * i * i});
  const ParamCurve s = curve_from_json(samples);
  CHECK_FALSE(s.closed());
  CHECK(s.eval(0.5).estimated);
  CHECK_THROWS_AS(curve_from_json(json{{"foo", 1}}), ConfigError);
}

TEST_CASE("RunConfig parsing and validation") {
  json j;
  j["curve"] = {{"name", "circle"}};
  j["alphas"] = {0.25, 0.75};
  j["grid_n"] = 128;
  j["tolerances"] = {{"refine", 1e-11}};
  const RunConfig cfg = RunConfig::from_json(j);
  CHECK(cfg.alphas.size() == 2);
  CHECK(cfg.grid_n == 128);
  CHECK(cfg.tol_refine == Approx(1e-11));
  CHECK(cfg.tol_online == Approx(1e-8));

  json bad = j;
  bad["alphas"] = {1.5};
  CHECK_THROWS_AS(RunConfig::from_json(bad), ConfigError);
  bad = j;
  bad["grid_n"] = 8;
  CHECK_THROWS_AS(RunConfig::from_json(bad), ConfigError);
}

TEST_CASE("invariants CSV: header, mu column for the ellipse") {
  std::ostringstream os;
  write_invariants_csv(os, ellipse_curve(2, 1), 16);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x,y,kappa,mu,xi_x,xi_y");
  int rows = 0;
  const double expected = std::pow(2.0, -2.0 / 3.0);
  while (std::getline(in, line)) {
    ++rows;
    // mu is the 5th column
    std::size_t pos = 0;
    for (int c = 0; c < 4; ++c) pos = line.find(',', pos) + 1;
    const double mu = std::stod(line.substr(pos));
    CHECK(mu == Approx(expected).margin(1e-8));
  }
  CHECK(rows == 16);
}

TEST_CASE("envelope CSV columns and determinism") {
  const ParamCurve bean = bean_curve();
  BuildOptions opt;
  opt.grid_n = 128;
  const BuildResult res = build_envelope(bean, AlphaParam(0.6), opt);
  std::ostringstream a, b;
  write_envelope_csv(a, res.branches);
  write_envelope_csv(b, res.branches);
  CHECK(a.str() == b.str());
  std::istringstream in(a.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "tag,branch_id,t,s,alpha,x,y,online_residual,detM_residual");
  CHECK(a.str().find("AEIL") != std::string::npos);
  CHECK(a.str().find("IPTL") != std::string::npos);
  CHECK(a.str().find("CTL") != std::string::npos);
}

TEST_CASE("SVG emitter follows the color convention") {
  const ParamCurve bean = bean_curve();
  BuildOptions opt;
  opt.grid_n = 128;
  opt.with_detm = false;
  SECTION("alpha = 0.5: red MPTL, blue AESS, green evolute") {
    const BuildResult res = build_envelope(bean, AlphaParam(0.5), opt);
    std::ostringstream os;
    write_envelope_svg(os, bean, res.branches);
    const std::string svg = os.str();
    CHECK(svg.find("stroke=\"red\"") != std::string::npos);
    CHECK(svg.find("stroke=\"blue\"") != std::string::npos);
    CHECK(svg.find("stroke=\"green\"") != std::string::npos);
    CHECK(svg.find("stroke=\"black\"") != std::string::npos);
    CHECK(svg.find("viewBox=") != std::string::npos);
  }
  SECTION("circle at alpha = 0.6 has an empty AEIL layer") {
    const BuildResult res = build_envelope(circle_curve(), AlphaParam(0.6), opt);
    std::ostringstream os;
    write_envelope_svg(os, circle_curve(), res.branches);
    CHECK(os.str().find("stroke=\"blue\"") == std::string::npos);
    CHECK(os.str().find("stroke=\"red\"") != std::string::npos);
  }
}

TEST_CASE("pairs CSV") {
  const ParamCurve c = circle_curve();
  const PairBranch b = parallel_pairs(c, 64);
  std::ostringstream os;
  write_pairs_csv(os, {b}, c, AlphaParam(0.6));
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "branch_id,kind,t,s,residual");
  CHECK(os.str().find("parallel") != std::string::npos);
}

TEST_CASE("sweep report JSON has a schema and ordered events") {
  SweepResult sweep;
  sweep.inventory.push_back({0.3, 1, 0, {{EnvelopeTag::AEIL, 0.1, 0.9, SingClass::OrdinaryCusp}}});
  TransitionEvent e1{0.4, true, EnvelopeTag::IPTL, 0.0, 0.0};
  TransitionEvent e2{0.2, false, EnvelopeTag::AEIL, 1.0, 2.0};
  sweep.events = {e2, e1};
  const json rep = sweep_report_json(sweep);
  CHECK(rep["schema"] == "1");
  CHECK(rep["events"].size() == 2);
  CHECK(rep["events"][0]["kind"] == "cusp_death");
  CHECK(rep["inventory"][0]["counts"]["AEIL"] == 1);
}

TEST_CASE("classify report JSON") {
  SECTION("ordinary cusp of the parallel family") {
    json j;
    j["alpha"] = 0.25;
    j["a3"] = 0.9;
    j["b0"] = 2.0;
    j["b2"] = -1.0 / 6.0;
    j["b3"] = 0.9 / 9.0 + 0.4;
    const json rep = classify_report_json(monge_from_json(j));
    CHECK(rep["schema"] == "1");
    CHECK(rep["family"] == "parallel");
    CHECK(rep["klass"] == "OrdinaryCusp");
  }
  SECTION("versality at the critical a3 is false") {
    const double alpha = 0.4, b1 = 2.0;
    const double a3 = -(5 * alpha - 1) / (6 * alpha * alpha * b1);
    const double b0 = 3.0;
    json j;
    j["alpha"] = alpha;
    j["a3"] = a3;
    j["b0"] = b0;
    j["b1"] = b1;
    j["b2"] = (alpha - 1) / (2 * alpha);
    const double num = -6 * alpha * a3 * b0 * b1 * b1 +
                       4 * alpha * a3 * b0 * b0 - 3 * alpha * b1 * b1 * b1 -
                       2 * a3 * b0 * b0;
    const double den = 2 * alpha * b0 *
                       (6 * alpha * a3 * b0 * b1 + 3 * alpha * b1 * b1 +
                        2 * alpha * b0 - b0);
    j["b3"] = (alpha - 1) * num / den;
    const json rep = classify_report_json(monge_from_json(j));
    CHECK(rep["klass"] == "OrdinaryCusp");
    CHECK(rep["versal"] == false);
  }
  SECTION("invariant violation for b0 <= 0") {
    json j;
    j["b0"] = -1.0;
    CHECK_THROWS_AS(monge_from_json(j), InvariantViolation);
  }
}
