// Command-line front end: per-point invariant tables, envelope computation
// with CSV/SVG output, alpha sweeps, and the analytic Monge-form classifiers.
//
// Exit codes: 0 ok, 2 configuration or invariant error, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eil/eil.hpp"

namespace fs = std::filesystem;
using eil::json;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  int grid_n = 0;
  std::vector<double> alphas;
  int samples = 0;
};

eil::RunConfig load_config(const CliOptions& cli) {
  eil::json j = eil::json::object();
  if (!cli.config_path.empty()) {
    std::ifstream in(cli.config_path);
    if (!in) throw eil::ConfigError("cannot open config " + cli.config_path);
    in >> j;
  }
  eil::RunConfig cfg = eil::RunConfig::from_json(j);
  if (!cli.out_dir.empty()) cfg.out_dir = cli.out_dir;
  if (cli.grid_n > 0) cfg.grid_n = cli.grid_n;
  if (!cli.alphas.empty()) cfg.alphas = cli.alphas;
  if (cli.samples > 0) cfg.samples = cli.samples;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw eil::ConfigError("cannot write " + p.string());
  return os;
}

std::string alpha_slug(double a) {
  std::string s = eil::fmt_num(a);
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

int cmd_invariants(const eil::RunConfig& cfg) {
  const eil::ParamCurve curve = cfg.curve();
  auto os = open_out(fs::path(cfg.out_dir) / "invariants.csv");
  eil::write_invariants_csv(os, curve, cfg.samples);
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "invariants.csv").string()
            << "\n";
  return 0;
}

int cmd_envelope(const eil::RunConfig& cfg) {
  const eil::ParamCurve curve = cfg.curve();
  eil::BuildOptions opt;
  opt.grid_n = cfg.grid_n;
  opt.online_tol = cfg.tol_online;
  opt.trace.tol_refine = cfg.tol_refine;
  for (double a : cfg.alphas) {
    const eil::AlphaParam ap(a);
    eil::BuildResult res = eil::build_envelope(curve, ap, opt);
    for (auto& b : res.branches) {
      if (b.tag != eil::EnvelopeTag::AEIL && b.tag != eil::EnvelopeTag::IPTL)
        continue;
      b.cusp_markers = eil::scan_branch(curve, b);
    }
    const std::string slug = alpha_slug(a);
    if (cfg.emit_csv) {
      auto os = open_out(fs::path(cfg.out_dir) / ("envelope_a" + slug + ".csv"));
      eil::write_envelope_csv(os, res.branches);
      try {
        auto locus = eil::trace_locus(curve, ap, cfg.grid_n, opt.trace);
        auto pb = eil::parallel_pairs(curve, cfg.grid_n, opt.trace);
        locus.push_back(pb);
        auto ps = open_out(fs::path(cfg.out_dir) / ("pairs_a" + slug + ".csv"));
        eil::write_pairs_csv(ps, locus, curve, ap);
      } catch (const eil::Error&) {
        // no pair locus at this alpha (e.g. circle); envelope CSV stands
      }
    }
    if (cfg.emit_svg) {
      auto os = open_out(fs::path(cfg.out_dir) / ("envelope_a" + slug + ".svg"));
      eil::write_envelope_svg(os, curve, res.branches);
    }
    std::cout << "alpha " << eil::fmt_num(a) << ": " << res.branches.size()
              << " branches, min AEIL-IPTL distance "
              << eil::fmt_num(res.aeil_iptl_min_distance) << "\n";
    for (const auto& line : res.log) std::cout << "  note: " << line << "\n";
  }
  return 0;
}

int cmd_sweep(const eil::RunConfig& cfg, const CliOptions& cli) {
  const eil::ParamCurve curve = cfg.curve();
  eil::SweepOptions opt;
  opt.build.grid_n = cfg.grid_n;
  std::vector<double> alphas =
      cli.alphas.empty() ? eil::default_alpha_grid() : cli.alphas;
  const eil::SweepResult sweep = eil::alpha_sweep(curve, alphas, opt);
  const eil::json rep = eil::sweep_report_json(sweep);
  if (cfg.emit_json) {
    auto os = open_out(fs::path(cfg.out_dir) / "sweep.json");
    os << rep.dump(2) << "\n";
  }
  std::cout << sweep.events.size() << " transition event(s)\n";
  for (const auto& ev : sweep.events)
    std::cout << "  alpha* = " << eil::fmt_num(ev.alpha_star) << " "
              << ev.kind() << " on " << eil::to_string(ev.tag) << "\n";
  return 0;
}

int cmd_classify(const eil::RunConfig& cfg, const std::string& input,
                 const std::string& family) {
  eil::json j;
  if (!input.empty()) {
    std::ifstream in(input);
    if (!in) throw eil::ConfigError("cannot open " + input);
    in >> j;
  } else {
    throw eil::ConfigError("classify needs an input JSON file");
  }
  const eil::MongeJetPair m = eil::monge_from_json(j);
  const eil::json rep = eil::classify_report_json(m, family);
  std::cout << rep.dump(2) << "\n";
  if (cfg.emit_json && !cfg.out_dir.empty()) {
    auto os = open_out(fs::path(cfg.out_dir) / "classify.json");
    os << rep.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"envelope of intermediate lines of a plane curve"};
  app.require_subcommand(1);

  CliOptions cli;
  app.add_option("--config", cli.config_path, "run configuration JSON");
  app.add_option("--out", cli.out_dir, "output directory");
  app.add_option("--grid", cli.grid_n, "trace grid size per axis");
  app.add_option("--alpha", cli.alphas, "alpha values in (0, 1)")
      ->delimiter(',');

  auto* inv = app.add_subcommand("invariants", "per-point invariant table (CSV)");
  inv->add_option("--samples", cli.samples, "number of parameter samples");
  inv->fallthrough();

  auto* env = app.add_subcommand("envelope", "AEIL + IPTL + CTL per alpha (CSV/SVG)");
  env->fallthrough();

  auto* swp = app.add_subcommand("sweep", "cusp inventory and events across alpha (JSON)");
  swp->fallthrough();

  std::string classify_input, classify_family;
  auto* cls = app.add_subcommand("classify", "analytic Monge-form classification (JSON)");
  cls->add_option("input", classify_input, "Monge jet pair JSON file");
  cls->add_option("--family", classify_family,
                  "nonparallel | parallel | parallel_inflection");
  cls->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    const eil::RunConfig cfg = load_config(cli);
    if (inv->parsed()) return cmd_invariants(cfg);
    if (env->parsed()) return cmd_envelope(cfg);
    if (swp->parsed()) return cmd_sweep(cfg, cli);
    if (cls->parsed()) return cmd_classify(cfg, classify_input, classify_family);
    return 2;
  } catch (const eil::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const eil::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const eil::PreconditionViolated& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return 2;
  } catch (const eil::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
