// End-to-end checks of the eil binary: file outputs, exit codes, and
// bit-identical reruns.
#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return EIL_CLI_PATH; }

int run(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("eil_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
}

}  // namespace

TEST_CASE("invariants subcommand emits the ellipse table") {
  const fs::path dir = fresh_dir("inv");
  write_file(dir / "cfg.json",
             R"({"curve": {"name": "ellipse", "params": [2, 1]}})");
  REQUIRE(run("invariants --config " + (dir / "cfg.json").string() + " --out " +
              dir.string() + " --samples 64") == 0);
  const std::string csv = slurp(dir / "invariants.csv");
  CHECK(csv.rfind("t,x,y,kappa,mu,xi_x,xi_y", 0) == 0);
  // mu = 2^(-2/3) = 0.6299605249...
  CHECK(csv.find("0.62996052494") != std::string::npos);
}

TEST_CASE("envelope subcommand writes CSV and SVG per alpha") {
  const fs::path dir = fresh_dir("env");
  write_file(dir / "cfg.json", R"({"curve": {"name": "bean"}})");
  REQUIRE(run("envelope --config " + (dir / "cfg.json").string() + " --out " +
              dir.string() + " --grid 128 --alpha 0.6") == 0);
  CHECK(fs::exists(dir / "envelope_a0p6.csv"));
  CHECK(fs::exists(dir / "envelope_a0p6.svg"));
  CHECK(fs::exists(dir / "pairs_a0p6.csv"));
  const std::string svg = slurp(dir / "envelope_a0p6.svg");
  CHECK(svg.find("stroke=\"blue\"") != std::string::npos);
  CHECK(svg.find("stroke=\"red\"") != std::string::npos);
}

TEST_CASE("repeated runs are bit-identical") {
  const fs::path d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
  write_file(d1 / "cfg.json", R"({"curve": {"name": "bean"}})");
  const std::string cfg = (d1 / "cfg.json").string();
  REQUIRE(run("envelope --config " + cfg + " --out " + d1.string() +
              " --grid 128 --alpha 0.6") == 0);
  REQUIRE(run("envelope --config " + cfg + " --out " + d2.string() +
              " --grid 128 --alpha 0.6") == 0);
  CHECK(slurp(d1 / "envelope_a0p6.csv") == slurp(d2 / "envelope_a0p6.csv"));
  CHECK(slurp(d1 / "envelope_a0p6.svg") == slurp(d2 / "envelope_a0p6.svg"));
}

TEST_CASE("classify subcommand and exit codes") {
  const fs::path dir = fresh_dir("cls");
  write_file(dir / "cusp.json",
             R"({"alpha": 0.25, "a3": 0.9, "b0": 2.0, "b2": -0.16666666666666666,
                 "b3": 0.5})");
  REQUIRE(run("classify " + (dir / "cusp.json").string() + " --out " +
              dir.string()) == 0);
  const std::string rep = slurp(dir / "classify.json");
  CHECK(rep.find("\"OrdinaryCusp\"") != std::string::npos);

  write_file(dir / "bad.json", R"({"alpha": 0.25, "b0": -2.0})");
  CHECK(run("classify " + (dir / "bad.json").string()) == 2);
  CHECK(run("classify " + (dir / "missing.json").string()) == 2);
}

TEST_CASE("sweep subcommand on the circle reports no events") {
  const fs::path dir = fresh_dir("swp");
  write_file(dir / "cfg.json", R"({"curve": {"name": "circle"}})");
  REQUIRE(run("sweep --config " + (dir / "cfg.json").string() + " --out " +
              dir.string() + " --grid 96 --alpha 0.25,0.4,0.75") == 0);
  const std::string rep = slurp(dir / "sweep.json");
  CHECK(rep.find("\"schema\": \"1\"") != std::string::npos);
  CHECK(rep.find("\"events\": []") != std::string::npos);
}
