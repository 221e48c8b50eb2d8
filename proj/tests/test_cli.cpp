#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI in a scratch directory, capturing stdout.
Result cli(const std::string& args) {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "needle_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  const std::string cmd = "cd '" + dir.string() + "' && '" NEEDLE_CLI "' " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string scratch(const std::string& name) {
  return (fs::temp_directory_path() / "needle_cli_tests" / name).string();
}

}  // namespace

TEST_CASE("coeffs prints the MCP constant") {
  const auto r = cli("coeffs --K 0 --N 3 --what c_knd");
  CHECK(r.code == 0);
  CHECK(r.out == "4\n");
  CHECK(cli("coeffs --K -1 --N 2 --D 2 --what c_kd").out == "7.3890560989306504\n");
}

TEST_CASE("verify basic on sin") {
  const auto r = cli("verify basic --fn sin --freq 1");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["schema"] == 1);
  CHECK(j["holds"] == true);
  CHECK(j["lhs"].get<double>() == doctest::Approx(0.15915).epsilon(1e-4));
}

TEST_CASE("reports are byte-identical for identical runs") {
  const auto a = cli("verify basic --fn pwl-random --seed 11");
  const auto b = cli("verify basic --fn pwl-random --seed 11");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(nlohmann::json::parse(a.out)["seed"] == 11);
  CHECK(cli("sharpness --n-max 6 --jobs 1").out == cli("sharpness --n-max 6 --jobs 3").out);
}

TEST_CASE("usage and input errors exit 1") {
  std::ofstream(scratch("bad.json")) << "{\"interval\":[0,1],";
  CHECK(cli("check-density --density bad.json").code == 1);
  CHECK(cli("verify sideways").code == 1);
  CHECK(cli("").code == 1);
  CHECK(cli("verify basic --tol -1").code == 1);
  CHECK(cli("verify basic --N many").code == 1);
  CHECK(cli("verify basic --input missing.csv").code == 1);
  CHECK(cli("verify basic --fn cos-mode --freq 2").code == 1);  // not single-ray
}

TEST_CASE("violations exit 2 with a witness bundle") {
  fs::remove(scratch("mcp.json.witness.json"));
  const auto r = cli("check-density --density exp-10 --what mcp --K 0 --N 2 --out mcp.json");
  CHECK(r.code == 2);
  std::ifstream w(scratch("mcp.json.witness.json"));
  REQUIRE(w);
  const auto j = nlohmann::json::parse(w);
  CHECK(j["config"]["command"] == "check-density");
  CHECK(j["result"]["passed"] == false);
  CHECK(j["result"]["witness"].is_object());
  // A certified density exits 0.
  CHECK(cli("check-density --density sin2 --K 2 --N 3 --grid 24").code == 0);
}

TEST_CASE("file inputs") {
  std::ofstream(scratch("f.csv")) << "x,f\n0,0\n0.25,1\n0.5,0\n0.75,-1\n1,0\n";
  const auto r = cli("verify basic --input f.csv");
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["metadata"]["perimeter"] == 1);
  std::ofstream(scratch("h.json")) << R"({"interval":[0,1],"kind":"power","params":{"p":1}})";
  CHECK(cli("verify mcp --density h.json --K 0 --N 2").code == 0);
  std::ofstream(scratch("p.json")) << R"({"density":{"interval":[0,1],"kind":"constant"},"grid_n":400,"modes":6})";
  const auto e = cli("eigen --input p.json --out eig");
  CHECK(e.code == 0);
  CHECK(nlohmann::json::parse(e.out)["lambda"].size() == 6);
  CHECK(fs::exists(scratch("eig.csv")));
}

TEST_CASE("spectral subcommands") {
  CHECK(cli("nodal-bound cd --K 0 --grid 800").code == 0);
  CHECK(cli("nodal-bound mcp --K 0 --N 2 --grid 800 --k 3").code == 0);
  CHECK(cli("heat-upper --N 1 --grid 800").code == 0);
  CHECK(cli("combo nodal --coeffs 2:1,3:0.5 --N 2 --grid 800").code == 0);
  CHECK(cli("combo heat --coeffs 2:1,5:-0.3 --N 2 --grid 800").code == 0);
  CHECK(cli("combo heat --coeffs 2").code == 1);
  CHECK(cli("main5-chain --N 2 --c-ext 2 --grid 800 --k 4").code == 0);
  CHECK(cli("product-demo --grid 16").code == 0);
}
