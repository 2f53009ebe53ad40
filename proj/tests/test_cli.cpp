#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#ifndef SCHATTEN_CLI_PATH
#error "SCHATTEN_CLI_PATH must point at the CLI binary"
#endif

namespace {

using nlohmann::json;

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string out_path = "cli_out_" + std::to_string(counter++) + ".txt";
  const std::string cmd =
      std::string(SCHATTEN_CLI_PATH) + " " + args + " > " + out_path + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  RunResult res;
  res.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  res.out = ss.str();
  std::remove(out_path.c_str());
  return res;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string strip_elapsed(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("elapsed_s") == std::string::npos) out << line << "\n";
  return out.str();
}

}  // namespace

TEST_CASE("cli help and usage errors") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("hanner --help").code == 0);
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("bogus").code == 2);
  CHECK(run_cli("embed --a only_a.json").code == 2);
  CHECK(run_cli("hanner --trials notanumber").code == 2);
  CHECK(run_cli("probe-conjecture --k 9 --trials 2").code == 2);
  CHECK(run_cli("even-p --p 6 --trials 2").code == 2);
  CHECK(run_cli("refute-3d --p 3").code == 2);
  CHECK(run_cli("deriv-check --k 7 --trials 1").code == 2);
}

TEST_CASE("cli embed runs the full pipeline on fixture matrices") {
  write_file("cli_a.json",
             R"({"n": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]], "label": "az"})");
  write_file("cli_b.json",
             R"({"n": 2, "entries": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]], "label": "bx"})");

  const RunResult res =
      run_cli("embed --a cli_a.json --b cli_b.json --directions 120 --tol 1e-4 "
              "--csv cli_embed.csv");
  REQUIRE(res.code == 0);
  const json rep = json::parse(res.out);
  CHECK(rep["command"] == "embed");
  CHECK(rep["summary"]["pass"] == true);
  const json& r0 = rep["results"][0];
  CHECK(r0["a_label"] == "az");
  CHECK(r0["a_hermitian"] == true);
  CHECK(r0["dilated"] == false);
  CHECK(double(r0["max_error"]) <= 1e-4);
  CHECK(r0["atoms"].size() > 10);
  // the profile of this pair is direction independent, so the measure mass
  // must match the isotropic value 3 pi / 2
  CHECK(std::abs(double(r0["total_mass"]) - 3.0 * std::numbers::pi / 2.0) < 1e-6);

  std::ifstream csv("cli_embed.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "atom,theta,mass");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == static_cast<int>(r0["atoms"].size()));
  std::remove("cli_embed.csv");

  write_file("cli_bad.json", R"({"n": 2, "entries": [[[1, 0]]]})");
  CHECK(run_cli("embed --a cli_bad.json --b cli_b.json").code == 2);
  CHECK(run_cli("embed --a cli_missing.json --b cli_b.json").code == 2);
  std::remove("cli_bad.json");
  std::remove("cli_a.json");
  std::remove("cli_b.json");
}

TEST_CASE("cli batteries pass at small sizes") {
  const char* cmds[] = {
      "verify --trials 3 --n 2 --directions 60 --seed 5",
      "hanner --p 3 --trials 10 --n 2 --seed 5",
      "hanner --p 1.5 --trials 10 --n 2 --seed 5",
      "deriv-check --k 1 --trials 3 --n 2 --seed 5",
      "pattern-sums --trials 3 --n 2 --seed 5",
      "even-p --p 2 --trials 3 --n 2 --seed 5",
      "even-p --p 4 --trials 3 --n 2 --directions 24 --seed 5",
      "probe-conjecture --k 2 --trials 3 --seed 5",
  };
  for (const char* cmd : cmds) {
    CAPTURE(cmd);
    const RunResult res = run_cli(cmd);
    CHECK(res.code == 0);
    const json rep = json::parse(res.out);
    CHECK(rep["summary"]["pass"] == true);
    CHECK(rep.contains("command"));
    CHECK(rep.contains("seed"));
    CHECK(rep.contains("params"));
    CHECK(rep.contains("results"));
    CHECK(rep.contains("elapsed_s"));
  }
}

TEST_CASE("cli reports a mathematical failure with the worst instance") {
  const RunResult res = run_cli("verify --trials 3 --n 2 --directions 60 --tol 1e-16 --seed 5");
  CHECK(res.code == 1);
  const json rep = json::parse(res.out);
  CHECK(rep["summary"]["pass"] == false);
  REQUIRE(rep.contains("worst_instance"));
  CHECK(rep["worst_instance"]["a"]["n"] == 2);
  CHECK(rep["worst_instance"]["b"]["entries"].size() == 2);
}

TEST_CASE("cli reports are byte identical modulo the elapsed field") {
  const std::string cmd = "even-p --p 4 --trials 3 --n 2 --directions 24 --seed 11";
  const RunResult first = run_cli(cmd);
  const RunResult second = run_cli(cmd);
  REQUIRE(first.code == 0);
  CHECK(strip_elapsed(first.out) == strip_elapsed(second.out));
  CHECK(first.out.find("elapsed_s") != std::string::npos);

  const RunResult other = run_cli("even-p --p 4 --trials 3 --n 2 --directions 24 --seed 12");
  CHECK(strip_elapsed(first.out) != strip_elapsed(other.out));
}

TEST_CASE("cli refute-3d prints the exact rational obstruction") {
  const RunResult res = run_cli("refute-3d --p 4 --out cli_refute.json");
  REQUIRE(res.code == 0);
  const json rep = json::parse(res.out);
  const json& r0 = rep["results"][0];
  CHECK(r0["mu_p"] == "2");
  CHECK(r0["mu_mid"] == "4");
  CHECK(r0["mu_low"] == "16/3");
  CHECK(r0["combo"] == "-2/3");
  CHECK(double(r0["grid_residual"]) >= 0.01);

  std::ifstream saved("cli_refute.json");
  std::stringstream ss;
  ss << saved.rdbuf();
  CHECK(ss.str() == res.out);
  std::remove("cli_refute.json");
}
