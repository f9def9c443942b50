#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;

namespace {

struct Result {
  int status;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(OCCUTHRESH_TOOL_PATH) + " " + args + " 2>cli_stderr.txt";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("threshold subcommand") {
  const Result r = run("threshold --k 4");
  REQUIRE(r.status == 0);
  const json doc = json::parse(r.out);
  CHECK(std::abs(doc["data"]["d_star"].get<double>() - 2.826778) <= 5e-6);
  CHECK(doc["manifest"]["subcommand"] == "threshold");
  CHECK(doc["manifest"].contains("started_at"));
  CHECK(json::parse(run("threshold --k 10").out)["data"]["bounds_ok"] == true);
  CHECK(run("threshold --k 3").status == 2);
  CHECK(run("threshold --k 4 --bogus").status == 2);
  CHECK(run("threshold").status == 2);
  CHECK(run("").status == 2);
}

TEST_CASE("satprob subcommand") {
  const Result below = run("satprob --k 4 --d 2 --n 8,16,24 --trials 200 --seed 7 --threads 1");
  REQUIRE(below.status == 0);
  const auto rows = csv_rows(below.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"n", "trials", "sat_count", "sat_fraction", "ci_low",
                                            "ci_high", "seed"});
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(std::stod(rows[i][3]) >= 0.9);
    CHECK(rows[i][6] == "7");
  }
  const Result above = run("satprob --k 4 --d 3 --n 8,16,24 --trials 200 --seed 7 --threads 1");
  const auto up = csv_rows(above.out);
  CHECK(std::stod(up[1][3]) > std::stod(up[2][3]));
  CHECK(std::stod(up[2][3]) > std::stod(up[3][3]));

  CHECK(run("satprob --k 4 --d 3 --n 8,16,24 --trials 200 --seed 7 --threads 4").out == above.out);
  CHECK(run("satprob --k 4 --d 3 --n 8,16,24 --trials 200 --seed 7 --threads 1").out == above.out);

  REQUIRE(run("satprob --k 4 --d 2 --n 8 --trials 20 --seed 1 --out sat.csv").status == 0);
  const std::string first = slurp("sat.csv");
  const json manifest = json::parse(slurp("sat.csv.manifest.json"));
  CHECK(manifest["master_seed"] == 1);
  REQUIRE(run("satprob --k 4 --d 2 --n 8 --trials 20 --seed 1 --out sat.csv --threads 3").status == 0);
  CHECK(slurp("sat.csv") == first);

  CHECK(run("satprob --k 4 --d 2 --n 8 --trials 20").status == 2);
  CHECK(run("satprob --k 4 --d 2 --n 40 --trials 2 --seed 1").status == 2);
  CHECK(run("satprob --k 4 --d 2 --n 8 --trials 0 --seed 1").status == 2);
}

TEST_CASE("cycles subcommand is thread-count independent") {
  const std::string args = "cycles --k 4 --d 3 --n 100 --samples 300 --l-max 3 --seed 9";
  const Result a = run(args + " --threads 1");
  REQUIRE(a.status == 0);
  CHECK(run(args + " --threads 3").out == a.out);
  const auto rows = csv_rows(a.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0][0] == "l");
}

TEST_CASE("moments subcommand") {
  const Result r = run("moments --k 4 --d 2 --n 4 --exact");
  REQUIRE(r.status == 0);
  const json data = json::parse(r.out)["data"];
  CHECK(data["ln_EZ_exact"].get<double>() == doctest::Approx(std::log(108.0 / 35.0)).epsilon(1e-12));
  CHECK(data["enumerated"]["ln_EZ"].get<double>() ==
        doctest::Approx(std::log(108.0 / 35.0)).epsilon(1e-12));
  CHECK(data["enumerated"]["configurations"] == 40320);
  CHECK(data["ln_ratio_exact"].get<double>() == doctest::Approx(std::log(35.0 / 27.0)).epsilon(1e-12));
  CHECK(run("moments --k 4 --d 2 --n 40 --exact").status == 2);
  CHECK(run("moments --k 3 --d 2 --n 6").status == 2);
}

TEST_CASE("verify-k4 and conjecture subcommands") {
  std::remove("cert.json");
  const Result r = run("verify-k4 --out cert.json");
  CHECK(r.status == 0);
  const json cert = json::parse(slurp("cert.json"))["data"];
  CHECK(cert["checks"].size() == 5);
  CHECK(cert["w_bar"].get<double>() > 0.108);
  CHECK(cert["grid_resolution"] == 100000);
  CHECK(run("verify-k4 --grid 100 --out cert_small.json").status == 2);

  const Result c = run("conjecture --k 5 --grid 100");
  REQUIRE(c.status == 0);
  const json data = json::parse(c.out)["data"];
  CHECK(data["conjectured"].get<double>() == doctest::Approx(0.2922852532).epsilon(1e-9));
  CHECK(data.contains("sup"));
  CHECK(data.contains("gap"));
}

TEST_CASE("sample, count and sdpi subcommands") {
  REQUIRE(run("sample --k 4 --d 2 --n 8 --seed 3 --out cfg.json").status == 0);
  const std::string cfg = slurp("cfg.json");
  CHECK(run("sample --k 4 --d 2 --n 8 --seed 3").out == cfg);
  const Result counted = run("count --input cfg.json");
  REQUIRE(counted.status == 0);
  const json data = json::parse(counted.out)["data"];
  CHECK(data["n"] == 8);
  CHECK(data["cycles"].size() == 4);
  CHECK(data["cycles"][0] == data["two_cycles"]);

  REQUIRE(run("sample --k 4 --d 3 --n 24 --seed 3 --simple --out simple.json").status == 0);
  CHECK(json::parse(run("count --input simple.json --l-max 1").out)["data"]["two_cycles"] == 0);

  {
    std::ofstream bad("bad.json");
    bad << R"({"n":4,"d":2,"k":4,"r":2,"m":2,"wiring":[0,0,1,2,3,4,5,6]})";
  }
  CHECK(run("count --input bad.json").status == 2);
  CHECK(run("count --input missing.json").status == 2);

  {
    std::ofstream ch("bsc.json");
    ch << R"({"n_in":2,"n_out":2,"matrix":[0.9,0.1,0.1,0.9],"reference_pmf":[0.5,0.5]})";
  }
  const Result s = run("sdpi --input bsc.json --grid-depth 200");
  REQUIRE(s.status == 0);
  CHECK(json::parse(s.out)["data"]["d_star"].get<double>() == doctest::Approx(0.64).epsilon(1e-3));
}
