#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "slicedmi/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "smi");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = slicedmi::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "smi_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("analytic si saturation limit") {
  const Result r = run({"analytic", "si", "--d", "2", "--rho-sq-limit"});
  CHECK(r.code == 0);
  CHECK(r.out == "0.693147\n");
}

TEST_CASE("analytic subcommands") {
  CHECK(run({"analytic", "si", "--d", "1", "--rho", "0.6"}).out == "0.223144\n");
  CHECK(run({"analytic", "msmi", "--canonical", "0.5,0.3", "--k", "1"}).out == "0.143841\n");
  CHECK(run({"analytic", "mi", "--canonical", "0.5,0.3"}).out == "0.190996\n");
  const Result csv = run({"analytic", "si", "--d", "4", "--rho", "0.99", "--format", "csv"});
  CHECK(csv.out.find("quadrature") != std::string::npos);
  const Result json = run({"analytic", "ksmi", "--d", "6", "--k", "2", "--rho", "0.8", "--n-mc", "1000",
                           "--format", "json"});
  CHECK(json.code == 0);
  CHECK(json.out.find("\"std_error\"") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"analytic", "si", "--d", "2", "--bogus"}).code == 1);
  CHECK(run({"analytic", "si", "--d", "2", "--rho", "1.5"}).code == 1);
  CHECK(run({"analytic", "si", "--d", "1", "--rho-sq-limit"}).code == 1);
  CHECK(run({"estimate", "--input", "/nonexistent.csv", "--x-cols", "0", "--y-cols", "1"}).code == 1);
  CHECK(run({"--help"}).code == 0);

  const auto dir = temp_dir();
  std::ofstream(dir / "singular.cfg") << "mixing_matrix = 1, 1; 1, 1\nn_samples = 100\nn_runs = 1\nn_slices = 1\n";
  const Result r = run({"awgn", "--config", (dir / "singular.cfg").string(), "--base", "normal",
                        "--normalization", "whitening"});
  CHECK(r.code == 2);
  CHECK(r.err.find("numerical") != std::string::npos);
}

TEST_CASE("estimate on independent noise") {
  const auto dir = temp_dir();
  const auto data = (dir / "noise.csv").string();
  REQUIRE(run({"generate", "--family", "correlated_normal", "--d", "1", "--mi", "0", "--n", "10000", "--seed", "4",
               "--out", data})
              .code == 0);
  const std::string meta = slurp(data + ".meta");
  CHECK(meta.find("ground_truth_mi = 0\n") != std::string::npos);
  const Result r = run({"estimate", "--input", data, "--x-cols", "0", "--y-cols", "1", "--k", "1", "--n-slices",
                        "8", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto pos = r.out.find("\"value\": ");
  REQUIRE(pos != std::string::npos);
  const double value = std::stod(r.out.substr(pos + 9));
  CHECK(std::abs(value) < 0.05);
}

TEST_CASE("sweep output is byte-identical across thread counts") {
  const auto dir = temp_dir();
  std::ofstream(dir / "sweep.toml") << "family = correlated_normal\n"
                                       "d_list = 2, 4\n"
                                       "k_list = 1, 2, 5\n"
                                       "mi_grid = 0, 1, 3\n"
                                       "n_samples = 500\n"
                                       "n_slices = 6\n"
                                       "n_runs = 3\n"
                                       "seed = 99\n";
  const auto a = (dir / "a.csv").string();
  const auto b = (dir / "b.csv").string();
  const auto cfg = (dir / "sweep.toml").string();
  REQUIRE(run({"sweep", "--config", cfg, "--threads", "1", "--out", a}).code == 0);
  REQUIRE(run({"sweep", "--config", cfg, "--threads", "8", "--out", b}).code == 0);
  const std::string sa = slurp(a);
  CHECK(sa == slurp(b));
  // header + 2 d x 3 k x 3 MI rows
  CHECK(std::count(sa.begin(), sa.end(), '\n') == 19);
  CHECK(std::filesystem::exists(a + ".manifest.json"));
  const std::string manifest = slurp(a + ".manifest.json");
  CHECK(manifest.find("\"wall_time_s\"") != std::string::npos);
  CHECK(manifest.find("\"d_list\"") != std::string::npos);

  const Result fit = run({"decay-fit", "--input", a, "--min-normalized-mi", "0.5"});
  CHECK(fit.code == 1);  // only two distinct d values
}

TEST_CASE("decay-fit on exact limits") {
  const Result r = run({"decay-fit", "--limits", "4,8,16,32,64", "--format", "json"});
  REQUIRE(r.code == 0);
  const double slope = std::stod(r.out.substr(r.out.find("\"slope\": ") + 9));
  CHECK(slope >= -1.15);
  CHECK(slope <= -0.85);
}

TEST_CASE("validate") {
  const Result r = run({"validate", "--d-list", "2,5", "--n-draws", "20000"});
  CHECK(r.code == 0);
  CHECK(r.out.find("beta_law_ks,2,") != std::string::npos);
  CHECK(r.out.find("false") == std::string::npos);
}
