#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const char* env = std::getenv("SIMBIAS_TMP");
  fs::path dir = env ? fs::path(env) : fs::temp_directory_path() / "simbias_cli";
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const char* exe = std::getenv("SIMBIAS_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "SIMBIAS_CLI is not set");
  const fs::path out = tmp_dir() / "stdout.txt";
  const std::string command =
      std::string("\"") + exe + "\" " + args + " > \"" + out.string() + "\" 2> \"" + (tmp_dir() / "stderr.txt").string() + "\"";
  const int status = std::system(command.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::ostringstream text;
  text << in.rdbuf();
  r.out = text.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

TEST_CASE("kernel prints the variance and slope") {
  const auto csv = tmp_dir() / "kernel.csv";
  const Run r = cli("kernel --layers 1 --out-csv \"" + csv.string() + "\"");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["Q"].get<double>() == doctest::Approx(2.0));
  CHECK(j["Fprime1"].get<double>() == doctest::Approx(1.0));
  CHECK(slurp(csv).find("\nt,F_1,F_2,F\n") != std::string::npos);
}

TEST_CASE("theory reports the expected distance") {
  const Run r = cli("theory --n 784");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["results"][0]["expected_h_star"].get<double>() == doctest::Approx(4.327).epsilon(1e-3));
}

TEST_CASE("closest writes CSV, JSON and plot data, and fit reproduces it") {
  const auto dir = tmp_dir();
  const auto csv = dir / "closest.csv";
  const auto json_path = dir / "closest.json";
  const Run r = cli("closest --n 16,24 --trials 10 --seed 4 --parallel 2 --out-csv \"" + csv.string() +
                    "\" --out-json \"" + json_path.string() + "\" --emit-plot-data");
  REQUIRE(r.code == 0);
  const std::string text = slurp(csv);
  CHECK(text.rfind("# simbias ", 0) == 0);
  CHECK(text.find("\nn,trial,start_phi,distance,evaluations,micros\n") != std::string::npos);
  CHECK(fs::exists(dir / "closest.plot.csv"));
  const auto summary = nlohmann::json::parse(slurp(json_path));
  CHECK(summary["config"]["seed"] == 4);

  const Run fit = cli("fit \"" + csv.string() + "\"");
  REQUIRE(fit.code == 0);
  const auto refit = nlohmann::json::parse(fit.out);
  CHECK(std::abs(refit["fit"]["coefficient"].get<double>() - summary["fit"]["coefficient"].get<double>()) <= 1e-12);
}

TEST_CASE("config files are applied and flags override them") {
  const auto dir = tmp_dir();
  const auto conf = dir / "flips.conf";
  {
    std::ofstream out(conf);
    out << "kind = flips\nn = 12\ntrials = 4\nseed = 9\n";
  }
  const auto a = dir / "a.csv";
  const auto b = dir / "b.csv";
  REQUIRE(cli("--config \"" + conf.string() + "\" --out-csv \"" + a.string() + "\"").code == 0);
  REQUIRE(cli("flips --config \"" + conf.string() + "\" --parallel 3 --out-csv \"" + b.string() + "\"").code == 0);
  CHECK(slurp(a) == slurp(b));
  const auto c = dir / "c.csv";
  REQUIRE(cli("flips --config \"" + conf.string() + "\" --trials 2 --out-csv \"" + c.string() + "\"").code == 0);
  CHECK(slurp(c).find("\n12,1,") != std::string::npos);
  CHECK(slurp(c).find("\n12,2,") == std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(cli("closest --bogus 1").code == 2);
  CHECK(cli("closest --n 64,32").code == 2);
  CHECK(cli("flips --n 8 --weights \"" + (tmp_dir() / "missing.sbnw").string() + "\"").code != 0);
  CHECK(cli("closest --n 40 --trials 1 --search exact --budget 10").code == 3);
  CHECK(cli("kernel --sigma-w2 0 --sigma-b2 1").code == 4);
  CHECK(cli("--version").code == 0);
}
