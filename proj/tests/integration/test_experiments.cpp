#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "simbias/errors.hpp"
#include "simbias/experiments.hpp"
#include "simbias/network.hpp"
#include "simbias/weight_io.hpp"

using namespace simbias;
using namespace simbias::harness;

namespace {

std::string csv_text(const ExperimentResult& r) {
  std::ostringstream out;
  write_csv(out, r.table, r.provenance(), r.truncated);
  return out.str();
}

CsvFile reparse(const ExperimentResult& r) {
  std::istringstream in(csv_text(r));
  return read_csv(in);
}

ExperimentConfig base(ExperimentKind kind, std::vector<int> n, int trials, std::uint64_t seed) {
  ExperimentConfig c;
  c.kind = kind;
  c.n_values = std::move(n);
  c.trials = trials;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("every experiment is byte-identical across worker counts") {
  const ExperimentConfig configs[] = {
      base(ExperimentKind::Closest, {16, 32}, 12, 2),
      base(ExperimentKind::Flips, {16, 32}, 12, 2),
      base(ExperimentKind::GpCheck, {32}, 40, 2),
      base(ExperimentKind::GreedyVsExact, {8, 10}, 12, 2),
  };
  for (const auto& c : configs) {
    CAPTURE(to_string(c.kind));
    ExperimentConfig threaded = c;
    threaded.parallel = 3;
    CHECK(csv_text(run_experiment(c)) == csv_text(run_experiment(threaded)));
  }
}

TEST_CASE("JSON aggregates equal recomputation from CSV rows") {
  for (auto kind : {ExperimentKind::Closest, ExperimentKind::Flips}) {
    const auto r = run_experiment(base(kind, {12, 24, 48}, 30, 8));
    const auto csv = reparse(r);
    const auto n_col = csv.column("n");
    const auto d_col = csv.column("distance");
    std::map<int, std::vector<double>> by_n;
    for (const auto& row : csv.rows)
      if (row[d_col] != "NA") by_n[std::stoi(row[n_col])].push_back(std::stod(row[d_col]));
    const auto j = r.summary_json();
    REQUIRE(j["per_n"].size() == by_n.size());
    std::vector<double> xs, ys;
    for (const auto& e : j["per_n"]) {
      const int n = e["n"];
      const auto& v = by_n.at(n);
      double sum = 0.0;
      for (double d : v) sum += d;
      const double mean = sum / static_cast<double>(v.size());
      double ss = 0.0;
      for (double d : v) ss += (d - mean) * (d - mean);
      const double se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
      CHECK(std::abs(e["mean"].get<double>() - mean) <= 1e-12);
      CHECK(std::abs(e["stderr"].get<double>() - se) <= 1e-12);
      CHECK(e["count"] == v.size());
      xs.push_back(kind == ExperimentKind::Closest ? std::sqrt(n / std::log(static_cast<double>(n))) : n);
      ys.push_back(mean);
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += xs[i] * ys[i];
      sxx += xs[i] * xs[i];
    }
    CHECK(std::abs(j["fit"]["coefficient"].get<double>() - sxy / sxx) <= 1e-12);
  }
}

TEST_CASE("provenance lines identify the run") {
  auto c = base(ExperimentKind::Flips, {10}, 3, 77);
  const auto csv = reparse(run_flips(c));
  REQUIRE(csv.comments.size() >= 4);
  CHECK(csv.comments[0].rfind("simbias ", 0) == 0);
  CHECK(std::find(csv.comments.begin(), csv.comments.end(), "kind: flips") != csv.comments.end());
  CHECK(std::find(csv.comments.begin(), csv.comments.end(), "seed: 77") != csv.comments.end());
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(c.hash()));
  CHECK(std::find(csv.comments.begin(), csv.comments.end(), std::string("config_hash: ") + hash) !=
        csv.comments.end());
}

TEST_CASE("greedy never beats exhaustive search") {
  const auto r = run_greedy_vs_exact(base(ExperimentKind::GreedyVsExact, {8, 10, 12}, 60, 13));
  CHECK(r.diagnostics["violations"] == 0);
  const auto csv = reparse(r);
  const auto g = csv.column("greedy"), e = csv.column("exact"), gap = csv.column("gap");
  for (const auto& row : csv.rows) {
    if (row[g] == "NA" || row[e] == "NA") continue;
    CHECK(std::stoi(row[g]) >= std::stoi(row[e]));
    CHECK(std::stoi(row[gap]) == std::stoi(row[g]) - std::stoi(row[e]));
  }
  CHECK(r.diagnostics["mean_gap"].get<double>() <= 0.5);
}

TEST_CASE("closest distances grow like sqrt(n / ln n)") {
  auto c = base(ExperimentKind::Closest, {32, 64, 128}, 60, 31);
  c.parallel = 0;
  const auto r = run_closest(c);
  REQUIRE(r.fit);
  CHECK(r.fit->coefficient > 0.3);
  CHECK(r.fit->coefficient < 0.7);
  CHECK(r.per_n[0].summary.mean < r.per_n[2].summary.mean);
  CHECK(r.diagnostics["a_theory"].get<double>() == doctest::Approx(1.0 / std::sqrt(2.0 * 3.141592653589793)));
}

TEST_CASE("a weights file fixes the network for every trial") {
  const auto path = std::filesystem::temp_directory_path() / "simbias_integration.sbnw";
  NetworkConfig nc;
  nc.input_dim = 20;
  nc.hidden_widths = {20, 20};
  nc.seed = 4;
  write_weights(path, sample_network(nc, 0));
  auto c = base(ExperimentKind::Flips, {}, 8, 1);
  c.net = NetSource::WeightsFile;
  c.weights = path.string();
  const auto r = run_flips(c);
  REQUIRE(r.per_n.size() == 1);
  CHECK(r.per_n[0].n == 20);
  c.n_values = {30};
  CHECK_THROWS_AS(run_flips(c), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("plot data follows the fit abscissa") {
  const auto r = run_flips(base(ExperimentKind::Flips, {10, 20}, 10, 3));
  REQUIRE(r.plot.rows.size() == 2);
  CHECK(std::get<double>(r.plot.rows[0][0]) == 10.0);
  CHECK(std::get<double>(r.plot.rows[0][1]) == r.per_n[0].summary.mean);
}
