#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "simbias/errors.hpp"
#include "simbias/experiment_config.hpp"
#include "simbias/experiments.hpp"
#include "simbias/report.hpp"

using namespace simbias;
using namespace simbias::harness;

TEST_CASE("n lists") {
  CHECK(parse_n_list("64,128,256") == std::vector<int>{64, 128, 256});
  CHECK(parse_n_list("8..14:2") == std::vector<int>{8, 10, 12, 14});
  CHECK(parse_n_list("64..512:x2") == std::vector<int>{64, 128, 256, 512});
  CHECK(parse_n_list("5,8..10") == std::vector<int>{5, 8, 9, 10});
  CHECK_THROWS_AS(parse_n_list("abc"), ConfigError);
  CHECK_THROWS_AS(parse_n_list("10..5"), ConfigError);
  CHECK(parse_double_list("1,-0.5,0.25") == std::vector<double>{1.0, -0.5, 0.25});
}

TEST_CASE("kind names") {
  for (auto k : {ExperimentKind::Closest, ExperimentKind::Flips, ExperimentKind::GpCheck, ExperimentKind::GreedyVsExact,
                 ExperimentKind::Kernel, ExperimentKind::Theory})
    CHECK(parse_kind(to_string(k)) == k);
  CHECK(to_string(ExperimentKind::GreedyVsExact) == "greedy-vs-exact");
  CHECK_THROWS_AS(parse_kind("nope"), ConfigError);
}

TEST_CASE("validation") {
  ExperimentConfig c;
  c.n_values = {64, 128};
  CHECK_NOTHROW(c.validate());
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.trials = 1;
  c.n_values = {128, 64};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.n_values = {};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.n_values = {2};
  CHECK_THROWS_AS(c.validate(), ConfigError);  // closest needs n >= 3
  c.kind = ExperimentKind::Flips;
  CHECK_NOTHROW(c.validate());
  c.activation = "softsign";
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("settings from flags and files") {
  ExperimentConfig c;
  apply_setting(c, "n", "8..12:2");
  apply_setting(c, "sigma_w2", "1.5");
  apply_setting(c, "sigma-b2", "0.5");
  apply_setting(c, "search", "exact");
  apply_setting(c, "record-timing", "");
  CHECK(c.n_values == std::vector<int>{8, 10, 12});
  CHECK(c.sigma_w2 == 1.5);
  CHECK(c.sigma_b2 == 0.5);
  CHECK(c.search == SearchMethod::Exact);
  CHECK(c.record_timing);
  CHECK_THROWS_AS(apply_setting(c, "colour", "red"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "trials", "many"), ConfigError);

  const auto path = std::filesystem::temp_directory_path() / "simbias_test_config.txt";
  {
    std::ofstream out(path);
    out << "# closest sweep\nkind = flips\n--n = 16,32   # comment\ntrials=7\nout_csv = \"a b.csv\"\n";
  }
  const auto entries = read_config_file(path);
  REQUIRE(entries.size() == 4);
  CHECK(entries[1] == std::pair<std::string, std::string>{"n", "16,32"});
  ExperimentConfig f;
  for (const auto& [k, v] : entries) apply_setting(f, k, v);
  CHECK(f.kind == ExperimentKind::Flips);
  CHECK(f.trials == 7);
  CHECK(f.out_csv == "a b.csv");
  std::filesystem::remove(path);
}

TEST_CASE("config hash ignores parallelism and outputs") {
  ExperimentConfig a;
  a.n_values = {64};
  ExperimentConfig b = a;
  b.parallel = 8;
  b.out_csv = "x.csv";
  b.record_timing = true;
  CHECK(a.hash() == b.hash());
  b.seed = 1;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("doubles are written in shortest round-trip form") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0, 5e-324}) {
    const auto s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_cell(Cell{}) == "NA");
  CHECK(format_cell(Cell{std::int64_t{42}}) == "42");
}

TEST_CASE("CSV round trip") {
  Table t;
  t.columns = {"n", "trial", "start_phi", "distance"};
  t.rows.push_back({std::int64_t{8}, std::int64_t{0}, 0.1 + 0.2, std::int64_t{2}});
  t.rows.push_back({std::int64_t{8}, std::int64_t{1}, -1.0 / 3.0, Cell{}});
  std::ostringstream out;
  write_csv(out, t, {"simbias test", "seed: 1"}, true);
  const std::string text = out.str();
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.rfind("# simbias test\n", 0) == 0);
  CHECK(text.find("n,trial,start_phi,distance\n") != std::string::npos);
  CHECK(text.size() >= 12);
  CHECK(text.substr(text.size() - 12) == "# truncated\n");
  std::istringstream in(text);
  const auto csv = read_csv(in);
  CHECK(csv.comments == std::vector<std::string>{"simbias test", "seed: 1", "truncated"});
  CHECK(csv.columns == t.columns);
  REQUIRE(csv.rows.size() == 2);
  CHECK(std::stod(csv.rows[0][2]) == 0.1 + 0.2);
  CHECK(csv.rows[1][3] == "NA");
  CHECK(csv.column("distance") == 3);
  CHECK_THROWS_AS(csv.column("missing"), ConfigError);
}

TEST_CASE("binning by output magnitude") {
  const std::vector<double> phi{0.1, 0.2, 0.6, 0.7, 0.65, 1.9};
  const std::vector<double> dist{1, 3, 2, 4, 3, 9};
  const auto b = bin_distance_by_output(phi, dist, 0.5, 2);
  REQUIRE(b.bins.size() == 2);
  CHECK(b.bins[0].midpoint == 0.25);
  CHECK(b.bins[0].mean_distance == 2.0);
  CHECK(b.bins[1].midpoint == 0.75);
  CHECK(b.bins[1].mean_distance == 3.0);
  CHECK(b.bins[1].count == 3);
  REQUIRE(b.fit);
  // through-origin slope: (0.25*2 + 0.75*3) / (0.25^2 + 0.75^2)
  CHECK(b.fit->coefficient == doctest::Approx((0.5 + 2.25) / (0.0625 + 0.5625)));
  CHECK_THROWS(bin_distance_by_output(phi, std::vector<double>{1.0}, 0.5));
}

TEST_CASE("default overlaps") {
  const auto t = default_overlaps(100);
  CHECK(t.size() == 7);
  CHECK(t[0] == 1.0);
  CHECK(t[1] == doctest::Approx(0.98));
  CHECK(t.back() == -1.0);
}

TEST_CASE("small closest run") {
  ExperimentConfig c;
  c.kind = ExperimentKind::Closest;
  c.n_values = {8, 16};
  c.trials = 10;
  c.seed = 3;
  const auto r = run_closest(c);
  CHECK(r.table.rows.size() == 20);
  CHECK(r.table.columns == std::vector<std::string>{"n", "trial", "start_phi", "distance", "evaluations", "micros"});
  CHECK_FALSE(r.truncated);
  REQUIRE(r.per_n.size() == 2);
  CHECK(r.per_n[0].n == 8);
  REQUIRE(r.fit);
  for (const auto& row : r.table.rows) CHECK(std::get<std::int64_t>(row[5]) == 0);
  const auto provenance = r.provenance();
  CHECK(provenance[0].rfind("simbias ", 0) == 0);
  const auto j = r.summary_json();
  CHECK(j["per_n"].size() == 2);
  CHECK(j["fit"]["model"] == "mean = a*sqrt(n/ln n)");
}

TEST_CASE("trials are identical across parallelism") {
  ExperimentConfig c;
  c.kind = ExperimentKind::Flips;
  c.n_values = {12, 20};
  c.trials = 25;
  c.seed = 9;
  const auto serial = run_flips(c);
  c.parallel = 4;
  const auto threaded = run_flips(c);
  std::ostringstream a, b;
  write_csv(a, serial.table, serial.provenance(), serial.truncated);
  write_csv(b, threaded.table, threaded.provenance(), threaded.truncated);
  CHECK(a.str() == b.str());
}

TEST_CASE("cancellation truncates") {
  ExperimentConfig c;
  c.kind = ExperimentKind::Flips;
  c.n_values = {12};
  c.trials = 5;
  std::atomic<bool> cancel{true};
  const auto r = run_flips(c, RunOptions{&cancel});
  CHECK(r.truncated);
  CHECK(r.table.rows.empty());
}

TEST_CASE("refit reproduces the aggregates") {
  ExperimentConfig c;
  c.kind = ExperimentKind::Closest;
  c.n_values = {10, 20, 30};
  c.trials = 15;
  c.seed = 4;
  const auto r = run_closest(c);
  std::ostringstream out;
  write_csv(out, r.table, r.provenance(), r.truncated);
  std::istringstream in(out.str());
  const auto j = refit(read_csv(in));
  const auto s = r.summary_json();
  REQUIRE(j["per_n"].size() == s["per_n"].size());
  for (std::size_t i = 0; i < j["per_n"].size(); ++i) {
    CHECK(std::abs(j["per_n"][i]["mean"].get<double>() - s["per_n"][i]["mean"].get<double>()) <= 1e-12);
    CHECK(std::abs(j["per_n"][i]["stderr"].get<double>() - s["per_n"][i]["stderr"].get<double>()) <= 1e-12);
    CHECK(j["per_n"][i]["count"] == s["per_n"][i]["count"]);
  }
  CHECK(std::abs(j["fit"]["coefficient"].get<double>() - s["fit"]["coefficient"].get<double>()) <= 1e-12);
}

TEST_CASE("exact budget surfaces from the harness") {
  ExperimentConfig c;
  c.kind = ExperimentKind::Closest;
  c.n_values = {40};
  c.trials = 3;
  c.search = SearchMethod::Exact;
  c.budget = 10;
  CHECK_THROWS_AS(run_closest(c), BudgetExceeded);
}

TEST_CASE("kernel and theory reports") {
  ExperimentConfig c;
  c.kind = ExperimentKind::Kernel;
  const auto k = kernel_report(c);
  CHECK(k.table.columns == std::vector<std::string>{"t", "F_1", "F_2", "F_3", "F"});
  CHECK(k.summary["Q"] == 2.0);
  CHECK(k.summary["Fprime1"] == 1.0);
  c.kind = ExperimentKind::Theory;
  c.n_values = {784};
  const auto t = theory_report(c);
  CHECK(std::abs(t["results"][0]["expected_h_star"].get<double>() - 4.327) < 1e-3);
  CHECK(t["results"][0]["h_n"] == 10);
  c.sigma_w2 = 0.0;
  c.sigma_b2 = 1.0;
  c.kind = ExperimentKind::Kernel;
  CHECK_THROWS_AS(kernel_report(c), NumericalFault);
}
