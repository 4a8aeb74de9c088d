#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "simbias/rng.hpp"
#include "simbias/stats.hpp"

using namespace simbias;
using namespace simbias::stats;

TEST_CASE("normal CDF values") {
  CHECK(phi_cdf(0.0) == 0.5);
  CHECK(phi_cdf(1.96) == doctest::Approx(0.97500210485177956).epsilon(1e-15));
  CHECK(phi_cdf(-5.0) == doctest::Approx(2.8665157187919391e-7).epsilon(1e-14));
  CHECK(phi_cdf(-40.0) < 1e-300);
  CHECK(phi_cdf(-1e300) == 0.0);
  for (double t = -8.0; t <= 8.0; t += 0.37) CHECK(std::abs(phi_cdf(t) + phi_cdf(-t) - 1.0) <= 1e-14);
}

TEST_CASE("log normal CDF tails") {
  CHECK(log_phi_cdf(-40.0) == doctest::Approx(-804.60844201375378817).epsilon(1e-14));
  CHECK(log_phi_cdf(-5.0) == doctest::Approx(std::log(2.8665157187919391e-7)).epsilon(1e-14));
  CHECK(log_phi_cdf(0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(log_phi_cdf(10.0) == doctest::Approx(-7.6198530241605269e-24).epsilon(1e-10));
  // continuity across the switch to the asymptotic series
  CHECK(std::abs(log_phi_cdf(-30.0 - 1e-9) - log_phi_cdf(-30.0 + 1e-9) - 2e-9 * (-30.0 - 1.0 / 30.0)) <= 1e-11);
  // leading terms of the expansion for very large arguments
  const double t = 1e4;
  CHECK(log_phi_cdf(-t) == doctest::Approx(-t * t / 2 - 0.5 * std::log(2 * M_PI * t * t)).epsilon(1e-15));
}

TEST_CASE("log binomial") {
  CHECK(log_binomial(4, 2) == doctest::Approx(std::log(6.0)).epsilon(1e-15));
  CHECK(log_binomial(10, 0) == 0.0);
  CHECK(log_binomial(10, 10) == 0.0);
  CHECK(log_binomial(60, 30) == doctest::Approx(39.311700726011262416).epsilon(1e-15));
  CHECK(log_binomial(1000000, 700) == doctest::Approx(5780.6618512320866925).epsilon(1e-13));

  // exact integers from Pascal's triangle
  std::vector<std::vector<std::uint64_t>> c(61);
  for (int n = 0; n <= 60; ++n) {
    c[n].assign(static_cast<std::size_t>(n) + 1, 1);
    for (int k = 1; k < n; ++k) c[n][k] = c[n - 1][k - 1] + c[n - 1][k];
  }
  for (int n = 1; n <= 60; ++n)
    for (int k = 0; k <= n; ++k) {
      CHECK(std::abs(log_binomial(n, k) - std::log(static_cast<long double>(c[n][k]))) <= 1e-10);
      CHECK(log_binomial(n, k) == doctest::Approx(log_binomial(n, n - k)).epsilon(1e-14));
    }
  for (std::int64_t n : {5000, 123456})
    for (std::int64_t k : {std::int64_t{1}, std::int64_t{17}, n / 3, n / 2})
      CHECK(log_binomial(n, k) == doctest::Approx(log_binomial(n, n - k)).epsilon(1e-13));
}

TEST_CASE("through-origin fit on exact data") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{0.4, 0.8, 1.2, 1.6};
  const auto f = fit_through_origin(x, y);
  CHECK(f.coefficient == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(f.std_error == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.points == 4);
  const std::vector<double> x1{2.0};
  const std::vector<double> y1{3.0};
  const auto single = fit_through_origin(x1, y1);
  CHECK(single.coefficient == 1.5);
  CHECK(single.std_error == 0.0);
}

TEST_CASE("through-origin fit covers the planted coefficient") {
  Engine rng(2024);
  std::normal_distribution<double> noise(0.0, 0.3);
  const double a = 0.405;
  int covered = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> x, y;
    for (int i = 1; i <= 50; ++i) {
      x.push_back(i * 0.2);
      y.push_back(a * x.back() + noise(rng));
    }
    const auto f = fit_through_origin(x, y);
    CHECK(f.std_error >= 0.0);
    CHECK(f.r_squared >= 0.0);
    CHECK(f.r_squared <= 1.0);
    covered += std::abs(f.coefficient - a) <= 3.0 * f.std_error;
  }
  CHECK(covered >= 990);
}

TEST_CASE("line and power-law fits") {
  const std::vector<double> x{1, 2, 4, 8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 + 0.5 * v);
  const auto line = fit_line(x, y);
  CHECK(line.slope == doctest::Approx(0.5));
  CHECK(line.intercept == doctest::Approx(3.0));
  std::vector<double> p;
  for (double v : x) p.push_back(2.0 * std::pow(v, 0.7));
  const auto power = fit_power_law(x, p);
  CHECK(power.exponent == doctest::Approx(0.7));
  CHECK(power.prefactor == doctest::Approx(2.0));
}

TEST_CASE("mean and standard error") {
  const std::vector<double> s{1, 2, 3};
  const auto ms = mean_stderr(s);
  CHECK(ms.mean == 2.0);
  CHECK(ms.std_error == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-15));
  CHECK(ms.count == 3);
  const std::vector<double> c(10, 4.5);
  CHECK(mean_stderr(c).mean == 4.5);
  CHECK(mean_stderr(c).std_error == 0.0);
  CHECK_THROWS(mean_stderr(std::vector<double>{}));
}

TEST_CASE("moments and correlation") {
  Engine rng(7);
  std::normal_distribution<double> normal;
  std::vector<double> a, b;
  for (int i = 0; i < 100000; ++i) {
    a.push_back(normal(rng));
    b.push_back(0.6 * a.back() + 0.8 * normal(rng));
  }
  const auto m = moments(a);
  CHECK(std::abs(m.skewness) < 0.05);
  CHECK(std::abs(m.excess_kurtosis) < 0.1);
  CHECK(std::abs(correlation(a, b) - 0.6) < 0.01);
}
