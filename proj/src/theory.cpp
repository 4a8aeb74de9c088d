#include "simbias/theory.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "simbias/stats.hpp"

namespace simbias::theory {

namespace {

void check_n(std::int64_t n) {
  if (n < 3) throw ConfigError("theory predictors need n >= 3");
}

void check_f_prime(double f_prime_1) {
  if (!(f_prime_1 > 0.0)) throw ConfigError("F'(1) must be positive");
}

double sqrt_n_over_ln_n(std::int64_t n) {
  const auto dn = static_cast<double>(n);
  return std::sqrt(dn / std::log(dn));
}

// Argument t of Phi(t) = P_n, or the sign of the limit when the correlation is +-1.
struct ConditionalArgument {
  double t;
  bool degenerate;
};

ConditionalArgument conditional_argument(const KernelProfile& profile, std::int64_t n, std::int64_t h, double z) {
  check_n(n);
  if (h < 0 || h > n) throw ConfigError("Hamming distance must be in [0, n]");
  const double r = profile.f(1.0 - 2.0 * static_cast<double>(h) / static_cast<double>(n));
  const double one_minus = (1.0 - r) * (1.0 + r);
  if (one_minus < 1e-300) {
    const double limit = -r * z;
    return {limit > 0.0 ? 1.0 : (limit < 0.0 ? -1.0 : 0.0), true};
  }
  return {-r * z / std::sqrt(one_minus), false};
}

}  // namespace

void TheoryQuery::validate() const {
  check_n(n);
  if (!(a > 0.0)) throw ConfigError("distance scale a must be positive");
  check_f_prime(f_prime_1);
}

std::int64_t hamming_radius(std::int64_t n, double a) {
  check_n(n);
  return static_cast<std::int64_t>(std::floor(a * sqrt_n_over_ln_n(n)));
}

double threshold_a(double z, double f_prime_1) {
  check_f_prime(f_prime_1);
  return z / (2.0 * std::sqrt(f_prime_1));
}

double conditional_flip_probability(const KernelProfile& profile, std::int64_t n, std::int64_t h, double z) {
  const auto arg = conditional_argument(profile, n, h, z);
  if (arg.degenerate) return arg.t > 0.0 ? 1.0 : (arg.t < 0.0 ? 0.0 : 0.5);
  return stats::phi_cdf(arg.t);
}

double log_conditional_flip_probability(const KernelProfile& profile, std::int64_t n, std::int64_t h, double z) {
  const auto arg = conditional_argument(profile, n, h, z);
  if (arg.degenerate)
    return arg.t > 0.0 ? 0.0 : (arg.t < 0.0 ? -std::numeric_limits<double>::infinity() : std::log(0.5));
  return stats::log_phi_cdf(arg.t);
}

double ln_count_flipped(const KernelProfile& profile, const TheoryQuery& query) {
  query.validate();
  const std::int64_t h = hamming_radius(query.n, query.a);
  if (h == 0) return -std::numeric_limits<double>::infinity();
  if (h > query.n) throw ConfigError("a is too large: h_n exceeds n");
  return stats::log_binomial(query.n, h) + log_conditional_flip_probability(profile, query.n, h, query.z);
}

double ln_count_flipped_asymptotic(const TheoryQuery& query) {
  query.validate();
  const auto dn = static_cast<double>(query.n);
  const double ln_n = std::log(dn);
  const double a = query.a;
  return 0.5 * a * std::sqrt(dn * ln_n) *
         (1.0 - query.z * query.z / (4.0 * query.f_prime_1 * a * a) + std::log(ln_n / (a * a)) / ln_n);
}

double h_star(double phi_x, double q, double f_prime_1, std::int64_t n) {
  check_n(n);
  check_f_prime(f_prime_1);
  if (!(q > 0.0)) throw ConfigError("Q must be positive");
  return std::abs(phi_x) / (2.0 * std::sqrt(q * f_prime_1)) * sqrt_n_over_ln_n(n);
}

double expected_h_star(std::int64_t n, double f_prime_1) {
  check_n(n);
  check_f_prime(f_prime_1);
  const auto dn = static_cast<double>(n);
  return std::sqrt(dn / (2.0 * std::numbers::pi * f_prime_1 * std::log(dn)));
}

double heuristic_flip_bound(std::int64_t n, double f_prime_1) {
  check_f_prime(f_prime_1);
  return static_cast<double>(n) / (4.0 * f_prime_1);
}

double heuristic_closest_bound(std::int64_t n, double f_prime_1) {
  check_n(n);
  check_f_prime(f_prime_1);
  const auto dn = static_cast<double>(n);
  return std::sqrt(dn / (8.0 * f_prime_1 * std::log(dn)));
}

}  // namespace simbias::theory
