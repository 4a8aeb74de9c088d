#pragma once

#include <cstdint>

#include "simbias/kernel.hpp"

namespace simbias::theory {

/// Distance scale a (h_n = floor(a sqrt(n / ln n))) and normalized output z
/// (phi(x) = sqrt(Q) z) for a string length n.
struct TheoryQuery {
  std::int64_t n = 3;
  double a = 1.0;
  double z = 1.0;
  double f_prime_1 = 1.0;

  /// Throws ConfigError unless n >= 3, a > 0 and f_prime_1 > 0.
  void validate() const;
};

/// floor(a sqrt(n / ln n)).
std::int64_t hamming_radius(std::int64_t n, double a);

/// a at which the expected count of flipped strings switches from vanishing to
/// diverging: z / (2 sqrt(F'(1))).
double threshold_a(double z, double f_prime_1);

/// P(phi(y) < 0 | phi(x) = sqrt(Q) z) for h(x, y) = h, using the exact F:
/// Phi(-F z / sqrt(1 - F^2)) with F = F(1 - 2h/n). When F = +-1 the
/// conditional law is a point mass and the limit is returned.
double conditional_flip_probability(const KernelProfile& profile, std::int64_t n, std::int64_t h, double z);
/// Natural log of the above, finite far into the tail.
double log_conditional_flip_probability(const KernelProfile& profile, std::int64_t n, std::int64_t h, double z);

/// Exact finite-n ln N_n(a, z) = ln C(n, h_n) + ln P_n. Returns -infinity when h_n = 0.
double ln_count_flipped(const KernelProfile& profile, const TheoryQuery& query);

/// (a/2) sqrt(n ln n) (1 - z^2/(4 F'(1) a^2) + ln(ln n / a^2) / ln n).
double ln_count_flipped_asymptotic(const TheoryQuery& query);

/// Predicted distance to the nearest differently classified string,
/// |phi(x)| / (2 sqrt(Q F'(1))) sqrt(n / ln n).
double h_star(double phi_x, double q, double f_prime_1, std::int64_t n);

/// E[h*] = sqrt(n / (2 pi F'(1) ln n)).
double expected_h_star(std::int64_t n, double f_prime_1);

/// Heuristic random-walk flip count n / (4 F'(1)).
double heuristic_flip_bound(std::int64_t n, double f_prime_1);

/// Heuristic closest-string distance sqrt(n / (8 F'(1) ln n)).
double heuristic_closest_bound(std::int64_t n, double f_prime_1);

}  // namespace simbias::theory
