#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace simbias::stats {

/// Standard normal CDF.
double phi_cdf(double t);
/// ln Phi(t), accurate in the far lower tail.
double log_phi_cdf(double t);

/// ln C(n, h) for 0 <= h <= n.
double log_binomial(std::int64_t n, std::int64_t h);

/// Least-squares fit y = coefficient * x.
struct FitResult {
  double coefficient = 0.0;
  double std_error = 0.0;
  /// Uncentered, 1 - SS_res / sum(y^2), as appropriate for a model without intercept.
  double r_squared = 0.0;
  double max_abs_residual = 0.0;
  double rms_residual = 0.0;
  std::size_t points = 0;
};

FitResult fit_through_origin(std::span<const double> xs, std::span<const double> ys);

/// Ordinary least squares y = intercept + slope * x (diagnostic).
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  double intercept_std_error = 0.0;
  double r_squared = 0.0;
};

LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

/// y = prefactor * x^exponent via a line fit in log-log space.
struct PowerFit {
  double prefactor = 0.0;
  double exponent = 0.0;
  double exponent_std_error = 0.0;
  double r_squared = 0.0;
};

PowerFit fit_power_law(std::span<const double> xs, std::span<const double> ys);

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Sample mean and its standard error s/sqrt(m). Throws for empty input.
MeanStderr mean_stderr(std::span<const double> samples);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

Moments moments(std::span<const double> samples);

/// Pearson correlation.
double correlation(std::span<const double> xs, std::span<const double> ys);

}  // namespace simbias::stats
