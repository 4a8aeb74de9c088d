#include "simbias/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "simbias/errors.hpp"

namespace simbias::stats {

double phi_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

double log_phi_cdf(double t) {
  if (t > 0.0) return std::log1p(-0.5 * std::erfc(t / std::numbers::sqrt2));
  if (t > -30.0) return std::log(phi_cdf(t));
  // ln Phi(-s) = -s^2/2 - ln(s sqrt(2 pi)) + ln(1 - 1/s^2 + 3/s^4 - 15/s^6 + 105/s^8)
  const double s = -t;
  const double r = 1.0 / (s * s);
  const double series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - r * 105.0)));
  return -0.5 * s * s - 0.5 * std::log(2.0 * std::numbers::pi * s * s) + std::log(series);
}

double log_binomial(std::int64_t n, std::int64_t h) {
  if (n < 0 || h < 0 || h > n) throw ConfigError("log_binomial needs 0 <= h <= n");
  const std::int64_t k = std::min(h, n - h);
  if (k <= 1000) {
    double s = 0.0;
    for (std::int64_t i = 1; i <= k; ++i) s += std::log(static_cast<double>(n - k + i) / static_cast<double>(i));
    return s;
  }
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

namespace {

void check_pair(std::span<const double> xs, std::span<const double> ys, std::size_t min_points) {
  if (xs.size() != ys.size()) throw DimensionMismatch("fit inputs have different lengths");
  if (xs.size() < min_points) throw ConfigError("not enough points to fit");
}

}  // namespace

FitResult fit_through_origin(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys, 1);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  if (!(sxx > 0.0)) throw ConfigError("fit through origin needs a nonzero x");
  FitResult f;
  f.points = xs.size();
  f.coefficient = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - f.coefficient * xs[i];
    ssr += e * e;
    f.max_abs_residual = std::max(f.max_abs_residual, std::abs(e));
  }
  f.rms_residual = std::sqrt(ssr / static_cast<double>(xs.size()));
  f.std_error = xs.size() > 1 ? std::sqrt(ssr / static_cast<double>(xs.size() - 1) / sxx) : 0.0;
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  return f;
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys, 2);
  const auto m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("line fit needs at least two distinct x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - f.intercept - f.slope * xs[i];
    ssr += e * e;
  }
  if (xs.size() > 2) {
    const double s2 = ssr / (m - 2.0);
    f.slope_std_error = std::sqrt(s2 / sxx);
    f.intercept_std_error = std::sqrt(s2 * (1.0 / m + mx * mx / sxx));
  }
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  return f;
}

PowerFit fit_power_law(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys, 2);
  std::vector<double> lx(xs.size()), ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw ConfigError("power-law fit needs positive data");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const LineFit line = fit_line(lx, ly);
  return {std::exp(line.intercept), line.slope, line.slope_std_error, line.r_squared};
}

MeanStderr mean_stderr(std::span<const double> samples) {
  if (samples.empty()) throw ConfigError("mean of an empty sample");
  const auto m = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= m;
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double se = samples.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
  return {mean, se, samples.size()};
}

Moments moments(std::span<const double> samples) {
  if (samples.size() < 2) throw ConfigError("moments need at least two samples");
  const auto m = static_cast<double>(samples.size());
  Moments r;
  for (double s : samples) r.mean += s;
  r.mean /= m;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double s : samples) {
    const double d = s - r.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= m;
  m3 /= m;
  m4 /= m;
  r.variance = m2 * m / (m - 1.0);
  if (m2 > 0.0) {
    r.skewness = m3 / std::pow(m2, 1.5);
    r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return r;
}

double correlation(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys, 2);
  const auto m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0 && syy > 0.0)) throw ConfigError("correlation of a constant sample");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace simbias::stats
