#include "simbias/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "simbias/quadrature.hpp"

namespace simbias {

KernelParams KernelParams::from(const NetworkConfig& config) {
  return {config.sigma_w2, config.sigma_b2, config.layers(), config.activation};
}

void KernelParams::validate() const {
  if (layers < 1) throw ConfigError("kernel needs at least one hidden layer");
  if (!(sigma_w2 >= 0.0) || !(sigma_b2 >= 0.0)) throw ConfigError("variances must be nonnegative");
  if (!(sigma_w2 + sigma_b2 > 0.0)) throw ConfigError("sigma_w2 + sigma_b2 must be positive");
}

namespace {

constexpr int kGhOrder = 64;
// Successive orders tried until two neighbours agree; tanh-like activations
// with poles near the real axis typically need the later ones.
constexpr int kGhLadder[] = {kGhOrder, 96, 128, 192};
constexpr double kGhAgreement = 1e-8;
constexpr double kRangeSlack = 1e-9;

const quadrature::Tolerance kOuterTol{1e-14, 1e-12, 20000};
const quadrature::Tolerance kInnerTol{1e-15, 1e-13, 20000};

KernelMethod resolve(const KernelParams& p, KernelMethod method) {
  if (method == KernelMethod::Auto)
    return p.activation.kind() == ActivationKind::ReLU ? KernelMethod::ClosedForm : KernelMethod::Quadrature;
  if (method == KernelMethod::ClosedForm && p.activation.kind() != ActivationKind::ReLU)
    throw ConfigError("closed-form kernel is only available for ReLU");
  return method;
}

std::vector<double> scaled_kinks(const Activation& tau, double scale) {
  std::vector<double> k;
  for (double b : tau.breakpoints()) k.push_back(b / scale);
  return k;
}

bool gh_agrees(double coarse, double fine, double scale) {
  return std::abs(coarse - fine) <= kGhAgreement * std::max(std::abs(fine), scale);
}

// E[g(sqrt(q) Z)] for g smooth between the activation's kinks
template <typename G>
double gaussian_moment(const Activation& tau, double q, G g) {
  const double sq = std::sqrt(q);
  auto integrand = [&](double z) { return g(sq * z); };
  if (tau.breakpoints().empty()) {
    double prev = quadrature::gaussian_expectation(quadrature::gauss_hermite(kGhLadder[0]), integrand);
    for (std::size_t k = 1; k < std::size(kGhLadder); ++k) {
      const double next = quadrature::gaussian_expectation(quadrature::gauss_hermite(kGhLadder[k]), integrand);
      if (gh_agrees(prev, next, 1e-300)) return next;
      prev = next;
    }
  }
  return quadrature::gaussian_expectation_adaptive(integrand, scaled_kinks(tau, sq), kOuterTol);
}

// E[tau(sqrt(q) Z)^2]
double second_moment(const Activation& tau, double q) {
  return gaussian_moment(tau, q, [&](double v) {
    const double t = tau(v);
    return t * t;
  });
}

// Central difference, made one-sided within `step` of a kink.
double tau_derivative(const Activation& tau, double v, double rel_step) {
  const double h = rel_step * std::max(1.0, std::abs(v));
  double lo = v - h, hi = v + h;
  for (double b : tau.breakpoints()) {
    if (std::abs(v - b) >= h) continue;
    if (v >= b) lo = v;
    else hi = v;
  }
  return (tau(hi) - tau(lo)) / (hi - lo);
}

// E[tau'(sqrt(q) Z)^2]
double derivative_moment(const Activation& tau, double q, double rel_step) {
  return gaussian_moment(tau, q, [&](double v) {
    const double d = tau_derivative(tau, v, rel_step);
    return d * d;
  });
}

// E[tau(sqrt(q) Z) tau(sqrt(q) (rho Z + sqrt(1 - rho^2) W))]
double pair_expectation(const Activation& tau, double q, double rho) {
  const double sq = std::sqrt(q);
  const double one_minus = (1.0 - rho) * (1.0 + rho);
  std::vector<double> outer_kinks = scaled_kinks(tau, sq);
  if (rho != 0.0)
    for (double b : tau.breakpoints()) outer_kinks.push_back(b / (sq * rho));

  if (one_minus < 1e-300) {
    auto integrand = [&](double z) { return tau(sq * z) * tau(sq * rho * z); };
    return quadrature::gaussian_expectation_adaptive(integrand, outer_kinks, kOuterTol);
  }
  const double s = std::sqrt(one_minus);

  if (tau.breakpoints().empty()) {
    auto integrand = [&](double z, double w) { return tau(sq * z) * tau(sq * (rho * z + s * w)); };
    // Cancellation near rho = 0 makes a relative test too strict; compare against E[tau^2].
    const double scale = quadrature::gaussian_expectation(quadrature::gauss_hermite(kGhOrder), [&](double z) {
      const double v = tau(sq * z);
      return v * v;
    });
    double prev = quadrature::gaussian_expectation_2d(quadrature::gauss_hermite(kGhLadder[0]), integrand);
    for (std::size_t k = 1; k < std::size(kGhLadder); ++k) {
      const double next = quadrature::gaussian_expectation_2d(quadrature::gauss_hermite(kGhLadder[k]), integrand);
      if (gh_agrees(prev, next, scale)) return next;
      prev = next;
    }
  }

  std::vector<double> inner_kinks(tau.breakpoints().size());
  auto outer = [&](double z) {
    const double a = tau(sq * z);
    if (a == 0.0) return 0.0;
    for (std::size_t k = 0; k < inner_kinks.size(); ++k)
      inner_kinks[k] = (tau.breakpoints()[k] / sq - rho * z) / s;
    const double inner = quadrature::gaussian_expectation_adaptive(
        [&](double w) { return tau(sq * (rho * z + s * w)); }, inner_kinks, kInnerTol);
    return a * inner;
  };
  return quadrature::gaussian_expectation_adaptive(outer, outer_kinks, kOuterTol);
}

double checked(double f, int layer) {
  if (!(std::abs(f) <= 1.0 + kRangeSlack))
    throw NumericalFault("layer " + std::to_string(layer) + " correlation left [-1, 1]: " + std::to_string(f));
  return std::clamp(f, -1.0, 1.0);
}

void check_q(const KernelParams& p, std::span<const double> q) {
  if (q.size() != static_cast<std::size_t>(p.layers) + 1) throw DimensionMismatch("expected L+1 values of Q");
}

}  // namespace

std::vector<double> q_recursion(const KernelParams& params, KernelMethod method) {
  params.validate();
  method = resolve(params, method);
  std::vector<double> q(static_cast<std::size_t>(params.layers) + 1);
  q[0] = params.sigma_w2 + params.sigma_b2;
  for (std::size_t l = 1; l < q.size(); ++l) {
    // E[ReLU(sqrt(Q) Z)^2] = Q/2
    const double moment = method == KernelMethod::ClosedForm ? 0.5 * q[l - 1] : second_moment(params.activation, q[l - 1]);
    q[l] = params.sigma_w2 * moment + params.sigma_b2;
  }
  return q;
}

Eigen::VectorXd f_recursion(const KernelParams& params, std::span<const double> q, double t, KernelMethod method) {
  params.validate();
  check_q(params, q);
  method = resolve(params, method);
  if (!(std::abs(t) <= 1.0 + kCorrelationSlack)) throw NumericalFault("overlap outside [-1, 1]");
  t = std::clamp(t, -1.0, 1.0);

  const int depth = params.layers + 1;
  Eigen::VectorXd f(depth);
  if (t == 1.0) {
    f.setOnes();
    return f;
  }
  const double sw = params.sigma_w2;
  const double sb = params.sigma_b2;
  f[0] = checked((sw * t + sb) / (sw + sb), 1);
  for (int l = 1; l < depth; ++l) {
    const double q_prev = q[static_cast<std::size_t>(l) - 1];
    double value;
    if (method == KernelMethod::ClosedForm) {
      value = (q_prev * sw * psi(f[l - 1]) + 2.0 * sb) / (q_prev * sw + 2.0 * sb);
    } else {
      value = (sw * pair_expectation(params.activation, q_prev, f[l - 1]) + sb) / q[static_cast<std::size_t>(l)];
    }
    f[l] = checked(value, l + 1);
  }
  return f;
}

double f_prime_1(const KernelParams& params, std::span<const double> q, KernelMethod method) {
  params.validate();
  check_q(params, q);
  method = resolve(params, method);
  double d;
  if (method == KernelMethod::ClosedForm) {
    const double sw = params.sigma_w2;
    const double sb = params.sigma_b2;
    d = sw / (sw + sb);
    for (std::size_t l = 1; l < q.size(); ++l) d *= q[l - 1] * sw / (q[l - 1] * sw + 2.0 * sb);
    if (!(d > 0.0)) throw NumericalFault("F'(1) = 0: degenerate kernel, no signal reaches the output");
    if (d > 1.0 + kRangeSlack) throw NumericalFault("ReLU F'(1) exceeds 1");
    return d;
  }
  // dF_{l+1}/dF_l at 1 is sigma_w2 Q_l E[tau'(sqrt(Q_l) Z)^2] / Q_{l+1}, with tau' by finite differences.
  auto chain = [&](double rel_step) {
    double p = params.sigma_w2 / q[0];
    for (std::size_t l = 1; l < q.size(); ++l)
      p *= params.sigma_w2 * q[l - 1] * derivative_moment(params.activation, q[l - 1], rel_step) / q[l];
    return p;
  };
  constexpr double kStep = 1e-5;
  const double fine = chain(kStep);
  const double coarse = chain(4.0 * kStep);
  if (!(fine > 1e-300) && !(coarse > 1e-300))
    throw NumericalFault("F'(1) = 0: degenerate kernel, no signal reaches the output");
  if (!(std::abs(fine - coarse) <= 1e-6 * std::max(std::abs(fine), std::abs(coarse))))
    throw NumericalFault("finite-difference estimate of F'(1) is unstable");
  return fine;
}

Eigen::VectorXd default_grid() {
  std::vector<double> t;
  t.reserve(2001 + 36);
  for (int k = 0; k <= 2000; ++k) t.push_back(static_cast<double>(k - 1000) / 1000.0);
  for (int j = 0; j <= 35; ++j) t.push_back(1.0 - std::pow(10.0, -1.0 - j / 5.0));
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end(), [](double a, double b) { return b - a < 1e-15; }), t.end());
  return Eigen::Map<Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
}

KernelProfile KernelProfile::build(const KernelParams& params, KernelMethod method) {
  params.validate();
  KernelProfile p;
  p.params_ = params;
  p.method_ = resolve(params, method);
  p.q_ = q_recursion(params, p.method_);
  try {
    p.f_prime_1_ = simbias::f_prime_1(params, p.q_, p.method_);
  } catch (const NumericalFault&) {
    if (params.sigma_w2 != 0.0) throw;
  }

  const int depth = params.layers + 1;
  p.grid_.t = default_grid();
  const Eigen::Index points = p.grid_.t.size();
  p.grid_.f.resize(points, depth);
  if (p.method_ == KernelMethod::ClosedForm) {
    const double sw = params.sigma_w2;
    const double sb = params.sigma_b2;
    Eigen::ArrayXd f = (sw * p.grid_.t.array() + sb) / (sw + sb);
    p.grid_.f.col(0) = f.matrix();
    for (int l = 1; l < depth; ++l) {
      const double q_prev = p.q_[static_cast<std::size_t>(l) - 1];
      f = (q_prev * sw * psi(f) + 2.0 * sb) / (q_prev * sw + 2.0 * sb);
      p.grid_.f.col(l) = f.matrix();
    }
    // t = 1 is a grid node; keep F_l(1) = 1 exact.
    p.grid_.f.row(points - 1).setOnes();
  } else {
    for (Eigen::Index i = 0; i < points; ++i) p.grid_.f.row(i) = p.f_layers(p.grid_.t[i]).transpose();
  }
  return p;
}

double KernelProfile::f_prime_1() const {
  if (!f_prime_1_) throw NumericalFault("F'(1) = 0: degenerate kernel, no signal reaches the output");
  return *f_prime_1_;
}

double KernelProfile::layer_correlation(int layer, double t) const {
  if (layer < 1 || layer > params_.layers + 1) throw DimensionMismatch("layer index out of range");
  return f_layers(t)[layer - 1];
}

double KernelProfile::layer_covariance(int layer, double t) const {
  return q_.at(static_cast<std::size_t>(layer) - 1) * layer_correlation(layer, t);
}

double KernelProfile::f_interpolated(double t) const {
  if (!(std::abs(t) <= 1.0 + kCorrelationSlack)) throw NumericalFault("overlap outside [-1, 1]");
  t = std::clamp(t, -1.0, 1.0);
  const auto& ts = grid_.t;
  const auto last = grid_.f.cols() - 1;
  const auto* begin = ts.data();
  const auto* end = ts.data() + ts.size();
  const auto* hi = std::lower_bound(begin, end, t);
  if (hi == end) return grid_.f(ts.size() - 1, last);
  const auto i = hi - begin;
  if (*hi == t || i == 0) return grid_.f(i, last);
  const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
  return (1.0 - w) * grid_.f(i - 1, last) + w * grid_.f(i, last);
}

double covariance(const KernelProfile& profile, const BitString& x, const BitString& y) {
  return profile.q() * profile.f(overlap(x, y));
}

double step_variance(const KernelProfile& profile, int n) {
  if (n < 2) throw ConfigError("step variance needs n >= 2");
  return 2.0 * profile.q() * (1.0 - profile.f(1.0 - 2.0 / n));
}

}  // namespace simbias
