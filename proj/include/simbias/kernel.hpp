#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "simbias/activation.hpp"
#include "simbias/bitstring.hpp"
#include "simbias/errors.hpp"
#include "simbias/network.hpp"

namespace simbias {

/// Inputs of the infinite-width kernel: variances, number of hidden layers L
/// and the activation.
struct KernelParams {
  double sigma_w2 = 2.0;
  double sigma_b2 = 0.0;
  int layers = 2;
  Activation activation = Activation::relu();

  static KernelParams from(const NetworkConfig& config);
  void validate() const;
};

/// ClosedForm uses the arc-cosine map (ReLU only). Quadrature integrates the
/// layer recursion numerically for any activation. Auto picks ClosedForm for ReLU.
enum class KernelMethod { Auto, ClosedForm, Quadrature };

/// Values slightly outside [-1, 1] are clamped; beyond this they are a fault.
inline constexpr double kCorrelationSlack = 1e-12;

/// ReLU correlation map Psi(t) = (sqrt(1 - t^2) + (pi - arccos t) t) / pi.
/// Throws NumericalFault for |t| > 1 + 1e-12.
template <typename Scalar>
  requires(!std::is_base_of_v<Eigen::ArrayBase<Scalar>, Scalar>)
Scalar psi(Scalar t) {
  using std::abs;
  using std::acos;
  using std::sqrt;
  if (!(abs(t) <= Scalar(1) + Scalar(kCorrelationSlack))) throw NumericalFault("psi argument outside [-1, 1]");
  t = t > Scalar(1) ? Scalar(1) : (t < Scalar(-1) ? Scalar(-1) : t);
  const Scalar pi = Scalar(EIGEN_PI);
  return (sqrt((Scalar(1) - t) * (Scalar(1) + t)) + (pi - acos(t)) * t) / pi;
}

/// Elementwise Psi on an array expression; arguments are clamped to [-1, 1].
template <typename Derived>
auto psi(const Eigen::ArrayBase<Derived>& t) {
  using S = typename Derived::Scalar;
  const auto c = t.derived().max(S(-1)).min(S(1));
  return (((S(1) - c) * (S(1) + c)).sqrt() + (S(EIGEN_PI) - c.acos()) * c) / S(EIGEN_PI);
}

/// Derivative Psi'(t) = 1 - arccos(t)/pi.
template <typename Scalar>
Scalar psi_derivative(Scalar t) {
  using std::acos;
  t = t > Scalar(1) ? Scalar(1) : (t < Scalar(-1) ? Scalar(-1) : t);
  return Scalar(1) - acos(t) / Scalar(EIGEN_PI);
}

/// Q_1 .. Q_{L+1}: Q_1 = sigma_w2 + sigma_b2, Q_l = sigma_w2 E[tau(sqrt(Q_{l-1}) Z)^2] + sigma_b2.
std::vector<double> q_recursion(const KernelParams& params, KernelMethod method = KernelMethod::Auto);

/// F_1(t) .. F_{L+1}(t) given the Q_l.
Eigen::VectorXd f_recursion(const KernelParams& params, std::span<const double> q, double t,
                            KernelMethod method = KernelMethod::Auto);

/// F'(1). Closed form: F'_1(1) = sigma_w2/(sigma_w2 + sigma_b2),
/// F'_l(1) = Q_{l-1} sigma_w2 / (Q_{l-1} sigma_w2 + 2 sigma_b2) F'_{l-1}(1).
/// Quadrature: one-sided difference at t = 1 with Richardson extrapolation.
/// Throws NumericalFault if F'(1) <= 0 (no signal propagates).
double f_prime_1(const KernelParams& params, std::span<const double> q, KernelMethod method = KernelMethod::Auto);

/// 2001 uniform points on [-1, 1] plus a geometric refinement 1 - t in [1e-8, 1e-1].
Eigen::VectorXd default_grid();

struct KernelGrid {
  Eigen::VectorXd t;
  /// Row i holds F_1(t_i) .. F_{L+1}(t_i).
  Eigen::MatrixXd f;
};

/// Kernel of a random network: K(x, y) = Q F(x.y/n). Immutable once built.
class KernelProfile {
 public:
  static KernelProfile build(const KernelParams& params, KernelMethod method = KernelMethod::Auto);

  const KernelParams& params() const noexcept { return params_; }
  /// The method actually used (never Auto).
  KernelMethod method() const noexcept { return method_; }
  int layers() const noexcept { return params_.layers; }

  const std::vector<double>& q_per_layer() const noexcept { return q_; }
  double q() const noexcept { return q_.back(); }

  bool degenerate() const noexcept { return !f_prime_1_.has_value(); }
  /// Throws NumericalFault for degenerate profiles (sigma_w2 = 0).
  double f_prime_1() const;

  /// F(t) by exact recursive evaluation.
  double f(double t) const { return f_layers(t)[params_.layers]; }
  Eigen::VectorXd f_layers(double t) const { return f_recursion(params_, q_, t, method_); }
  /// F_l(t) for 1-based layer l in [1, L+1].
  double layer_correlation(int layer, double t) const;
  /// G_l = Q_l F_l(t).
  double layer_covariance(int layer, double t) const;

  const KernelGrid& grid() const noexcept { return grid_; }
  /// Linear interpolation of the tabulated F.
  double f_interpolated(double t) const;

 private:
  KernelParams params_;
  KernelMethod method_ = KernelMethod::ClosedForm;
  std::vector<double> q_;
  std::optional<double> f_prime_1_;
  KernelGrid grid_;
};

/// Q F(x.y/n). Throws DimensionMismatch on length mismatch.
double covariance(const KernelProfile& profile, const BitString& x, const BitString& y);

/// Variance of phi(y) - phi(x) for strings one flip apart: 2Q(1 - F(1 - 2/n)).
double step_variance(const KernelProfile& profile, int n);

}  // namespace simbias
