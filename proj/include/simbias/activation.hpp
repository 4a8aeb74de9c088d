#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace simbias {

enum class ActivationKind { ReLU, Tanh, Custom };

/// Scalar activation tau. Custom activations carry a name (recorded in output
/// files) and optionally the points where they are not smooth, which the
/// quadrature kernel path uses as panel boundaries.
class Activation {
 public:
  Activation() : Activation(relu()) {}

  static Activation relu();
  static Activation tanh();
  static Activation custom(std::string name, std::function<double(double)> fn,
                           std::vector<double> breakpoints = {});
  /// "relu" or "tanh"; throws ConfigError otherwise.
  static Activation from_name(const std::string& name);

  ActivationKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

  double operator()(double v) const { return kind_ == ActivationKind::ReLU ? (v > 0.0 ? v : 0.0) : (*fn_)(v); }

  /// Elementwise application, with vectorized paths for the built-in kinds.
  template <typename Derived>
  void apply_inplace(Eigen::DenseBase<Derived>& m) const {
    switch (kind_) {
      case ActivationKind::ReLU: m.derived() = m.derived().cwiseMax(0.0); break;
      case ActivationKind::Tanh: m.derived() = m.derived().array().tanh().matrix(); break;
      case ActivationKind::Custom: m.derived() = m.derived().unaryExpr(std::cref(*fn_)); break;
    }
  }

 private:
  Activation(ActivationKind kind, std::string name, std::function<double(double)> fn,
             std::vector<double> breakpoints)
      : kind_(kind), name_(std::move(name)),
        fn_(std::make_shared<const std::function<double(double)>>(std::move(fn))),
        breakpoints_(std::move(breakpoints)) {}

  ActivationKind kind_;
  std::string name_;
  std::shared_ptr<const std::function<double(double)>> fn_;
  std::vector<double> breakpoints_;
};

}  // namespace simbias
