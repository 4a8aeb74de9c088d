#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "simbias/activation.hpp"
#include "simbias/bitstring.hpp"

namespace simbias {

/// Architecture and initialization of a random fully connected network
/// phi: {-1,+1}^n -> R with hidden_widths.size() hidden layers and one output.
struct NetworkConfig {
  int input_dim = 1;
  std::vector<int> hidden_widths;
  double sigma_w2 = 2.0;
  double sigma_b2 = 0.0;
  Activation activation = Activation::relu();
  std::uint64_t seed = 0;

  /// Two hidden layers of width n, sigma_w^2 = 2, sigma_b^2 = 0, ReLU.
  static NetworkConfig defaults(int n, std::uint64_t seed = 0);

  int layers() const noexcept { return static_cast<int>(hidden_widths.size()); }
  /// Throws ConfigError unless n >= 1, L >= 1, widths >= 1, sigma_w2 + sigma_b2 > 0.
  void validate() const;
};

/// Sampled weights and biases. Layer l (0-based) maps width(l) -> width(l+1)
/// where width(0) = n and the last layer has a single output unit.
class DeepNet {
 public:
  /// Takes explicit parameters, e.g. hand-built or loaded nets. Shapes are checked.
  DeepNet(NetworkConfig config, std::vector<Eigen::MatrixXd> weights,
          std::vector<Eigen::VectorXd> biases);

  const NetworkConfig& config() const noexcept { return config_; }
  int input_dim() const noexcept { return config_.input_dim; }
  /// Number of weight layers, L + 1.
  int depth() const noexcept { return static_cast<int>(weights_.size()); }
  const Eigen::MatrixXd& weight(int layer) const { return weights_.at(static_cast<std::size_t>(layer)); }
  const Eigen::VectorXd& bias(int layer) const { return biases_.at(static_cast<std::size_t>(layer)); }
  /// Hash of every weight and bias bit pattern.
  std::uint64_t digest() const noexcept { return digest_; }

 private:
  NetworkConfig config_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  std::uint64_t digest_ = 0;
};

/// Draws W^(l) entries from N(0, sigma_w2/n_{l-1}) and biases from N(0, sigma_b2)
/// using the stream derived from (config.seed, n, trial_index).
DeepNet sample_network(const NetworkConfig& config, std::uint64_t trial_index);

/// phi(x). Throws DimensionMismatch when x.size() != n.
double forward(const DeepNet& net, const BitString& x);

/// Propagates a batch of first-layer preactivations (one column per input,
/// biases already included) through the remaining layers.
Eigen::RowVectorXd forward_from_first_layer(const DeepNet& net, const Eigen::MatrixXd& preactivations);

/// Per-layer buffers reused across batches of equal size.
struct ForwardWorkspace {
  std::vector<Eigen::MatrixXd> layers;
};

/// As above, writing phi for each column into `phi` without reallocating
/// when consecutive batches have the same size.
void forward_from_first_layer(const DeepNet& net, const Eigen::Ref<const Eigen::MatrixXd>& preactivations,
                              ForwardWorkspace& workspace, Eigen::RowVectorXd& phi);

/// sign(phi) with sign(0) = +1.
inline int classify(double phi) noexcept { return phi >= 0.0 ? 1 : -1; }
inline int classify(const DeepNet& net, const BitString& x) { return classify(forward(net, x)); }

/// First-layer preactivation W^(1) x + b^(1) for one input, tagged with the
/// digests of the net and input it was computed from.
struct FirstLayerCache {
  Eigen::VectorXd preactivation;
  double phi = 0.0;
  std::uint64_t net_digest = 0;
  std::uint64_t input_digest = 0;
};

FirstLayerCache forward_with_first_layer_cache(const DeepNet& net, const BitString& x);

/// phi of x with bit i flipped: flipping bit i shifts the first-layer
/// preactivation by -2 x_i W^(1)(:, i). Throws StaleCache if the cache was
/// built from another net or input.
double forward_flip(const DeepNet& net, const FirstLayerCache& cache, const BitString& x, int i);

/// Change in first-layer preactivation caused by flipping bit i of x.
inline auto flip_delta(const DeepNet& net, const BitString& x, int i) {
  return (-2.0 * x[i]) * net.weight(0).col(i);
}

/// phi(x) = x_0 for every x, via ReLU(x_0) - ReLU(-x_0).
DeepNet passthrough_network(int n);
/// All weights zero and output bias `value`, so phi is constant.
DeepNet constant_network(int n, double value);

}  // namespace simbias
