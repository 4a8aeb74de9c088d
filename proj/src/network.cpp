#include "simbias/network.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <string>

#include "simbias/errors.hpp"

namespace simbias {

Activation Activation::relu() {
  return Activation(ActivationKind::ReLU, "relu", [](double v) { return v > 0.0 ? v : 0.0; }, {0.0});
}

Activation Activation::tanh() {
  return Activation(ActivationKind::Tanh, "tanh", [](double v) { return std::tanh(v); }, {});
}

Activation Activation::custom(std::string name, std::function<double(double)> fn,
                              std::vector<double> breakpoints) {
  if (!fn) throw ConfigError("custom activation needs a function");
  return Activation(ActivationKind::Custom, std::move(name), std::move(fn), std::move(breakpoints));
}

Activation Activation::from_name(const std::string& name) {
  if (name == "relu") return relu();
  if (name == "tanh") return tanh();
  throw ConfigError("unknown activation '" + name + "' (expected relu or tanh)");
}

NetworkConfig NetworkConfig::defaults(int n, std::uint64_t seed) {
  NetworkConfig c;
  c.input_dim = n;
  c.hidden_widths = {n, n};
  c.seed = seed;
  return c;
}

void NetworkConfig::validate() const {
  if (input_dim < 1) throw ConfigError("input dimension must be >= 1");
  if (hidden_widths.empty()) throw ConfigError("at least one hidden layer is required");
  for (int w : hidden_widths)
    if (w < 1) throw ConfigError("hidden widths must be >= 1");
  if (!(sigma_w2 >= 0.0) || !(sigma_b2 >= 0.0)) throw ConfigError("variances must be nonnegative");
  if (!(sigma_w2 + sigma_b2 > 0.0)) throw ConfigError("sigma_w2 + sigma_b2 must be positive");
}

namespace {

std::uint64_t hash_doubles(std::uint64_t h, const double* data, Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) h = mix64(h ^ std::bit_cast<std::uint64_t>(data[i]));
  return h;
}

}  // namespace

DeepNet::DeepNet(NetworkConfig config, std::vector<Eigen::MatrixXd> weights,
                 std::vector<Eigen::VectorXd> biases)
    : config_(std::move(config)), weights_(std::move(weights)), biases_(std::move(biases)) {
  config_.validate();
  const std::size_t depth = config_.hidden_widths.size() + 1;
  if (weights_.size() != depth || biases_.size() != depth)
    throw DimensionMismatch("expected " + std::to_string(depth) + " weight layers");
  Eigen::Index fan_in = config_.input_dim;
  for (std::size_t l = 0; l < depth; ++l) {
    const Eigen::Index fan_out = l + 1 < depth ? config_.hidden_widths[l] : 1;
    if (weights_[l].rows() != fan_out || weights_[l].cols() != fan_in || biases_[l].size() != fan_out)
      throw DimensionMismatch("layer " + std::to_string(l + 1) + " has inconsistent shape");
    fan_in = fan_out;
  }
  std::uint64_t h = mix64(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    h = hash_doubles(h, weights_[l].data(), weights_[l].size());
    h = hash_doubles(h, biases_[l].data(), biases_[l].size());
  }
  digest_ = h;
}

DeepNet sample_network(const NetworkConfig& config, std::uint64_t trial_index) {
  config.validate();
  Engine rng = make_engine(config.seed, Stream::Network,
                           {static_cast<std::uint64_t>(config.input_dim), trial_index});
  std::normal_distribution<double> normal;

  const std::size_t depth = config.hidden_widths.size() + 1;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  weights.reserve(depth);
  biases.reserve(depth);
  Eigen::Index fan_in = config.input_dim;
  for (std::size_t l = 0; l < depth; ++l) {
    const Eigen::Index fan_out = l + 1 < depth ? config.hidden_widths[l] : 1;
    const double w_scale = std::sqrt(config.sigma_w2 / static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r)
      for (Eigen::Index c = 0; c < fan_in; ++c) w(r, c) = w_scale * normal(rng);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(fan_out);
    if (config.sigma_b2 > 0.0) {
      const double b_scale = std::sqrt(config.sigma_b2);
      for (Eigen::Index r = 0; r < fan_out; ++r) b[r] = b_scale * normal(rng);
    }
    weights.push_back(std::move(w));
    biases.push_back(std::move(b));
    fan_in = fan_out;
  }
  return DeepNet(config, std::move(weights), std::move(biases));
}

namespace {

void check_input(const DeepNet& net, const BitString& x) {
  if (x.size() != net.input_dim())
    throw DimensionMismatch("input has length " + std::to_string(x.size()) + ", network expects " +
                            std::to_string(net.input_dim()));
}

double propagate(const DeepNet& net, Eigen::VectorXd h) {
  const auto& tau = net.config().activation;
  for (int l = 1; l < net.depth(); ++l) {
    tau.apply_inplace(h);
    h = net.weight(l) * h + net.bias(l);
  }
  return h[0];
}

}  // namespace

double forward(const DeepNet& net, const BitString& x) {
  check_input(net, x);
  return propagate(net, net.weight(0) * x.to_vector() + net.bias(0));
}

Eigen::RowVectorXd forward_from_first_layer(const DeepNet& net, const Eigen::MatrixXd& preactivations) {
  ForwardWorkspace ws;
  Eigen::RowVectorXd phi;
  forward_from_first_layer(net, preactivations, ws, phi);
  return phi;
}

void forward_from_first_layer(const DeepNet& net, const Eigen::Ref<const Eigen::MatrixXd>& preactivations,
                              ForwardWorkspace& workspace, Eigen::RowVectorXd& phi) {
  if (preactivations.rows() != net.weight(0).rows())
    throw DimensionMismatch("preactivation batch has wrong height");
  const auto& tau = net.config().activation;
  auto& h = workspace.layers;
  h.resize(static_cast<std::size_t>(net.depth()));
  h[0] = preactivations;
  for (int l = 1; l < net.depth(); ++l) {
    const auto i = static_cast<std::size_t>(l);
    tau.apply_inplace(h[i - 1]);
    h[i].noalias() = net.weight(l) * h[i - 1];
    h[i].colwise() += net.bias(l);
  }
  phi = h.back().row(0);
}

FirstLayerCache forward_with_first_layer_cache(const DeepNet& net, const BitString& x) {
  check_input(net, x);
  FirstLayerCache cache;
  cache.preactivation = net.weight(0) * x.to_vector() + net.bias(0);
  cache.phi = propagate(net, cache.preactivation);
  cache.net_digest = net.digest();
  cache.input_digest = x.digest();
  return cache;
}

double forward_flip(const DeepNet& net, const FirstLayerCache& cache, const BitString& x, int i) {
  check_input(net, x);
  if (cache.net_digest != net.digest() || cache.input_digest != x.digest())
    throw StaleCache("first-layer cache does not match this network and input");
  if (i < 0 || i >= x.size()) throw DimensionMismatch("bit index out of range");
  return propagate(net, cache.preactivation + flip_delta(net, x, i));
}

DeepNet passthrough_network(int n) {
  NetworkConfig c;
  c.input_dim = n;
  c.hidden_widths = {2};
  c.sigma_w2 = 1.0;
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(2, n);
  w1(0, 0) = 1.0;
  w1(1, 0) = -1.0;
  Eigen::MatrixXd w2(1, 2);
  w2 << 1.0, -1.0;
  return DeepNet(c, {w1, w2}, {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1)});
}

DeepNet constant_network(int n, double value) {
  NetworkConfig c;
  c.input_dim = n;
  c.hidden_widths = {1};
  c.sigma_w2 = 1.0;
  Eigen::VectorXd out_bias(1);
  out_bias << value;
  return DeepNet(c, {Eigen::MatrixXd::Zero(1, n), Eigen::MatrixXd::Zero(1, 1)},
                 {Eigen::VectorXd::Zero(1), out_bias});
}

}  // namespace simbias
