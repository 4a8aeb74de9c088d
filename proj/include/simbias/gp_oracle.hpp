#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "simbias/bitstring.hpp"
#include "simbias/kernel.hpp"

namespace simbias {

/// Exact Gaussian process with kernel Q F(x.y/n) restricted to a finite point
/// set: the infinite-width limit of the random network.
struct GpEnsemble {
  std::vector<BitString> points;
  /// K_ij = Q F(x_i.x_j/n).
  Eigen::MatrixXd cov;
  /// Lower-triangular factor of cov + jitter I.
  Eigen::MatrixXd chol;
  double jitter = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMaxEnsemblePoints = 4096;

/// Factorizes the covariance, escalating the jitter from 1e-12 Q by factors of
/// 10 up to 1e-6 Q. Throws NumericalFault if even the largest jitter fails.
GpEnsemble build_ensemble(const KernelProfile& profile, std::vector<BitString> points, std::uint64_t seed = 0);

/// One joint draw of (phi(x_1), ..., phi(x_m)), deterministic per (seed, trial_index).
Eigen::VectorXd sample(const GpEnsemble& ensemble, std::uint64_t trial_index);

}  // namespace simbias
