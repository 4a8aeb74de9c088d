#include "simbias/quadrature.hpp"

#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace simbias::quadrature {

const GaussHermiteRule& gauss_hermite(int order) {
  static std::mutex mutex;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(order); it != cache.end()) return it->second;
  if (order < 1) throw NumericalFault("Gauss-Hermite order must be positive");

  // He_{k+1}(x) = x He_k(x) - k He_{k-1}(x): symmetric Jacobi matrix with off-diagonal sqrt(k).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) throw NumericalFault("Gauss-Hermite eigen-decomposition failed");

  GaussHermiteRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = solver.eigenvectors().row(0).transpose().array().square();
  rule.weights /= rule.weights.sum();
  return cache.emplace(order, std::move(rule)).first->second;
}

std::vector<double> normal_breaks(std::span<const double> kinks) {
  std::vector<double> breaks;
  for (int k = -4; k <= 4; ++k) breaks.push_back(kNormalCut * k / 4.0);
  for (double b : kinks)
    if (std::isfinite(b) && b > -kNormalCut && b < kNormalCut) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double a, double b) { return b - a < 1e-14; }),
               breaks.end());
  return breaks;
}

}  // namespace simbias::quadrature
