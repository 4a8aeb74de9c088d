#include "simbias/gp_oracle.hpp"

#include <map>
#include <random>

#include "simbias/errors.hpp"
#include "simbias/rng.hpp"

namespace simbias {

GpEnsemble build_ensemble(const KernelProfile& profile, std::vector<BitString> points, std::uint64_t seed) {
  if (points.empty()) throw ConfigError("ensemble needs at least one point");
  if (points.size() > kMaxEnsemblePoints) throw ConfigError("ensemble is limited to 4096 points");
  const int n = points.front().size();
  for (const auto& p : points)
    if (p.size() != n) throw DimensionMismatch("ensemble points have different lengths");

  const auto m = static_cast<Eigen::Index>(points.size());
  const double q = profile.q();
  // Overlaps take at most n + 1 values, so F is evaluated once per distinct dot product.
  std::map<int, double> by_dot;
  GpEnsemble e;
  e.cov.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    e.cov(i, i) = q;
    for (Eigen::Index j = 0; j < i; ++j) {
      const int d = dot(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
      auto it = by_dot.find(d);
      if (it == by_dot.end()) it = by_dot.emplace(d, q * profile.f(static_cast<double>(d) / n)).first;
      e.cov(i, j) = e.cov(j, i) = it->second;
    }
  }

  for (double jitter = 1e-12 * q; jitter <= 1e-6 * q * (1.0 + 1e-9); jitter *= 10.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(e.cov + jitter * Eigen::MatrixXd::Identity(m, m));
    if (llt.info() == Eigen::Success) {
      e.chol = llt.matrixL();
      e.jitter = jitter;
      e.points = std::move(points);
      e.seed = seed;
      return e;
    }
  }
  throw NumericalFault("covariance is not positive semidefinite even with jitter 1e-6 Q");
}

Eigen::VectorXd sample(const GpEnsemble& ensemble, std::uint64_t trial_index) {
  Engine rng = make_engine(ensemble.seed, Stream::GpOracle, {static_cast<std::uint64_t>(ensemble.cov.rows()), trial_index});
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(ensemble.chol.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return ensemble.chol.triangularView<Eigen::Lower>() * z;
}

}  // namespace simbias
