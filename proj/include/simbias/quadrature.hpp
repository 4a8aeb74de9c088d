#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "simbias/errors.hpp"

namespace simbias::quadrature {

/// Gauss-Hermite rule for the standard normal weight: sum_i w_i f(x_i) ~ E[f(Z)].
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Golub-Welsch on the probabilists' Hermite Jacobi matrix. Rules are cached.
const GaussHermiteRule& gauss_hermite(int order);

template <typename F>
double gaussian_expectation(const GaussHermiteRule& rule, F&& f) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(rule.nodes[i]);
  return s;
}

/// E[f(Z1, Z2)] for independent standard normals, product rule.
template <typename F>
double gaussian_expectation_2d(const GaussHermiteRule& rule, F&& f) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    double inner = 0.0;
    for (Eigen::Index j = 0; j < rule.nodes.size(); ++j) inner += rule.weights[j] * f(rule.nodes[i], rule.nodes[j]);
    s += rule.weights[i] * inner;
  }
  return s;
}

struct Tolerance {
  double abs = 1e-14;
  double rel = 1e-12;
  int max_panels = 4000;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1] (QUADPACK qk15).
inline constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <typename F>
Panel gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over the panels
/// delimited by the sorted `breaks` (at least two points). Throws
/// NumericalFault if the tolerance is not met within max_panels.
template <typename F>
double integrate(F&& f, std::span<const double> breaks, Tolerance tol = {}) {
  std::priority_queue<detail::Panel> heap;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    auto p = detail::gk15(f, breaks[i], breaks[i + 1]);
    total += p.value;
    error += p.error;
    heap.push(p);
  }
  int panels = static_cast<int>(heap.size());
  while (error > std::max(tol.abs, tol.rel * std::abs(total))) {
    if (panels >= tol.max_panels || heap.empty()) throw NumericalFault("adaptive quadrature did not converge");
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) throw NumericalFault("adaptive quadrature exhausted precision");
    const auto left = detail::gk15(f, worst.a, mid);
    const auto right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  return total;
}

/// Half-width of the truncated normal range used by the adaptive path.
inline constexpr double kNormalCut = 12.0;

/// Panel boundaries for E[f(Z)] on [-cut, cut]: a coarse uniform split plus
/// every kink location that falls inside.
std::vector<double> normal_breaks(std::span<const double> kinks);

/// E[f(Z)], Z ~ N(0,1), by adaptive integration of f(z) exp(-z^2/2)/sqrt(2 pi).
template <typename F>
double gaussian_expectation_adaptive(F&& f, std::span<const double> kinks, Tolerance tol = {}) {
  constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
  const auto breaks = normal_breaks(kinks);
  return integrate([&](double z) { return f(z) * std::exp(-0.5 * z * z) * kInvSqrt2Pi; }, breaks, tol);
}

}  // namespace simbias::quadrature
