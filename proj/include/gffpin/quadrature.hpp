#pragma once
// Gaussian quadrature rules via Golub-Welsch (symmetric tridiagonal
// eigendecomposition). Hermite rules are in probabilists' normalization:
// sum_i w_i f(x_i) ~ E[f(Z)], Z standard normal.
#include <Eigen/Dense>
#include <map>
#include <mutex>
#include <vector>

#include "gffpin/common.hpp"

namespace gffpin {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {
inline QuadRule golubWelsch(int n, const std::vector<double>& offdiag,
                            double weightScale) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) J(k, k + 1) = J(k + 1, k) = offdiag[k];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GFFPIN_CHECK(es.info() == Eigen::Success, "golubWelsch: eigensolver failed");
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = weightScale * v0 * v0;
  }
  return rule;
}

inline const QuadRule& cached(std::map<int, QuadRule>& cache, std::mutex& mtx,
                              int n, QuadRule (*make)(int)) {
  std::lock_guard<std::mutex> lk(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make(n)).first;
  return it->second;
}
}  // namespace detail

// E[f(Z)] ~ sum w_i f(x_i): probabilists' Hermite, weights sum to 1.
inline const QuadRule& gaussHermite(int n) {
  GFFPIN_CHECK(n >= 1, "gaussHermite: order must be >= 1");
  static std::map<int, QuadRule> cache;
  static std::mutex mtx;
  return detail::cached(cache, mtx, n, +[](int m) {
    std::vector<double> off(m > 1 ? m - 1 : 0);
    for (int k = 1; k < m; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
    return detail::golubWelsch(m, off, 1.0);
  });
}

// int_{-1}^{1} f ~ sum w_i f(x_i), weights sum to 2.
inline const QuadRule& gaussLegendre(int n) {
  GFFPIN_CHECK(n >= 1, "gaussLegendre: order must be >= 1");
  static std::map<int, QuadRule> cache;
  static std::mutex mtx;
  return detail::cached(cache, mtx, n, +[](int m) {
    std::vector<double> off(m > 1 ? m - 1 : 0);
    for (int k = 1; k < m; ++k)
      off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    return detail::golubWelsch(m, off, 2.0);
  });
}

// int_a^b f via an n-point Legendre rule mapped onto [a,b].
template <class F>
double integrateLegendre(F&& f, double a, double b, int n) {
  const QuadRule& rule = gaussLegendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return acc * half;
}

// E[f(Z)] with the order doubled until two successive rules agree to relTol.
template <class F>
double expectationNormal(F&& f, double relTol = 1e-12, int startOrder = 64,
                         int maxOrder = 1024) {
  double prev = 0.0;
  bool havePrev = false;
  for (int n = startOrder; n <= maxOrder; n *= 2) {
    const QuadRule& rule = gaussHermite(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      acc += rule.weights[i] * f(rule.nodes[i]);
    if (havePrev) {
      const double scale = std::max({1.0, std::fabs(acc), std::fabs(prev)});
      if (std::fabs(acc - prev) <= relTol * scale) return acc;
    }
    prev = acc;
    havePrev = true;
  }
  return prev;
}

}  // namespace gffpin
