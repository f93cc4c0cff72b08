#pragma once
// Exact reference for tiny pinned systems. For an interior region A of at
// most 4 sites with killed boundary, the partition function expands over
// contact subsets:
//   Z = sum_{S subset A} prod_{x in S} (w_x - 1) * P(phi_S in W^S),
// with w_x = e^{beta omega_x - lambda(beta) + h} and W = [u-1, u+1], and the
// contact probability at x reuses the same window-mass table:
//   P(contact at x) = (1/Z) sum_S prod_{y in S} (w_y - 1) * P(win on S u {x}).
// Window masses are multivariate normal box probabilities, evaluated by
// sequential-conditioning quadrature (Cholesky transform + tensor
// Gauss-Legendre with order doubling) to ~1e-8.
#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "gffpin/disorder.hpp"
#include "gffpin/lattice.hpp"
#include "gffpin/normal.hpp"
#include "gffpin/quadrature.hpp"

namespace gffpin {

// P(X in prod_i [lo_i, hi_i]) for X ~ N(0, cov), up to dimension 4.
inline double mvnBoxProbability(const Eigen::MatrixXd& cov,
                                const std::vector<double>& lo,
                                const std::vector<double>& hi,
                                double tol = 1e-9) {
  const int k = static_cast<int>(cov.rows());
  GFFPIN_CHECK(k >= 1 && k <= 4, "mvnBoxProbability: dimension must be 1..4");
  GFFPIN_CHECK(static_cast<int>(lo.size()) == k &&
                   static_cast<int>(hi.size()) == k,
               "mvnBoxProbability: bound size mismatch");
  if (k == 1) return normalIntervalMass(0.0, std::sqrt(cov(0, 0)), lo[0], hi[0]);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  GFFPIN_CHECK(llt.info() == Eigen::Success,
               "mvnBoxProbability: covariance not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  // Sequential conditioning: eta_i standard normal, X = L eta. Given
  // eta_1..eta_{i-1}, the constraint confines eta_i to an interval whose
  // mass multiplies the integrand; the outer variables are integrated on
  // [0,1] with the inverse-cdf substitution, leaving a smooth integrand.
  auto evaluate = [&](int order) {
    const QuadRule& rule = gaussLegendre(order);
    std::vector<double> nodes01(rule.nodes.size()), w01(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      nodes01[i] = 0.5 * (rule.nodes[i] + 1.0);
      w01[i] = 0.5 * rule.weights[i];
    }
    std::vector<double> eta(static_cast<std::size_t>(k), 0.0);
    std::function<double(int)> rec = [&](int level) -> double {
      double shift = 0.0;
      for (int j = 0; j < level; ++j)
        shift += L(level, j) * eta[static_cast<std::size_t>(j)];
      const double a = (lo[static_cast<std::size_t>(level)] - shift) / L(level, level);
      const double b = (hi[static_cast<std::size_t>(level)] - shift) / L(level, level);
      const double mass = normalIntervalMass(a, b);
      if (mass <= 0.0) return 0.0;
      if (level == k - 1) return mass;  // innermost integrates out exactly
      double acc = 0.0;
      for (std::size_t q = 0; q < nodes01.size(); ++q) {
        const double ca = normalCdf(a);
        double c = ca + nodes01[q] * mass;
        c = std::min(std::max(c, 1e-300), 1.0 - 1e-16);
        eta[static_cast<std::size_t>(level)] = normalQuantile(c);
        acc += w01[q] * rec(level + 1);
      }
      return mass * acc;
    };
    return rec(0);
  };

  double prev = evaluate(24);
  for (int order = 48; order <= 192; order *= 2) {
    const double cur = evaluate(order);
    if (std::fabs(cur - prev) <= tol * std::max(1.0, std::fabs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

struct PartitionOracle {
  double logZ = 0.0;
  std::vector<double> contactProb;  // per interior site, raster order
};

// Exact pinned partition function and contact probabilities for the killed
// field on the interior of `box` (at most 4 interior sites). omega is given
// on the interior sites in raster order; the contact window is [u-1, u+1].
inline PartitionOracle exactPartitionOracle(int d, const BoxRegion& box,
                                            const std::vector<double>& omega,
                                            DisorderLaw law, double beta,
                                            double h, double u = 0.0) {
  const std::vector<Site> interior = boxSites(box.interior());
  const int k = static_cast<int>(interior.size());
  GFFPIN_CHECK(k >= 1 && k <= 4,
               "exactPartitionOracle: interior must have 1..4 sites, got " << k);
  GFFPIN_CHECK(static_cast<int>(omega.size()) == k,
               "exactPartitionOracle: omega size mismatch");

  // Dense covariance of the killed field on the interior.
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    Q(i, i) = 2.0 * d;
    for (int j = 0; j < k; ++j)
      if (l1Distance(interior[static_cast<std::size_t>(i)],
                     interior[static_cast<std::size_t>(j)], d) == 1)
        Q(i, j) = -1.0;
  }
  const Eigen::MatrixXd G = Q.inverse();

  const double lam = (beta > 0.0) ? logMgf(law, beta) : 0.0;
  std::vector<double> wm1(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    wm1[static_cast<std::size_t>(i)] =
        std::expm1(beta * omega[static_cast<std::size_t>(i)] - lam + h);

  // Window mass for every subset mask.
  std::vector<double> winProb(static_cast<std::size_t>(1) << k, 1.0);
  for (unsigned mask = 1; mask < winProb.size(); ++mask) {
    std::vector<int> members;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) members.push_back(i);
    const int m = static_cast<int>(members.size());
    Eigen::MatrixXd sub(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        sub(a, b) = G(members[static_cast<std::size_t>(a)],
                      members[static_cast<std::size_t>(b)]);
    std::vector<double> lo(static_cast<std::size_t>(m), u - 1.0);
    std::vector<double> hi(static_cast<std::size_t>(m), u + 1.0);
    winProb[mask] = mvnBoxProbability(sub, lo, hi);
  }

  double Z = 0.0;
  std::vector<double> numer(static_cast<std::size_t>(k), 0.0);
  for (unsigned mask = 0; mask < winProb.size(); ++mask) {
    double term = 1.0;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) term *= wm1[static_cast<std::size_t>(i)];
    Z += term * winProb[mask];
    for (int i = 0; i < k; ++i)
      numer[static_cast<std::size_t>(i)] +=
          term * winProb[mask | (1u << i)];
  }
  GFFPIN_CHECK(Z > 0.0, "exactPartitionOracle: nonpositive partition function");

  PartitionOracle out;
  out.logZ = std::log(Z);
  out.contactProb.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    out.contactProb[static_cast<std::size_t>(i)] =
        numer[static_cast<std::size_t>(i)] / Z;
  return out;
}

}  // namespace gffpin
