#pragma once
// Scalar analytics of the pinning model: the effective intensity chi, the
// optimal contact density of the IID reference model, the shifted window
// height, truncation cutoffs, fractional moments, and binomial tail lemmas.
// Everything here is deterministic quadrature/root-finding; no sampling.
#include <cmath>

#include "gffpin/disorder.hpp"
#include "gffpin/quadrature.hpp"

namespace gffpin {

// chi(beta) = 1 / (2 (e^{lambda(2 beta) - 2 lambda(beta)} - 1)).
inline double chi(DisorderLaw law, double beta) {
  GFFPIN_CHECK(beta > 0.0, "chi: beta must be positive");
  const double gap = logMgf(law, 2.0 * beta) - 2.0 * logMgf(law, beta);
  const double denom = 2.0 * std::expm1(gap);
  GFFPIN_CHECK(denom > 0.0, "chi: degenerate disorder (zero variance reward)");
  return 1.0 / denom;
}

// Same quantity from its variance representation 1 / (2 Var(e^{beta omega -
// lambda(beta)})), evaluated by quadrature — an independent cross-check.
inline double chiVarianceForm(DisorderLaw law, double beta) {
  GFFPIN_CHECK(beta > 0.0, "chiVarianceForm: beta must be positive");
  const double lam = logMgf(law, beta);
  const double second = expectDisorder(
      law, [&](double w) { return std::exp(2.0 * (beta * w - lam)); });
  const double var = second - 1.0;  // E e^{beta omega - lambda} = 1 exactly
  GFFPIN_CHECK(var > 0.0, "chiVarianceForm: degenerate disorder");
  return 1.0 / (2.0 * var);
}

struct OptimalDensity {
  double p = 0.0;      // maximizer in [0,1]
  double value = 0.0;  // E log(1 + p xi) at the maximizer
};

// Maximizes E[log(1 + p xi)] over p in [0,1], xi = e^{beta omega - lambda + h} - 1.
// This is the per-site free energy of the IID contact reference model.
inline OptimalDensity optimalDensity(DisorderLaw law, double beta, double h) {
  GFFPIN_CHECK(beta > 0.0, "optimalDensity: beta must be positive");
  const double lam = logMgf(law, beta);
  auto xi = [&](double w) { return std::expm1(beta * w - lam + h); };
  auto derivative = [&](double p) {
    return expectDisorder(law, [&](double w) {
      const double x = xi(w);
      return x / (1.0 + p * x);
    });
  };
  auto valueAt = [&](double p) {
    return expectDisorder(law,
                          [&](double w) { return std::log1p(p * xi(w)); });
  };
  OptimalDensity res;
  // E[xi] = e^h - 1: no gain possible when h <= 0.
  if (h <= 0.0) return res;
  if (derivative(1.0) >= 0.0) {
    res.p = 1.0;
    res.value = valueAt(1.0);
    return res;
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (derivative(mid) > 0.0 ? lo : hi) = mid;
  }
  res.p = 0.5 * (lo + hi);
  res.value = valueAt(res.p);
  return res;
}

// First-order-condition residuals at a claimed maximizer, for verification:
// E[xi/(1+p xi)] and E[1/(1+p xi)] - 1 both vanish at an interior optimum.
struct OptimalityResiduals {
  double gradient = 0.0;
  double massIdentity = 0.0;
};

inline OptimalityResiduals optimalDensityResiduals(DisorderLaw law, double beta,
                                                   double h, double p) {
  const double lam = logMgf(law, beta);
  auto xi = [&](double w) { return std::expm1(beta * w - lam + h); };
  OptimalityResiduals r;
  r.gradient = expectDisorder(law, [&](double w) {
    const double x = xi(w);
    return x / (1.0 + p * x);
  });
  r.massIdentity = expectDisorder(law, [&](double w) {
    return 1.0 / (1.0 + p * xi(w));
  }) - 1.0;
  return r;
}

// Largest window mass reachable at u = 0, i.e. P(sigma Z in [-1,1]).
inline double maxWindowMass(double sigma2) {
  GFFPIN_CHECK(sigma2 > 0.0, "maxWindowMass: sigma2 must be positive");
  return normalIntervalMass(0.0, std::sqrt(sigma2), -1.0, 1.0);
}

// The shifted window height u solving P(sigma Z in [u-1, u+1]) = 2 h chi(beta).
inline double shiftHeight(double sigma2, DisorderLaw law, double beta, double h) {
  GFFPIN_CHECK(h > 0.0, "shiftHeight: h must be positive");
  const double target = 2.0 * h * chi(law, beta);
  const double cap = maxWindowMass(sigma2);
  GFFPIN_CHECK(target <= cap,
               "shiftHeight: window mass target " << target
               << " exceeds the threshold " << cap
               << " (h too large for this disorder/temperature)");
  const double sigma = std::sqrt(sigma2);
  auto mass = [&](double u) {
    return normalIntervalMass(0.0, sigma, u - 1.0, u + 1.0);
  };
  double lo = 0.0, hi = 2.0;
  while (mass(hi) > target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Closed-form height expansion: with s = sqrt(2 log(1/h)),
// u ~ sigma s + 1 - (sigma/2) log log(1/h) / s - sigma log(2 a sqrt(pi)) / s,
// where a is the window-mass intensity (a = 2 chi for the pinning window).
inline double shiftHeightExpansion(double sigma2, double a, double h) {
  GFFPIN_CHECK(h > 0.0 && h < 1.0, "shiftHeightExpansion: h must be in (0,1)");
  const double sigma = std::sqrt(sigma2);
  const double logInv = std::log(1.0 / h);
  const double s = std::sqrt(2.0 * logInv);
  return sigma * s + 1.0 - 0.5 * sigma * std::log(logInv) / s -
         sigma * std::log(2.0 * a * std::sqrt(M_PI)) / s;
}

// Diagnostic ratio P(sigma Z in [u-1, u-1+r]) / ((2 chi / sigma^2) u h r) at
// r = 1/log(1/h): tends to 1 from below as h -> 0, slowly.
inline double windowMassRatio(double sigma2, DisorderLaw law, double beta,
                              double h) {
  const double u = shiftHeight(sigma2, law, beta, h);
  const double r = 1.0 / std::log(1.0 / h);
  const double sigma = std::sqrt(sigma2);
  const double mass = normalIntervalMass(0.0, sigma, u - 1.0, u - 1.0 + r);
  return mass / ((2.0 * chi(law, beta) / sigma2) * u * h * r);
}

// Upper Gaussian tail P(Z > x).
inline double gaussianTail(double x) { return normalSf(x); }

// Smallest K >= sqrt(log(1/h)) with E[|omega|; |omega| > K] <= h^3.
inline double disorderCutoff(DisorderLaw law, double h) {
  GFFPIN_CHECK(h > 0.0 && h < 1.0, "disorderCutoff: h must be in (0,1)");
  const double floorK = std::sqrt(std::log(1.0 / h));
  const double bound = supportBound(law);
  if (std::isfinite(bound)) return std::max(bound, floorK);
  const double target = h * h * h;
  if (truncatedAbsMean(law, floorK) <= target) return floorK;
  double lo = floorK, hi = std::max(2.0 * floorK, 2.0);
  while (truncatedAbsMean(law, hi) > target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (truncatedAbsMean(law, mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct FractionalMoment {
  double value = 0.0;  // (1/theta) max_p log E[(1 + p xi)^theta]
  double p = 0.0;      // argmax
};

// Fractional-moment free energy proxy: concave in p, solved by ternary search.
inline FractionalMoment fractionalMomentValue(DisorderLaw law, double beta,
                                              double h, double theta) {
  GFFPIN_CHECK(theta > 0.0 && theta < 1.0,
               "fractionalMomentValue: theta must be in (0,1)");
  const double lam = logMgf(law, beta);
  auto objective = [&](double p) {
    const double m = expectDisorder(law, [&](double w) {
      return std::pow(1.0 + p * std::expm1(beta * w - lam + h), theta);
    });
    return std::log(m);
  };
  double lo = 0.0, hi = 1.0 - 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (objective(m1) < objective(m2)) lo = m1; else hi = m2;
  }
  FractionalMoment r;
  r.p = 0.5 * (lo + hi);
  r.value = objective(r.p) / theta;
  return r;
}

// Cubic envelope coefficient: max over the grid of (value(h) - chi h^2)/h^3,
// an empirical constant C with value(h) <= chi h^2 + C h^3 on the grid.
inline double fitCubicCoefficient(DisorderLaw law, double beta,
                                  const std::vector<double>& hGrid) {
  GFFPIN_CHECK(!hGrid.empty(), "fitCubicCoefficient: empty grid");
  const double c = chi(law, beta);
  double best = 0.0;
  for (double h : hGrid) {
    GFFPIN_CHECK(h > 0.0, "fitCubicCoefficient: grid must be positive");
    const double v = optimalDensity(law, beta, h).value;
    best = std::max(best, (v - c * h * h) / (h * h * h));
  }
  return best;
}

enum class BinomialLemma {
  LowerDelta,  // P(Bin <= Delta p n) <= e^{-np/2}, Delta in [0, 1/6]
  UpperDelta,  // P(Bin >= Delta p n) <= e^{-np/2}, Delta >= 3
  EtaForm      // P(Bin >= eta n) <= p^{eta n / 2}, valid when p <= (1/2)^{2/eta}
};

struct BinomialBoundReport {
  double exactTail = 0.0;
  double bound = 0.0;
  bool holds = false;
};

namespace detail {
inline double logBinomialPmf(int n, int k, double p) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
         k * std::log(p) + (n - k) * std::log1p(-p);
}

// floor/ceil that forgive the last few ulps of the product forming t, so a
// threshold that is an exact integer (e.g. 3 * 0.1 * 20) lands on it.
inline int robustFloor(double t) {
  return static_cast<int>(std::floor(t + 1e-9 * std::max(1.0, std::fabs(t))));
}
inline int robustCeil(double t) {
  return static_cast<int>(std::ceil(t - 1e-9 * std::max(1.0, std::fabs(t))));
}
}  // namespace detail

// Exact binomial tail versus the lemma's bound. `threshold` is Delta for the
// Delta forms and eta for the eta form.
inline BinomialBoundReport binomialBound(int n, double p, double threshold,
                                         BinomialLemma lemma) {
  GFFPIN_CHECK(n >= 1 && p > 0.0 && p < 1.0, "binomialBound: need n>=1, p in (0,1)");
  BinomialBoundReport rep;
  switch (lemma) {
    case BinomialLemma::LowerDelta: {
      GFFPIN_CHECK(threshold >= 0.0 && threshold <= 1.0 / 6.0,
                   "binomialBound: LowerDelta needs Delta in [0, 1/6]");
      const int kMax = detail::robustFloor(threshold * p * n);
      double acc = 0.0;
      for (int k = 0; k <= std::min(kMax, n); ++k)
        acc += std::exp(detail::logBinomialPmf(n, k, p));
      rep.exactTail = acc;
      rep.bound = std::exp(-0.5 * n * p);
      break;
    }
    case BinomialLemma::UpperDelta: {
      GFFPIN_CHECK(threshold >= 3.0, "binomialBound: UpperDelta needs Delta >= 3");
      const int kMin = detail::robustCeil(threshold * p * n);
      double acc = 0.0;
      for (int k = std::max(kMin, 0); k <= n; ++k)
        acc += std::exp(detail::logBinomialPmf(n, k, p));
      rep.exactTail = acc;
      rep.bound = std::exp(-0.5 * n * p);
      break;
    }
    case BinomialLemma::EtaForm: {
      GFFPIN_CHECK(threshold > 0.0 && threshold <= 1.0,
                   "binomialBound: EtaForm needs eta in (0,1]");
      GFFPIN_CHECK(p <= std::pow(0.5, 2.0 / threshold),
                   "binomialBound: EtaForm requires p <= (1/2)^{2/eta}");
      const int kMin = detail::robustCeil(threshold * n);
      double acc = 0.0;
      for (int k = std::max(kMin, 0); k <= n; ++k)
        acc += std::exp(detail::logBinomialPmf(n, k, p));
      rep.exactTail = acc;
      rep.bound = std::pow(p, 0.5 * threshold * n);
      break;
    }
  }
  rep.holds = rep.exactTail <= rep.bound * (1.0 + 1e-12);
  return rep;
}

}  // namespace gffpin
