#pragma once
// Disorder laws for the pinning reward: mean zero, unit variance. The
// log-moment generating function backs all scalar analytics; sampling is
// inverse-CDF so every law costs exactly one uniform draw per variate.
#include <cmath>
#include <string>

#include "gffpin/normal.hpp"
#include "gffpin/quadrature.hpp"
#include "gffpin/rng.hpp"

namespace gffpin {

enum class DisorderLaw { Normal, Rademacher, Uniform };

inline std::string disorderLawName(DisorderLaw law) {
  switch (law) {
    case DisorderLaw::Normal: return "normal";
    case DisorderLaw::Rademacher: return "rademacher";
    case DisorderLaw::Uniform: return "uniform";
  }
  return "?";
}

inline DisorderLaw parseDisorderLaw(const std::string& name) {
  if (name == "normal") return DisorderLaw::Normal;
  if (name == "rademacher") return DisorderLaw::Rademacher;
  if (name == "uniform") return DisorderLaw::Uniform;
  GFFPIN_CHECK(false, "unknown disorder law '" << name
               << "' (expected normal, rademacher, or uniform)");
  return DisorderLaw::Normal;
}

inline constexpr double kUniformHalfWidth = 1.7320508075688772935;  // sqrt(3)

// log E[e^{s omega}].
inline double logMgf(DisorderLaw law, double s) {
  switch (law) {
    case DisorderLaw::Normal:
      return 0.5 * s * s;
    case DisorderLaw::Rademacher: {
      const double a = std::fabs(s);  // log cosh, overflow-safe
      return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
    }
    case DisorderLaw::Uniform: {
      const double z = kUniformHalfWidth * s;
      const double a = std::fabs(z);
      if (a < 1e-2) {  // log(sinh z / z) by series
        const double z2 = z * z;
        return z2 / 6.0 - z2 * z2 / 180.0;
      }
      return a - std::log(2.0 * a) + std::log1p(-std::exp(-2.0 * a));
    }
  }
  return 0.0;
}

// sup of |omega|; +infinity for the normal law.
inline double supportBound(DisorderLaw law) {
  switch (law) {
    case DisorderLaw::Normal: return std::numeric_limits<double>::infinity();
    case DisorderLaw::Rademacher: return 1.0;
    case DisorderLaw::Uniform: return kUniformHalfWidth;
  }
  return 0.0;
}

// E[|omega| ; |omega| > K].
inline double truncatedAbsMean(DisorderLaw law, double K) {
  GFFPIN_CHECK(K >= 0.0, "truncatedAbsMean: K must be >= 0");
  switch (law) {
    case DisorderLaw::Normal:
      return 2.0 * normalPdf(K);
    case DisorderLaw::Rademacher:
      return K < 1.0 ? 1.0 : 0.0;
    case DisorderLaw::Uniform:
      if (K >= kUniformHalfWidth) return 0.0;
      return (3.0 - K * K) / (2.0 * kUniformHalfWidth);
  }
  return 0.0;
}

inline double sampleDisorder(DisorderLaw law, Rng& rng) {
  switch (law) {
    case DisorderLaw::Normal:
      return sampleStdNormal(rng);
    case DisorderLaw::Rademacher:
      return rng.uniform01() < 0.5 ? -1.0 : 1.0;
    case DisorderLaw::Uniform:
      return kUniformHalfWidth * (2.0 * rng.uniform01() - 1.0);
  }
  return 0.0;
}

// E[f(omega)] to relative tolerance relTol, by the law's natural quadrature.
template <class F>
double expectDisorder(DisorderLaw law, F&& f, double relTol = 1e-12) {
  switch (law) {
    case DisorderLaw::Normal:
      return expectationNormal(f, relTol);
    case DisorderLaw::Rademacher:
      return 0.5 * (f(1.0) + f(-1.0));
    case DisorderLaw::Uniform: {
      double prev = 0.0;
      bool have = false;
      for (int order = 32; order <= 1024; order *= 2) {
        const double val = integrateLegendre(f, -kUniformHalfWidth,
                                             kUniformHalfWidth, order) /
                           (2.0 * kUniformHalfWidth);
        if (have) {
          const double scale = std::max({1.0, std::fabs(val), std::fabs(prev)});
          if (std::fabs(val - prev) <= relTol * scale) return val;
        }
        prev = val;
        have = true;
      }
      return prev;
    }
  }
  return 0.0;
}

// Clamp the disorder to [-K, K] sitewise.
inline double truncateDisorder(double omega, double K) {
  return std::max(-K, std::min(K, omega));
}

}  // namespace gffpin
