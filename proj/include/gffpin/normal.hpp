#pragma once
// Scalar normal distribution kernels: pdf/cdf/sf, a high-accuracy quantile
// (Wichura's PPND16 rational approximation, |err| ~ 1e-15), stable interval
// masses, and inverse-CDF sampling for plain and truncated normals.
// std::normal_distribution is never used anywhere in the library: its output
// is implementation-defined, which would break cross-platform reproducibility.
#include <cmath>
#include <limits>

#include "gffpin/common.hpp"
#include "gffpin/rng.hpp"

namespace gffpin {

inline double normalPdf(double x) {
  return 0.3989422804014326779 * std::exp(-0.5 * x * x);
}

inline double normalCdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Survival function 1 - cdf, accurate for large positive x.
inline double normalSf(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

// Inverse of normalCdf on (0,1).
inline double normalQuantile(double p) {
  GFFPIN_CHECK(p > 0.0 && p < 1.0,
               "normalQuantile: p must lie in (0,1), got " << p);
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                   6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
               1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return num / den;
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return (q < 0.0) ? -val : val;
}

// P(Z in [a,b]) for standard normal, stable on both tails: same-sign endpoints
// are handled as differences of survival functions.
inline double normalIntervalMass(double a, double b) {
  if (b <= a) return 0.0;
  if (a >= 0.0) return normalSf(a) - normalSf(b);
  if (b <= 0.0) return normalSf(-b) - normalSf(-a);
  return 0.5 * (std::erf(b * M_SQRT1_2) + std::erf(-a * M_SQRT1_2));
}

// P(mu + sigma*Z in [lo,hi]).
inline double normalIntervalMass(double mu, double sigma, double lo, double hi) {
  GFFPIN_CHECK(sigma > 0.0, "normalIntervalMass: sigma must be positive");
  return normalIntervalMass((lo - mu) / sigma, (hi - mu) / sigma);
}

// Inverse CDF of Z | Z in [alpha, beta] evaluated at v in (0,1). Works in the
// tail that keeps probabilities away from 1 so no catastrophic cancellation.
inline double truncatedNormalInverse(double alpha, double beta, double v) {
  GFFPIN_CHECK(alpha < beta, "truncatedNormalInverse: empty interval");
  constexpr double kTiny = 1e-300;
  if (alpha >= 0.0) {  // right tail: survival space
    const double sa = normalSf(alpha), sb = normalSf(beta);
    double s = sa - v * (sa - sb);
    if (s < kTiny) s = kTiny;
    return -normalQuantile(s);
  }
  if (beta <= 0.0) {  // mirror: z = Phi^{-1}(S(-z)), interpolate S(-z)
    const double sa = normalSf(-alpha), sb = normalSf(-beta);
    double s = sa + v * (sb - sa);
    if (s < kTiny) s = kTiny;
    return normalQuantile(s);
  }
  // Straddling zero: evaluate in cdf space from whichever side stays <= 1/2.
  const double ca = normalCdf(alpha), sb = normalSf(beta);
  const double width = 1.0 - ca - sb;
  double c = ca + v * width;
  double s = sb + (1.0 - v) * width;
  if (c <= s) {
    if (c < kTiny) c = kTiny;
    return normalQuantile(c);
  }
  if (s < kTiny) s = kTiny;
  return -normalQuantile(s);
}

// Inverse CDF of Z | Z outside (alpha, beta): the two tails glued in order.
inline double complementNormalInverse(double alpha, double beta, double v) {
  GFFPIN_CHECK(alpha < beta, "complementNormalInverse: empty interval");
  const double loMass = normalCdf(alpha), hiMass = normalSf(beta);
  const double total = loMass + hiMass;
  GFFPIN_CHECK(total > 0.0, "complementNormalInverse: complement has no mass");
  const double cut = loMass / total;
  if (v < cut) {
    double c = v * total;
    if (c < 1e-300) c = 1e-300;
    return normalQuantile(c);  // left tail, below alpha
  }
  double s = (1.0 - v) * total;
  if (s < 1e-300) s = 1e-300;
  return -normalQuantile(s);  // right tail, above beta
}

inline double sampleStdNormal(Rng& rng) { return normalQuantile(rng.uniform01()); }

}  // namespace gffpin
