#pragma once
// Independent reference for the d = 3 infinite-lattice Green function,
// used only by tests. Route: Fourier transform in the two transverse axes,
// exact geometric summation along the first axis. For transverse momentum
// (k2, k3) with a2 = 4 sin^2(k2/2) + 4 sin^2(k3/2), the axis-1 resolvent of
// the discrete Laplacian has the closed form rho^{|x1|} / s with
//   s = sqrt(a2 (4 + a2)),  rho = (2 + a2 - s) / 2,
// which is evaluated in these subtraction-free variables to stay accurate
// as k -> 0. The remaining 2D integral over [0, pi]^2 has an integrable
// 1/|k| singularity at the origin; it is integrated over dyadic L-shaped
// annuli (two rectangles per level) with tensor Gauss-Legendre rules, never
// touching the origin. Levels shrink by 2 each time, so 48 levels leave a
// truncation of order 2^-48.
#include <cmath>

#include "gffpin/quadrature.hpp"

namespace gffpin::testsupport {

inline double fourierGreenIntegrand(double k2, double k3, int x1, int x2,
                                    int x3) {
  const double s2 = 2.0 * std::sin(0.5 * k2);
  const double s3 = 2.0 * std::sin(0.5 * k3);
  const double a2 = s2 * s2 + s3 * s3;
  const double s = std::sqrt(a2 * (4.0 + a2));
  const double rho = 0.5 * (2.0 + a2 - s);
  return std::pow(rho, std::abs(x1)) / s * std::cos(x2 * k2) *
         std::cos(x3 * k3);
}

// Tensor Gauss-Legendre over [ax, bx] x [ay, by].
inline double fourierGreenRect(double ax, double bx, double ay, double by,
                               int x1, int x2, int x3, int order) {
  const QuadRule& q = gaussLegendre(order);
  const double cx = 0.5 * (ax + bx), hx = 0.5 * (bx - ax);
  const double cy = 0.5 * (ay + by), hy = 0.5 * (by - ay);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double k2 = cx + hx * q.nodes[i];
    double inner = 0.0;
    for (std::size_t j = 0; j < q.nodes.size(); ++j) {
      const double k3 = cy + hy * q.nodes[j];
      inner += q.weights[j] * fourierGreenIntegrand(k2, k3, x1, x2, x3);
    }
    acc += q.weights[i] * inner;
  }
  return acc * hx * hy;
}

inline double fourierGreen3d(int x1, int x2, int x3, int levels = 48,
                             int order = 24) {
  double acc = 0.0;
  double b = M_PI;
  for (int l = 0; l < levels; ++l) {
    const double a = 0.5 * b;
    // L-shaped annulus [0,b]^2 \ [0,a]^2 as two rectangles.
    acc += fourierGreenRect(a, b, 0.0, b, x1, x2, x3, order);
    acc += fourierGreenRect(0.0, a, a, b, x1, x2, x3, order);
    b = a;
  }
  const double twoPi = 2.0 * M_PI;
  return 4.0 * acc / (twoPi * twoPi);
}

}  // namespace gffpin::testsupport
