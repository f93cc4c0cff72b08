#pragma once
// Exact Green function of the killed field on a box, via the sine
// eigenbasis of the Dirichlet Laplacian. For a box [0,N]^d the interior has
// n = N-1 sites per axis; modes m in {1..n}^d have eigenvalue
// lambda(m) = sum_i (2 - 2 cos(pi m_i/(n+1))) and
// G(x,y) = (2/(n+1))^d sum_m prod_i sin(pi m_i x_i/(n+1)) sin(pi m_i y_i/(n+1)) / lambda(m).
// Single entries cost O(n^d); the full diagonal costs O(d n^{d+1}) via
// axis-by-axis contraction.
#include <cmath>
#include <vector>

#include "gffpin/lattice.hpp"

namespace gffpin {

namespace detail {
inline std::vector<double> sineTable(int n, int coord) {
  std::vector<double> t(static_cast<std::size_t>(n));
  const double step = M_PI * coord / (n + 1.0);
  for (int m = 1; m <= n; ++m)
    t[static_cast<std::size_t>(m - 1)] = std::sin(step * m);
  return t;
}

inline std::vector<double> eigenTable(int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int m = 1; m <= n; ++m)
    t[static_cast<std::size_t>(m - 1)] = 2.0 - 2.0 * std::cos(M_PI * m / (n + 1.0));
  return t;
}
}  // namespace detail

// G(x,y) on [0,N]^d; x and y must be interior sites (all coords in [1, N-1]).
inline double boxGreenEntry(int d, int N, const Site& x, const Site& y) {
  GFFPIN_CHECK(d >= 1 && d <= kMaxDim, "boxGreenEntry: dimension must be 1..4");
  GFFPIN_CHECK(N >= 2, "boxGreenEntry: box edge must be >= 2");
  const int n = N - 1;
  for (int i = 0; i < d; ++i) {
    GFFPIN_CHECK(x[i] >= 1 && x[i] <= n && y[i] >= 1 && y[i] <= n,
                 "boxGreenEntry: site not in the box interior");
  }
  std::vector<std::vector<double>> sx(static_cast<std::size_t>(d)),
      sy(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    sx[static_cast<std::size_t>(i)] = detail::sineTable(n, x[i]);
    sy[static_cast<std::size_t>(i)] = detail::sineTable(n, y[i]);
  }
  const std::vector<double> lam = detail::eigenTable(n);

  // Odometer over modes, with per-axis partial products and eigenvalue sums.
  std::vector<int> m(static_cast<std::size_t>(d), 0);  // zero-based mode index
  std::vector<double> prodPrefix(static_cast<std::size_t>(d) + 1, 1.0);
  std::vector<double> lamPrefix(static_cast<std::size_t>(d) + 1, 0.0);
  auto refresh = [&](int from) {
    for (int i = from; i < d; ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      prodPrefix[ii + 1] = prodPrefix[ii] * sx[ii][static_cast<std::size_t>(m[ii])] *
                           sy[ii][static_cast<std::size_t>(m[ii])];
      lamPrefix[ii + 1] = lamPrefix[ii] + lam[static_cast<std::size_t>(m[ii])];
    }
  };
  refresh(0);
  double acc = 0.0;
  for (;;) {
    acc += prodPrefix[static_cast<std::size_t>(d)] /
           lamPrefix[static_cast<std::size_t>(d)];
    int axis = d - 1;
    while (axis >= 0 && m[static_cast<std::size_t>(axis)] == n - 1) {
      m[static_cast<std::size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
    ++m[static_cast<std::size_t>(axis)];
    refresh(axis);
  }
  double norm = 1.0;
  for (int i = 0; i < d; ++i) norm *= 2.0 / (n + 1.0);
  return acc * norm;
}

// Full diagonal G(x,x) over the interior of [0,N]^d, raster order (last axis
// fastest), interior coordinates 1..N-1 per axis.
inline std::vector<double> boxGreenDiagonal(int d, int N) {
  GFFPIN_CHECK(d >= 1 && d <= kMaxDim, "boxGreenDiagonal: dimension must be 1..4");
  GFFPIN_CHECK(N >= 2, "boxGreenDiagonal: box edge must be >= 2");
  const int n = N - 1;
  const std::size_t un = static_cast<std::size_t>(n);
  const std::vector<double> lam = detail::eigenTable(n);
  // W[m][x] = (2/(n+1)) sin^2(pi (m+1) (x+1) / (n+1)).
  std::vector<double> W(un * un);
  for (int m = 0; m < n; ++m)
    for (int x = 0; x < n; ++x) {
      const double s = std::sin(M_PI * (m + 1.0) * (x + 1.0) / (n + 1.0));
      W[static_cast<std::size_t>(m) * un + static_cast<std::size_t>(x)] =
          2.0 * s * s / (n + 1.0);
    }

  // Start with the tensor A[m_1..m_d] = 1/lambda(m); contract one mode axis
  // at a time against W, turning mode axes into position axes.
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= un;
  std::vector<double> cur(total);
  {
    std::vector<int> m(static_cast<std::size_t>(d), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
      double l = 0.0;
      for (int i = 0; i < d; ++i) l += lam[static_cast<std::size_t>(m[static_cast<std::size_t>(i)])];
      cur[flat] = 1.0 / l;
      for (int i = d - 1; i >= 0; --i) {
        if (++m[static_cast<std::size_t>(i)] < n) break;
        m[static_cast<std::size_t>(i)] = 0;
      }
    }
  }
  // After k contractions the layout is [x_1..x_k, m_{k+1}..m_d]; each step
  // contracts the (k+1)-th axis (stride block = n^{d-k-1}) and moves the new
  // position axis to the front block, preserving raster order.
  std::vector<double> next(total);
  std::size_t outerBlock = 1;              // product over already-converted axes
  std::size_t innerBlock = total / un;     // stride of the axis being contracted
  for (int step = 0; step < d; ++step) {
    for (std::size_t o = 0; o < outerBlock; ++o) {
      const double* src = cur.data() + o * un * innerBlock;
      double* dst = next.data() + o * un * innerBlock;
      for (int x = 0; x < n; ++x) {
        double* row = dst + static_cast<std::size_t>(x) * innerBlock;
        for (std::size_t inner = 0; inner < innerBlock; ++inner) row[inner] = 0.0;
        for (int m = 0; m < n; ++m) {
          const double w = W[static_cast<std::size_t>(m) * un + static_cast<std::size_t>(x)];
          const double* srow = src + static_cast<std::size_t>(m) * innerBlock;
          for (std::size_t inner = 0; inner < innerBlock; ++inner)
            row[inner] += w * srow[inner];
        }
      }
    }
    cur.swap(next);
    outerBlock *= un;
    innerBlock /= un;
  }
  return cur;
}

}  // namespace gffpin
