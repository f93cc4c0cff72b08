#pragma once
// Infinite-volume Green function of the lattice Laplacian (d >= 3) by
// finite-box extrapolation. Finite boxes approach the infinite-volume value
// with a 1/N leading correction, so three boxes (N, 2N, 4N) determine the
// limit of the model g(N) = G + a/N + b/N^2 exactly; the discarded next
// order supplies the error estimate.
#include <cmath>
#include <map>
#include <mutex>

#include "gffpin/boxgreen.hpp"

namespace gffpin {

struct GreenEstimate {
  double value = 0.0;
  double errorEstimate = 0.0;
  int largestEdge = 0;
};

inline GreenEstimate infiniteVolumeGreen(int d, const Site& x,
                                         double targetAccuracy = 5e-4,
                                         int maxEdge = 256) {
  GFFPIN_CHECK(d >= 3 && d <= kMaxDim,
               "infiniteVolumeGreen: needs a transient dimension (3 or 4)");
  // Base edge: keep x at least a quarter-edge away from every face.
  int base = std::max(12, 4 * linfNorm(x, d));
  base = ((base + 3) / 4) * 4;
  const int n1 = base, n2 = 2 * base, n3 = 4 * base;
  GFFPIN_CHECK(n3 <= maxEdge,
               "infiniteVolumeGreen: separation |x| requires box edge " << n3
               << " which exceeds the configured maximum " << maxEdge);
  auto entryAt = [&](int N) {
    const Site c = buildBox(d, N).center();
    return boxGreenEntry(d, N, c, siteAdd(c, x, d));
  };
  const double g1 = entryAt(n1), g2 = entryAt(n2), g3 = entryAt(n3);
  // Solve g(N) = G + a/N + b/N^2 through the three points with N, 2N, 4N:
  // G = (8 g3 - 6 g2 + g1) / 3.
  const double rich12 = (8.0 * g3 - 6.0 * g2 + g1) / 3.0;
  // First-order-only extrapolation through the last two points.
  const double rich1 = 2.0 * g3 - g2;
  GreenEstimate est;
  est.value = rich12;
  est.errorEstimate = std::fabs(rich12 - rich1);
  est.largestEdge = n3;
  GFFPIN_CHECK(est.errorEstimate <= targetAccuracy,
               "infiniteVolumeGreen: target accuracy " << targetAccuracy
               << " unattainable with max edge " << maxEdge
               << "; achieved about " << est.errorEstimate);
  return est;
}

// G(0,0) = variance of the infinite-volume field, cached per dimension.
inline double infiniteVolumeVariance(int d) {
  static std::map<int, double> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lk(mtx);
  auto it = cache.find(d);
  if (it == cache.end())
    it = cache.emplace(d, infiniteVolumeGreen(d, Site{}, 1e-4).value).first;
  return it->second;
}

}  // namespace gffpin
