#pragma once
// Multiscale box hierarchy. A box of edge N is recursively bisected: each
// level-j box contributes its boundary plus d bisecting hyperplanes to the
// conditioning grid, and 2^d children are centered inside the resulting
// chambers with a strictly positive margin. Edges follow
//   E_{next} = floor((E - 4*floor(E^{1-kappa})) / 2),
// stopping when the next edge would drop to 7*T(h) or below, where
// T(h) = (log(1/h)/h)^{2/d} is the pinning scale. Levels are numbered with
// 0 = finest; grid(j) isolates the level-j boxes.
#include <cmath>
#include <vector>

#include "gffpin/lattice.hpp"

namespace gffpin {

inline double pinningScaleT(int d, double h) {
  GFFPIN_CHECK(h > 0.0 && h < 1.0, "pinningScaleT: h must be in (0,1)");
  return std::pow(std::log(1.0 / h) / h, 2.0 / static_cast<double>(d));
}

inline int hierarchyEdgeStep(int edge, double varkappa) {
  const double shaved =
      edge - 4.0 * std::floor(std::pow(static_cast<double>(edge), 1.0 - varkappa));
  return static_cast<int>(std::floor(shaved / 2.0));
}

class Hierarchy {
 public:
  int d = 0;
  double h = 0.0;
  double varkappa = 0.5;
  double scaleT = 0.0;
  int J = 0;                    // number of split levels (0 = single box)
  std::vector<int> edges;      // edges[j] = N_j, j = 0..J, edges[J] = N
  BoxRegion domain;            // [0,N]^d
  // levelBoxes[j]: the 2^{d(J-j)} boxes at level j (levelBoxes[J] = {domain}).
  std::vector<std::vector<BoxRegion>> levelBoxes;
  // cells[j][k]: the chamber box isolating levelBoxes[j][k] (walls and
  // splitting plane excluded). Its intersection with the open domain is the
  // connected component of the level-j grid complement containing the box.
  std::vector<std::vector<BoxRegion>> cells;
  // Elementary boxes: 6^d disjoint blocks of elementaryEdge^d sites tiling the
  // low corner of each level-0 box.
  std::vector<BoxRegion> elementaryBoxes;
  int elementaryEdge = 0;      // sites per side

  // Bisecting hyperplane coordinate of `box` on `axis`.
  static std::int32_t planeCoord(const BoxRegion& box, int axis) {
    return box.lo[axis] + (box.hi[axis] - box.lo[axis]) / 2;
  }

  // True if `s` lies in the cumulative conditioning grid at level j: the
  // domain boundary plus, for every level i > j, each level-i box's boundary
  // and bisecting hyperplanes.
  bool gridContains(int j, const Site& s) const {
    GFFPIN_CHECK(j >= 0 && j <= J, "gridContains: level out of range");
    if (!domain.contains(s)) return true;  // exterior is always conditioned
    if (!domain.strictlyContains(s)) return true;  // domain boundary
    for (int i = j + 1; i <= J; ++i) {
      for (const BoxRegion& B : levelBoxes[static_cast<std::size_t>(i)]) {
        if (!B.contains(s)) continue;
        if (!B.strictlyContains(s)) return true;
        for (int ax = 0; ax < d; ++ax)
          if (s[ax] == planeCoord(B, ax)) return true;
      }
    }
    return false;
  }

  // All grid sites of level j inside the domain (boundary included).
  std::vector<Site> gridSites(int j) const {
    SiteSet acc(boundarySites(domain));
    for (int i = j + 1; i <= J; ++i) {
      for (const BoxRegion& B : levelBoxes[static_cast<std::size_t>(i)]) {
        acc.merge(SiteSet(boundarySites(B)));
        for (int ax = 0; ax < d; ++ax) {
          BoxRegion slab = B;
          slab.lo[ax] = slab.hi[ax] = planeCoord(B, ax);
          acc.merge(SiteSet(boxSites(slab)));
        }
      }
    }
    return acc.sites();
  }

  // Fraction of domain sites covered by the level-0 boxes.
  double coverageFraction() const {
    double covered = 0.0;
    for (const BoxRegion& B : levelBoxes[0])
      covered += static_cast<double>(B.volume());
    return covered / static_cast<double>(domain.volume());
  }

  // Index of the level-j box containing s, or -1.
  int boxIndexAt(int j, const Site& s) const {
    const auto& boxes = levelBoxes[static_cast<std::size_t>(j)];
    for (std::size_t k = 0; k < boxes.size(); ++k)
      if (boxes[k].contains(s)) return static_cast<int>(k);
    return -1;
  }

  // Isolation cell of the level-j box containing s; errors if s is in none.
  const BoxRegion& cellAt(int j, const Site& s) const {
    const int k = boxIndexAt(j, s);
    GFFPIN_CHECK(k >= 0, "cellAt: site lies in no level-" << j << " box");
    return cells[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
  }
};

inline Hierarchy buildHierarchy(int d, int N, double h, double varkappa = 0.5) {
  GFFPIN_CHECK(d >= 1 && d <= kMaxDim, "buildHierarchy: dimension must be 1..4");
  GFFPIN_CHECK(varkappa > 0.0 && varkappa < 1.0,
               "buildHierarchy: varkappa must be in (0,1)");
  Hierarchy H;
  H.d = d;
  H.h = h;
  H.varkappa = varkappa;
  H.scaleT = pinningScaleT(d, h);
  GFFPIN_CHECK(static_cast<double>(N) > 7.0 * H.scaleT,
               "buildHierarchy: hierarchy has no levels — edge " << N
               << " does not exceed 7*T(h) = " << 7.0 * H.scaleT);

  // Edge orbit, coarse to fine; stop before dropping to 7T or below.
  std::vector<int> orbit{N};
  for (;;) {
    const int next = hierarchyEdgeStep(orbit.back(), varkappa);
    if (static_cast<double>(next) <= 7.0 * H.scaleT) break;
    orbit.push_back(next);
  }
  H.J = static_cast<int>(orbit.size()) - 1;
  H.edges.assign(orbit.rbegin(), orbit.rend());  // edges[0] finest

  H.domain = buildBox(d, N);
  H.levelBoxes.assign(static_cast<std::size_t>(H.J) + 1, {});
  H.cells.assign(static_cast<std::size_t>(H.J) + 1, {});
  H.levelBoxes[static_cast<std::size_t>(H.J)] = {H.domain};
  H.cells[static_cast<std::size_t>(H.J)] = {H.domain.interior()};

  for (int j = H.J; j >= 1; --j) {
    const int childEdge = H.edges[static_cast<std::size_t>(j - 1)];
    const int childSites = childEdge + 1;
    for (const BoxRegion& B : H.levelBoxes[static_cast<std::size_t>(j)]) {
      // Per axis: the plane splits B into a low chamber [lo, m-1] and a high
      // chamber [m+1, hi]; children are floor-centered within chambers.
      for (int corner = 0; corner < (1 << d); ++corner) {
        BoxRegion child, cell;
        child.d = cell.d = d;
        for (int ax = 0; ax < d; ++ax) {
          const std::int32_t m = Hierarchy::planeCoord(B, ax);
          std::int32_t chLo, chHi;
          if (corner & (1 << ax)) {
            chLo = m + 1;
            chHi = B.hi[ax];
          } else {
            chLo = B.lo[ax];
            chHi = m - 1;
          }
          const std::int32_t chSites = chHi - chLo + 1;
          GFFPIN_CHECK(chSites >= childSites + 2,
                       "buildHierarchy: chamber too small for child with "
                       "positive margin (edge " << B.hi[ax] - B.lo[ax]
                       << " -> " << childEdge << ")");
          const std::int32_t start = chLo + (chSites - childSites) / 2;
          child.lo[ax] = start;
          child.hi[ax] = start + childEdge;
          cell.lo[ax] = chLo;  // chamber interior: walls are grid sites
          cell.hi[ax] = chHi;
        }
        H.levelBoxes[static_cast<std::size_t>(j - 1)].push_back(child);
        H.cells[static_cast<std::size_t>(j - 1)].push_back(cell);
      }
    }
  }

  // Elementary boxes tile the low corner of each level-0 box: 6 per axis,
  // elementaryEdge = floor(N_0/6) sites per side, pairwise disjoint.
  H.elementaryEdge = H.edges[0] / 6;
  GFFPIN_CHECK(H.elementaryEdge >= 1,
               "buildHierarchy: level-0 edge too small for elementary boxes");
  for (const BoxRegion& B : H.levelBoxes[0]) {
    BoxRegion idx = BoxRegion::cube(d, 0, 5);
    forEachSite(idx, [&](const Site& i) {
      BoxRegion eb;
      eb.d = d;
      for (int ax = 0; ax < d; ++ax) {
        eb.lo[ax] = B.lo[ax] + i[ax] * H.elementaryEdge;
        eb.hi[ax] = eb.lo[ax] + H.elementaryEdge - 1;
      }
      H.elementaryBoxes.push_back(eb);
    });
  }
  return H;
}

// Number of split levels buildHierarchy would produce, without building.
inline int hierarchyLevels(int d, int N, double h, double varkappa = 0.5) {
  const double T = pinningScaleT(d, h);
  GFFPIN_CHECK(static_cast<double>(N) > 7.0 * T,
               "hierarchyLevels: hierarchy has no levels");
  int J = 0;
  int edge = N;
  for (;;) {
    const int next = hierarchyEdgeStep(edge, varkappa);
    if (static_cast<double>(next) <= 7.0 * T) break;
    edge = next;
    ++J;
  }
  return J;
}

}  // namespace gffpin
