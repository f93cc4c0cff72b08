#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "gffpin/hierarchy.hpp"
#include "gffpin/lattice.hpp"

using namespace gffpin;

TEST_CASE("site iteration order equals sorted order") {
  const BoxRegion box =
      BoxRegion::fromCorners(3, makeSite({-2, 0, 1}), makeSite({1, 2, 3}));
  std::vector<Site> raster;
  forEachSite(box, [&](const Site& s) { raster.push_back(s); });
  REQUIRE(raster.size() == static_cast<std::size_t>(box.volume()));
  std::vector<Site> sorted = raster;
  std::sort(sorted.begin(), sorted.end());
  CHECK(raster == sorted);
}

TEST_CASE("box geometry basics") {
  const BoxRegion box = buildBox(3, 4);
  CHECK(box.volume() == 125);
  CHECK(boundarySites(box).size() == 125 - 27);
  CHECK(box.interior().volume() == 27);
  CHECK(box.center() == makeSite({2, 2, 2}));
  CHECK(box.contains(makeSite({0, 4, 2})));
  CHECK(!box.strictlyContains(makeSite({0, 4, 2})));
  CHECK(box.strictlyContains(makeSite({1, 3, 2})));

  const Site a = makeSite({1, 2, 3});
  CHECK(l1Distance(a, makeSite({2, 2, 1}), 3) == 3);
  CHECK(neighborOf(a, 1, +1) == makeSite({1, 3, 3}));
  CHECK(neighborOf(a, 0, -1) == makeSite({0, 2, 3}));
}

TEST_CASE("site set lookups") {
  SiteSet set(boxSites(buildBox(2, 2)));
  CHECK(set.size() == 9);
  CHECK(set.contains(makeSite({1, 1})));
  CHECK(!set.contains(makeSite({3, 0})));
  set.merge(SiteSet({makeSite({3, 0}), makeSite({1, 1})}));
  CHECK(set.size() == 10);
}

namespace {
void checkOrbit(int N, double h, const std::vector<int>& edges) {
  const Hierarchy H = buildHierarchy(3, N, h);
  CHECK(H.edges == edges);
  CHECK(H.J == static_cast<int>(edges.size()) - 1);
  // Operating window of the finest edge and the per-level growth bounds.
  const double N0 = static_cast<double>(H.edges[0]);
  CHECK(N0 > 7.0 * H.scaleT);
  CHECK(N0 <= 15.0 * H.scaleT);
  const double Ck = 6.0 / (1.0 - std::pow(2.0, -H.varkappa));
  for (int j = 0; j <= H.J; ++j) {
    const double lower = std::ldexp(N0, j);
    const double upper = (1.0 + Ck * std::pow(N0, -H.varkappa)) * lower;
    const double Nj = static_cast<double>(H.edges[static_cast<std::size_t>(j)]);
    CHECK(Nj >= lower);
    CHECK(Nj <= upper);
  }
  // Elementary edge sits within a constant of the pinning scale.
  CHECK(static_cast<double>(H.elementaryEdge) >= H.scaleT);
  CHECK(static_cast<double>(H.elementaryEdge) <= 3.0 * H.scaleT);
}
}  // namespace

TEST_CASE("edge orbits across strengths and depths") {
  checkOrbit(86, 0.3, {25, 86});
  checkOrbit(70, 0.3, {19, 70});
  checkOrbit(300, 0.1, {116, 300});
  checkOrbit(704, 0.1, {116, 300, 704});
  checkOrbit(1600, 0.1, {120, 308, 720, 1600});
  checkOrbit(500, 0.05, {206, 500});
  checkOrbit(1100, 0.05, {198, 484, 1100});
  checkOrbit(2300, 0.05, {190, 464, 1056, 2300});
}

TEST_CASE("domains at or below the pinning scale are rejected") {
  CHECK_THROWS_AS(buildHierarchy(3, 17, 0.3), Error);
}

TEST_CASE("split geometry of the 86-domain") {
  const Hierarchy H = buildHierarchy(3, 86, 0.3);
  REQUIRE(H.J == 1);
  CHECK(Hierarchy::planeCoord(H.domain, 0) == 43);
  REQUIRE(H.levelBoxes[0].size() == 8);
  // Children are centered in their chambers: [8,33] low, [52,77] high.
  std::vector<BoxRegion> kids = H.levelBoxes[0];
  std::sort(kids.begin(), kids.end(),
            [](const BoxRegion& a, const BoxRegion& b) { return a.lo < b.lo; });
  CHECK(kids.front().lo == makeSite({8, 8, 8}));
  CHECK(kids.front().hi == makeSite({33, 33, 33}));
  CHECK(kids.back().lo == makeSite({52, 52, 52}));
  CHECK(kids.back().hi == makeSite({77, 77, 77}));
  std::vector<BoxRegion> cells = H.cells[0];
  std::sort(cells.begin(), cells.end(),
            [](const BoxRegion& a, const BoxRegion& b) { return a.lo < b.lo; });
  CHECK(cells.front().lo == makeSite({0, 0, 0}));
  CHECK(cells.front().hi == makeSite({42, 42, 42}));
  CHECK(cells.back().lo == makeSite({44, 44, 44}));
  CHECK(cells.back().hi == makeSite({86, 86, 86}));
  // Exact coverage: 8 boxes of 26^3 sites in an 87^3 domain.
  CHECK_THAT(H.coverageFraction(),
             Catch::Matchers::WithinAbs(8.0 * 26 * 26 * 26 / (87.0 * 87 * 87),
                                        1e-15));

  const Hierarchy H70 = buildHierarchy(3, 70, 0.3);
  std::vector<BoxRegion> kids70 = H70.levelBoxes[0];
  std::sort(kids70.begin(), kids70.end(),
            [](const BoxRegion& a, const BoxRegion& b) { return a.lo < b.lo; });
  CHECK(kids70.front().lo == makeSite({7, 7, 7}));
  CHECK(kids70.front().hi == makeSite({26, 26, 26}));
  CHECK(kids70.back().lo == makeSite({43, 43, 43}));
  CHECK(kids70.back().hi == makeSite({62, 62, 62}));
}

TEST_CASE("conditioning grid membership matches the materialized grid") {
  const Hierarchy H = buildHierarchy(3, 44, 0.5);
  REQUIRE(H.J == 1);
  REQUIRE(H.edges == std::vector<int>{10, 44});
  for (int j = 0; j <= H.J; ++j) {
    const std::vector<Site> grid = H.gridSites(j);
    const SiteSet set(grid);
    std::size_t brute = 0;
    forEachSite(H.domain, [&](const Site& s) {
      if (H.gridContains(j, s)) {
        ++brute;
        CHECK(set.contains(s));
      }
    });
    CHECK(brute == grid.size());
  }
  // Level J conditions on the boundary alone.
  CHECK(H.gridSites(H.J).size() == boundarySites(H.domain).size());
  // Level 0 additionally conditions on the domain's splitting planes.
  const std::size_t boundary = 45 * 45 * 45 - 43 * 43 * 43;
  const std::size_t planes = 3 * 43 * 43 - 3 * 43 + 1;  // inside the open box
  CHECK(H.gridSites(0).size() == boundary + planes);
}

TEST_CASE("elementary boxes tile the level-0 corners disjointly") {
  const Hierarchy H = buildHierarchy(3, 86, 0.3);
  REQUIRE(H.elementaryEdge == 4);  // floor(25 / 6)
  REQUIRE(H.elementaryBoxes.size() == 8 * 216);
  std::set<Site> seen;
  std::size_t duplicates = 0, strays = 0;
  for (const BoxRegion& eb : H.elementaryBoxes) {
    CHECK(eb.sideSites(0) == 4);
    bool inside = false;
    for (const BoxRegion& B : H.levelBoxes[0])
      if (B.contains(eb.lo) && B.contains(eb.hi)) inside = true;
    if (!inside) ++strays;
    forEachSite(eb, [&](const Site& s) {
      if (!seen.insert(s).second) ++duplicates;
    });
  }
  CHECK(strays == 0);
  CHECK(duplicates == 0);
  CHECK(seen.size() == 8 * 216 * 64);
}

TEST_CASE("single-level hierarchy keeps the whole domain") {
  const Hierarchy H = buildHierarchy(3, 20, 0.3);
  CHECK(H.J == 0);
  CHECK(H.edges == std::vector<int>{20});
  REQUIRE(H.levelBoxes[0].size() == 1);
  CHECK(H.levelBoxes[0][0].volume() == H.domain.volume());
  CHECK(H.elementaryEdge == 3);
  CHECK(H.elementaryBoxes.size() == 216);
}
