#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "gffpin/frd.hpp"
#include "gffpin/rng.hpp"
#include "gffpin/stats.hpp"

using namespace gffpin;
using Catch::Matchers::WithinAbs;

TEST_CASE("decomposition geometry") {
  const FRDecomposition F = buildFRD(3, 2, 3);
  CHECK(F.M == 6);
  CHECK(F.pad == 18);
  CHECK(F.paddedRegion.lo == makeSite({0, 0, 0}));
  CHECK(F.paddedRegion.hi == makeSite({40, 40, 40}));
  CHECK(F.window.lo == makeSite({19, 19, 19}));
  CHECK(F.window.hi == makeSite({21, 21, 21}));
  CHECK(frdShifts(F).size() == 27);

  const FRDecomposition tight = buildFRD(3, 2, 3, 6);
  CHECK(tight.paddedRegion.hi == makeSite({16, 16, 16}));
  CHECK(tight.window.lo == makeSite({7, 7, 7}));
  CHECK(tight.window.hi == makeSite({9, 9, 9}));

  CHECK_THROWS_AS(buildFRD(3, 0, 3), Error);
  CHECK_THROWS_AS(buildFRD(3, 2, 3, 5), Error);  // pad below one cell
}

TEST_CASE("shift grids and block labels") {
  const FRDecomposition F = buildFRD(3, 2, 1, 6);
  const Site y = makeSite({1, 2, 0});
  CHECK(onShiftGrid(F, y, makeSite({7, 5, 3})));    // axis 0: 7-1 = 6
  CHECK(onShiftGrid(F, y, makeSite({3, 2, 5})));    // axis 1: 2-2 = 0
  CHECK(!onShiftGrid(F, y, makeSite({3, 5, 4})));
  CHECK(blockIndexOf(F, y, makeSite({8, 3, 5})) == makeSite({1, 0, 0}));
  CHECK(blockIndexOf(F, y, makeSite({0, 0, 0})) == makeSite({-1, -1, 0}));

  BoxRegion cell;
  REQUIRE(clippedCell(F, y, makeSite({0, 0, 0}), cell));
  CHECK(cell.lo == makeSite({2, 3, 1}));
  CHECK(cell.hi == makeSite({6, 7, 5}));
  // A block fully outside the interior clips to nothing.
  CHECK(!clippedCell(F, y, makeSite({4, 0, 0}), cell));
}

TEST_CASE("cells of one shift partition the off-grid interior") {
  const FRDecomposition F = buildFRD(3, 2, 3, 6);
  const BoxRegion inner = F.paddedRegion.interior();
  for (const Site& y : {makeSite({0, 0, 0}), makeSite({1, 2, 0}),
                        makeSite({2, 2, 2})}) {
    const auto cells = frdCells(F, y);
    std::int64_t cellSites = 0, gridSites = 0;
    for (const auto& [z, cell] : cells) cellSites += cell.volume();
    std::map<Site, int> cover;
    for (const auto& [z, cell] : cells)
      forEachSite(cell, [&](const Site& s) { ++cover[s]; });
    forEachSite(inner, [&](const Site& s) {
      if (onShiftGrid(F, y, s)) {
        ++gridSites;
        CHECK(cover.find(s) == cover.end());
      } else {
        CHECK(cover[s] == 1);
      }
    });
    CHECK(cellSites + gridSites == inner.volume());
  }
}

TEST_CASE("cell solver cache reuses factorizations by shape") {
  CellSolverCache cache(3);
  const BoxRegion a = BoxRegion::fromCorners(3, makeSite({1, 1, 1}),
                                             makeSite({5, 3, 4}));
  const BoxRegion b = BoxRegion::fromCorners(3, makeSite({7, 0, 2}),
                                             makeSite({11, 2, 5}));  // same shape
  const BoxRegion c = BoxRegion::fromCorners(3, makeSite({0, 0, 0}),
                                             makeSite({2, 2, 2}));
  CHECK(&cache.forShape(a) == &cache.forShape(b));
  CHECK(&cache.forShape(a) != &cache.forShape(c));
}

namespace {
double linearField(const Site& s) {
  return 1.5 * s[0] - 2.0 * s[1] + 0.25 * s[2] - 3.0;
}
}  // namespace

TEST_CASE("cell extension matches the generic harmonic extension") {
  CellSolverCache cache(3);
  const BoxRegion cell = BoxRegion::fromCorners(3, makeSite({2, 1, 4}),
                                                makeSite({5, 3, 6}));
  const std::vector<double> H =
      extendIntoCell(cache, cell, [](const Site& s) { return linearField(s); });
  const std::vector<Site> sites = boxSites(cell);
  REQUIRE(H.size() == sites.size());
  const SiteSet inCell(sites);
  const std::vector<double> ref = harmonicExtend(
      3, sites, [&](const Site& s, double& v) {
        if (inCell.contains(s)) return false;
        v = linearField(s);
        return true;
      });
  for (std::size_t i = 0; i < sites.size(); ++i) {
    CHECK_THAT(H[i], WithinAbs(linearField(sites[i]), 1e-10));
    CHECK_THAT(H[i], WithinAbs(ref[i], 1e-11));
  }
}

TEST_CASE("sample reconstruction and support overlap") {
  const FRDecomposition F = buildFRD(3, 2, 3, 6);
  FRDSampler sampler(F);
  const BoxRegion inner = F.paddedRegion.interior();
  Rng rng = streamFor(424242, 3, 1, 0);
  for (int rep = 0; rep < 2; ++rep) {
    const FRDSample s = sampler.sample(rng);
    // Every piece lives where its support says, and at most 2^d supports
    // cover any one site.
    REQUIRE(s.blocks.size() == s.supports.size());
    std::size_t i = 0;
    double maxDev = 0.0;
    forEachSite(inner, [&](const Site& x) {
      double acc = s.phi0[i];
      int covering = 0;
      for (std::size_t k = 0; k < s.supports.size(); ++k) {
        if (!s.supports[k].contains(x)) continue;
        ++covering;
        std::size_t si = 0;
        for (int ax = 0; ax < 3; ++ax)
          si = si * static_cast<std::size_t>(s.supports[k].sideSites(ax)) +
               static_cast<std::size_t>(x[ax] - s.supports[k].lo[ax]);
        acc += s.pieces[k][si];
      }
      CHECK(covering <= 8);
      maxDev = std::max(maxDev, std::fabs(acc - s.tilde[i]));
      ++i;
    });
    CHECK(maxDev < 1e-10);
  }
}

TEST_CASE("averaged field has exactly the region covariance") {
  const FRDecomposition F = buildFRD(3, 2, 1, 6);
  FRDSampler sampler(F);
  const Site probe = F.paddedRegion.center();
  const int ip = sampler.regionSolver().index().indexOf(probe);
  REQUIRE(ip >= 0);
  const double g = sampler.regionSolver().greenEntry(probe, probe);

  Rng rng = streamFor(77, 3, 2, 0);
  const int draws = 400;
  RunningStat stat;
  for (int t = 0; t < draws; ++t) {
    const FRDSample s = sampler.sample(rng);
    stat.add(s.tilde[static_cast<std::size_t>(ip)]);
  }
  // Var(tilde) = G_R exactly; the sample variance concentrates at G sqrt(2/n).
  const double se = g * std::sqrt(2.0 / draws);
  CHECK(std::fabs(stat.variance() - g) < 5.0 * se);
  CHECK(std::fabs(stat.mean()) < 5.0 * std::sqrt(g / draws));
}

TEST_CASE("window covariance identity on a compact instance") {
  const FRDecomposition F = buildFRD(3, 2, 2, 6);
  CHECK(frdCovarianceIdentityError(F) < 1e-8);
}

TEST_CASE("oversized exact-sampling regions are refused") {
  // Default padding of 3M around a 3-site window needs a 39^3 interior,
  // which is beyond the direct factorization budget.
  CHECK_THROWS_AS(FRDSampler(buildFRD(3, 2, 3)), Error);
}

TEST_CASE("smooth-part variance profile at three scales") {
  const struct {
    int L;
    double sup;
  } table[] = {{2, 0.197748}, {4, 0.149813}, {8, 0.101690}};
  double prevScaled = 1e9;
  for (const auto& row : table) {
    const Phi0Profile prof = phi0VarianceProfile(3, row.L);
    CHECK(prof.M == row.L * row.L + row.L);
    const std::size_t period = static_cast<std::size_t>(prof.M);
    REQUIRE(prof.variance.size() == period * period * period);
    CHECK_THAT(prof.sup, WithinAbs(row.sup, 1e-4));
    double mx = 0.0;
    for (double v : prof.variance) {
      CHECK(v >= 0.0);
      mx = std::max(mx, v);
    }
    CHECK_THAT(mx, WithinAbs(prof.sup, 0.0));
    const double scaled = prof.sup * row.L / std::log(row.L);
    CHECK(scaled < prevScaled);
    prevScaled = scaled;
  }
}

TEST_CASE("four-dimensional profile decays at least like 1/L") {
  const Phi0Profile p2 = phi0VarianceProfile(4, 2);
  const Phi0Profile p3 = phi0VarianceProfile(4, 3);
  CHECK(p3.sup < p2.sup);
  const double r = (p3.sup * 3.0) / (p2.sup * 2.0);
  CHECK(r > 0.5);
  CHECK(r < 2.0);
}
