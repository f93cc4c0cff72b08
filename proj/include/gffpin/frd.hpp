#pragma once
// Finite-range decomposition of the lattice free field. For a scale L >= 1
// put M = L^2 + L. For each shift y in [0,L]^d an independent copy of the
// field is conditioned on the shifted grid H^(y) = y + {x : some x_i in MZ}:
// the conditional expectation is the smooth part, the remainders are
// independent zero-boundary fields on the open cells. Averaging the copies
// over all (L+1)^d shifts with weight (L+1)^{-d/2} yields
//   phi~ = phi_0 + sum_z phi^(z),
// where phi^(z) has support in Mz + [1, M+L-1]^d (finite range, at most 2^d
// overlaps per site) and all summands are independent with
//   Cov(phi_0) + sum_z Cov(phi^(z)) = G  exactly.
// Everything is realized on a padded box R; the identity holds for the
// killed field on R at any padding, and the smooth-part variance profile is
// also available in its infinite-lattice closed form.
#include <map>
#include <memory>

#include "gffpin/boxgreen.hpp"
#include "gffpin/green.hpp"
#include "gffpin/solver.hpp"

namespace gffpin {

struct FRDecomposition {
  int d = 0;
  int L = 0;
  int M = 0;          // L^2 + L
  int pad = 0;        // sites between the window and the boundary of R
  BoxRegion paddedRegion;   // R (closed box, killed outside its interior)
  BoxRegion window;         // sites of interest, centered in R
};

inline FRDecomposition buildFRD(int d, int L, int windowEdgeSites, int pad = -1) {
  GFFPIN_CHECK(d >= 1 && d <= kMaxDim, "buildFRD: dimension must be 1..4");
  GFFPIN_CHECK(L >= 1, "buildFRD: scale L must be >= 1");
  GFFPIN_CHECK(windowEdgeSites >= 1, "buildFRD: window must have >= 1 site");
  FRDecomposition F;
  F.d = d;
  F.L = L;
  F.M = L * L + L;
  F.pad = (pad < 0) ? 3 * F.M : pad;
  GFFPIN_CHECK(F.pad >= F.M,
               "buildFRD: padding must be at least one cell (M = " << F.M << ")");
  const int edge = 2 * (F.pad + 1) + windowEdgeSites - 1;
  F.paddedRegion = buildBox(d, edge);
  F.window.d = d;
  for (int i = 0; i < d; ++i) {
    F.window.lo[i] = F.pad + 1;
    F.window.hi[i] = F.pad + windowEdgeSites;
  }
  return F;
}

// True if x lies on the shifted grid of y: some coordinate of x - y is = 0 mod M.
inline bool onShiftGrid(const FRDecomposition& F, const Site& y, const Site& x) {
  for (int i = 0; i < F.d; ++i) {
    int r = (x[i] - y[i]) % F.M;
    if (r < 0) r += F.M;
    if (r == 0) return true;
  }
  return false;
}

// Block index of the cell of shift y containing x (x must be off the grid).
inline Site blockIndexOf(const FRDecomposition& F, const Site& y, const Site& x) {
  Site z;
  for (int i = 0; i < F.d; ++i) {
    const int t = x[i] - y[i];
    z[i] = static_cast<std::int32_t>(
        std::floor(static_cast<double>(t) / static_cast<double>(F.M)));
  }
  return z;
}

// Open cell of shift y with block index z, clipped to the interior of R;
// returns false if the clip is empty.
inline bool clippedCell(const FRDecomposition& F, const Site& y, const Site& z,
                        BoxRegion& out) {
  const BoxRegion inner = F.paddedRegion.interior();
  out.d = F.d;
  for (int i = 0; i < F.d; ++i) {
    const std::int32_t lo = y[i] + F.M * z[i] + 1;
    const std::int32_t hi = y[i] + F.M * (z[i] + 1) - 1;
    out.lo[i] = std::max(lo, inner.lo[i]);
    out.hi[i] = std::min(hi, inner.hi[i]);
    if (out.lo[i] > out.hi[i]) return false;
  }
  return true;
}

// All shifts y in [0,L]^d.
inline std::vector<Site> frdShifts(const FRDecomposition& F) {
  return boxSites(BoxRegion::cube(F.d, 0, F.L));
}

// All (block, clipped cell) pairs of shift y meeting the interior of R.
inline std::vector<std::pair<Site, BoxRegion>> frdCells(const FRDecomposition& F,
                                                        const Site& y) {
  const BoxRegion inner = F.paddedRegion.interior();
  std::vector<std::pair<Site, BoxRegion>> out;
  BoxRegion zRange;
  zRange.d = F.d;
  for (int i = 0; i < F.d; ++i) {
    zRange.lo[i] = static_cast<std::int32_t>(std::floor(
        static_cast<double>(inner.lo[i] - y[i] - F.M + 1) / F.M));
    zRange.hi[i] = static_cast<std::int32_t>(std::floor(
        static_cast<double>(inner.hi[i] - y[i]) / F.M));
  }
  forEachSite(zRange, [&](const Site& z) {
    BoxRegion cell;
    if (clippedCell(F, y, z, cell)) out.emplace_back(z, cell);
  });
  return out;
}

// Shared solver cache keyed by cell shape (side lengths): cells repeat
// shapes massively, so each shape is factorized once. Sites are stored
// relative to the cell's low corner in raster order.
class CellSolverCache {
 public:
  explicit CellSolverCache(int d) : d_(d) {}

  const CovarianceSolver& forShape(const BoxRegion& cell) {
    std::array<std::int32_t, kMaxDim> key{1, 1, 1, 1};
    for (int i = 0; i < d_; ++i)
      key[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(cell.sideSites(i));
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      BoxRegion rel;
      rel.d = d_;
      for (int i = 0; i < d_; ++i) {
        rel.lo[i] = 0;
        rel.hi[i] = key[static_cast<std::size_t>(i)] - 1;
      }
      it = cache_
               .emplace(key, std::make_unique<CovarianceSolver>(d_, boxSites(rel)))
               .first;
    }
    return *it->second;
  }

 private:
  int d_;
  std::map<std::array<std::int32_t, kMaxDim>, std::unique_ptr<CovarianceSolver>>
      cache_;
};

// Harmonic extension into one clipped cell: all cell sites are unknowns, the
// datum lives on the neighbors outside (grid sites of y, or 0 outside R).
// datumAt(site) must be valid for any site outside the cell. Returned values
// are in the cell's raster order.
template <class DatumFn>
std::vector<double> extendIntoCell(CellSolverCache& cache, const BoxRegion& cell,
                                   DatumFn&& datumAt) {
  const CovarianceSolver& S = cache.forShape(cell);
  const int d = cell.d;
  const std::size_t n = S.size();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Site rel = S.index().site(i);
    const Site abs = siteAdd(rel, cell.lo, d);
    for (int ax = 0; ax < d; ++ax) {
      for (int dir : {-1, +1}) {
        const Site nbRel = neighborOf(rel, ax, dir);
        if (cell.contains(siteAdd(nbRel, cell.lo, d)) &&
            S.index().indexOf(nbRel) >= 0)
          continue;
        b(static_cast<Eigen::Index>(i)) += datumAt(neighborOf(abs, ax, dir));
      }
    }
  }
  const Eigen::VectorXd H = S.solve(b);
  return std::vector<double>(H.data(), H.data() + H.size());
}

// Smooth-part variance profile on the infinite lattice: Var(phi_0(x)) is
// M-periodic and equals sigma_d^2 - (L+1)^{-d} sum_y G_cell((x-y) rel) with
// the Green term dropped when x sits on the grid of y. Computed for one
// period [0,M)^d by separable circular correlation with the all-ones shift
// kernel of length L+1.
struct Phi0Profile {
  int M = 0;
  std::vector<double> variance;  // raster over [0, M-1]^d
  double sup = 0.0;
};

inline Phi0Profile phi0VarianceProfile(int d, int L) {
  GFFPIN_CHECK(d >= 3 && d <= kMaxDim,
               "phi0VarianceProfile: needs the infinite-volume variance (d >= 3)");
  GFFPIN_CHECK(L >= 1, "phi0VarianceProfile: L must be >= 1");
  const int M = L * L + L;
  const double sigma2 = infiniteVolumeVariance(d);
  // Cell Green diagonal, extended by zero on the grid plane coordinate r = 0.
  const std::vector<double> diag = boxGreenDiagonal(d, M);  // coords 1..M-1
  const std::size_t uM = static_cast<std::size_t>(M);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= uM;
  std::vector<double> cur(total, 0.0);
  {
    // Embed: index r in [0,M)^d, value diag(r) when all r_i != 0.
    const int n = M - 1;
    std::vector<int> r(static_cast<std::size_t>(d), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
      bool offGrid = true;
      for (int i = 0; i < d; ++i)
        if (r[static_cast<std::size_t>(i)] == 0) offGrid = false;
      if (offGrid) {
        std::size_t dflat = 0;
        for (int i = 0; i < d; ++i)
          dflat = dflat * static_cast<std::size_t>(n) +
                  static_cast<std::size_t>(r[static_cast<std::size_t>(i)] - 1);
        cur[flat] = diag[dflat];
      }
      for (int i = d - 1; i >= 0; --i) {
        if (++r[static_cast<std::size_t>(i)] < M) break;
        r[static_cast<std::size_t>(i)] = 0;
      }
    }
  }
  // Circular correlation, one axis at a time: out(x) = sum_{y=0..L} in(x - y mod M).
  std::vector<double> next(total);
  std::size_t stride = total / uM;  // stride of axis 0 initially
  for (int ax = 0; ax < d; ++ax) {
    const std::size_t outer = total / (uM * stride);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const double* src = cur.data() + o * uM * stride + inner;
        double* dst = next.data() + o * uM * stride + inner;
        for (int x = 0; x < M; ++x) {
          double acc = 0.0;
          for (int y = 0; y <= L; ++y) {
            int idx = x - y;
            if (idx < 0) idx += M;
            acc += src[static_cast<std::size_t>(idx) * stride];
          }
          dst[static_cast<std::size_t>(x) * stride] = acc;
        }
      }
    }
    cur.swap(next);
    stride /= uM;
  }
  double copies = 1.0;
  for (int i = 0; i < d; ++i) copies *= (L + 1.0);
  Phi0Profile prof;
  prof.M = M;
  prof.variance.resize(total);
  prof.sup = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    prof.variance[i] = sigma2 - cur[i] / copies;
    prof.sup = std::max(prof.sup, prof.variance[i]);
  }
  return prof;
}

// One joint draw of the decomposition on R: the underlying per-shift fields,
// the smooth part, and the finite-range parts (stored on their clipped
// support boxes). All fields live on the interior of R and vanish outside.
struct FRDSample {
  std::vector<double> phi0;    // raster over the interior of R
  std::vector<double> tilde;   // (L+1)^{-d/2} sum_y phi^(y), same layout
  std::vector<Site> blocks;    // block labels z
  std::vector<BoxRegion> supports;          // clipped cell union per block
  std::vector<std::vector<double>> pieces;  // phi^(z), raster over supports[k]
};

class FRDSampler {
 public:
  explicit FRDSampler(const FRDecomposition& F)
      : F_(F),
        interior_(F.paddedRegion.interior()),
        solverR_(F.d, boxSites(F.paddedRegion.interior())),
        cells_(F.d) {
    GFFPIN_CHECK(solverR_.usesDirectBackend(),
                 "FRDSampler: padded region too large for exact sampling — "
                 "reduce the window or padding");
  }

  const FRDecomposition& geometry() const { return F_; }
  const CovarianceSolver& regionSolver() const { return solverR_; }

  FRDSample sample(Rng& rng) {
    const int d = F_.d;
    const std::size_t n = solverR_.size();
    FRDSample out;
    out.phi0.assign(n, 0.0);
    out.tilde.assign(n, 0.0);
    std::map<Site, std::size_t> blockSlot;

    const std::vector<Site> shifts = frdShifts(F_);
    double norm = 1.0;
    for (int i = 0; i < d; ++i) norm *= (F_.L + 1.0);
    const double scale = 1.0 / std::sqrt(norm);

    for (const Site& y : shifts) {
      const Eigen::VectorXd phi = solverR_.sample(rng);
      for (std::size_t i = 0; i < n; ++i) out.tilde[i] += scale * phi(static_cast<Eigen::Index>(i));
      auto phiAt = [&](const Site& s) {
        const int j = solverR_.index().indexOf(s);
        return j >= 0 ? phi(j) : 0.0;  // killed outside the interior of R
      };
      for (const auto& [z, cell] : frdCells(F_, y)) {
        const std::vector<double> H = extendIntoCell(cells_, cell, phiAt);
        // Accumulate the smooth part on the cell and the remainder on z.
        std::size_t slot;
        auto it = blockSlot.find(z);
        if (it == blockSlot.end()) {
          slot = out.blocks.size();
          blockSlot.emplace(z, slot);
          out.blocks.push_back(z);
          // Support: union over shifts = Mz + [1, M+L-1]^d, clipped.
          BoxRegion sup;
          sup.d = d;
          for (int i = 0; i < d; ++i) {
            sup.lo[i] = std::max(F_.M * z[i] + 1, interior_.lo[i]);
            sup.hi[i] = std::min(F_.M * z[i] + F_.M + F_.L - 1, interior_.hi[i]);
          }
          out.supports.push_back(sup);
          out.pieces.emplace_back(
              static_cast<std::size_t>(sup.volume()), 0.0);
        } else {
          slot = it->second;
        }
        const BoxRegion& sup = out.supports[slot];
        std::size_t ci = 0;
        forEachSite(cell, [&](const Site& s) {
          const double psi = phiAt(s) - H[ci];
          const int ri = solverR_.index().indexOf(s);
          out.phi0[static_cast<std::size_t>(ri)] += scale * H[ci];
          // Raster index within the support box.
          std::size_t si = 0;
          for (int i = 0; i < d; ++i)
            si = si * static_cast<std::size_t>(sup.sideSites(i)) +
                 static_cast<std::size_t>(s[i] - sup.lo[i]);
          out.pieces[slot][si] += scale * psi;
          ++ci;
        });
      }
      // Grid sites of y contribute phi itself to the smooth part.
      for (std::size_t i = 0; i < n; ++i) {
        const Site& s = solverR_.index().site(i);
        if (onShiftGrid(F_, y, s)) out.phi0[i] += scale * phi(static_cast<Eigen::Index>(i));
      }
    }
    return out;
  }

 private:
  FRDecomposition F_;
  BoxRegion interior_;
  CovarianceSolver solverR_;
  CellSolverCache cells_;
};

// Exact covariance identity on the window: for x, x' in the window,
//   (L+1)^{-d} sum_y [ CovH_y(x,x') + 1{same open cell} G_cell(x,x') ]
// must equal G_R(x,x'). CovH_y(x,x') is evaluated non-circularly as the
// harmonic extension of the column G_R(., x) restricted to the grid of y.
// Returns the maximum absolute deviation over all window pairs.
inline double frdCovarianceIdentityError(const FRDecomposition& F) {
  const int d = F.d;
  SolverOptions cg;
  cg.backend = SolverOptions::Backend::ConjugateGradient;
  cg.cgTol = 1e-12;
  cg.residualCheckTol = 1e-9;
  CovarianceSolver solverR(d, boxSites(F.paddedRegion.interior()), cg);
  CellSolverCache cells(d);

  const std::vector<Site> win = boxSites(F.window);
  std::vector<Eigen::VectorXd> cols;
  cols.reserve(win.size());
  for (const Site& x : win) cols.push_back(solverR.greenColumn(x));

  const std::vector<Site> shifts = frdShifts(F);
  double copies = 1.0;
  for (int i = 0; i < d; ++i) copies *= (F.L + 1.0);

  std::vector<std::vector<double>> lhs(win.size(),
                                       std::vector<double>(win.size(), 0.0));
  for (const Site& y : shifts) {
    for (std::size_t a = 0; a < win.size(); ++a) {
      const Eigen::VectorXd& colA = cols[a];
      auto datumA = [&](const Site& s) {
        const int j = solverR.index().indexOf(s);
        return j >= 0 ? colA(j) : 0.0;
      };
      // Extension of the column through the grid of y, per needed cell.
      for (std::size_t b = 0; b < win.size(); ++b) {
        const Site& xb = win[b];
        double covH;
        if (onShiftGrid(F, y, xb)) {
          covH = datumA(xb);  // extension equals the datum on the grid
        } else {
          BoxRegion cell;
          GFFPIN_CHECK(clippedCell(F, y, blockIndexOf(F, y, xb), cell),
                       "frdCovarianceIdentityError: empty cell");
          const std::vector<double> H = extendIntoCell(cells, cell, datumA);
          const int ci = cells.forShape(cell).index().indexOf(
              siteSub(xb, cell.lo, d));
          covH = H[static_cast<std::size_t>(ci)];
        }
        lhs[a][b] += covH / copies;
      }
    }
    // Remainder covariance: nonzero only for pairs in the same open cell.
    for (std::size_t a = 0; a < win.size(); ++a) {
      if (onShiftGrid(F, y, win[a])) continue;
      const Site za = blockIndexOf(F, y, win[a]);
      BoxRegion cell;
      GFFPIN_CHECK(clippedCell(F, y, za, cell),
                   "frdCovarianceIdentityError: empty cell");
      const CovarianceSolver& cs = cells.forShape(cell);
      const Eigen::VectorXd gcell =
          cs.greenColumn(siteSub(win[a], cell.lo, d));
      for (std::size_t b = 0; b < win.size(); ++b) {
        if (onShiftGrid(F, y, win[b])) continue;
        if (blockIndexOf(F, y, win[b]) != za) continue;
        if (!cell.contains(win[b])) continue;
        const int ci = cs.index().indexOf(siteSub(win[b], cell.lo, d));
        if (ci >= 0) lhs[a][b] += gcell(ci) / copies;
      }
    }
  }

  double maxDev = 0.0;
  for (std::size_t a = 0; a < win.size(); ++a) {
    for (std::size_t b = 0; b < win.size(); ++b) {
      const int jb = solverR.index().indexOf(win[b]);
      const double rhs = cols[a](jb);
      maxDev = std::max(maxDev, std::fabs(lhs[a][b] - rhs));
    }
  }
  return maxDev;
}

}  // namespace gffpin
