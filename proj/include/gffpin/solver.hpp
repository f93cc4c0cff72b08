#pragma once
// Gaussian engine for the killed lattice free field on a finite site set.
// Precision operator Q = 2d*I - adjacency (within the set; absent neighbors
// are Dirichlet-killed). Covariance G = Q^{-1}. Dense direct work is avoided:
// a sparse Cholesky backend serves small/medium regions (and exact sampling),
// a matrix-free conjugate-gradient backend serves large regions.
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "gffpin/lattice.hpp"
#include "gffpin/normal.hpp"
#include "gffpin/rng.hpp"

namespace gffpin {

// Index map over an arbitrary finite site set, with a precomputed
// neighbor-index table (-1 marks neighbors outside the set).
class LatticeIndex {
 public:
  LatticeIndex() = default;
  LatticeIndex(int d, std::vector<Site> sites) : d_(d), sites_(std::move(sites)) {
    GFFPIN_CHECK(d >= 1 && d <= kMaxDim, "LatticeIndex: dimension must be 1..4");
    GFFPIN_CHECK(!sites_.empty(), "LatticeIndex: empty site set");
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
    nbr_.resize(sites_.size());
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      int slot = 0;
      for (int ax = 0; ax < d_; ++ax) {
        for (int dir : {-1, +1}) {
          nbr_[i][static_cast<std::size_t>(slot++)] =
              indexOf(neighborOf(sites_[i], ax, dir));
        }
      }
      for (; slot < 2 * kMaxDim; ++slot)
        nbr_[i][static_cast<std::size_t>(slot)] = -1;
    }
  }

  int d() const { return d_; }
  std::size_t size() const { return sites_.size(); }
  const std::vector<Site>& sites() const { return sites_; }
  const Site& site(std::size_t i) const { return sites_[i]; }

  int indexOf(const Site& s) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
    if (it == sites_.end() || *it != s) return -1;
    return static_cast<int>(it - sites_.begin());
  }

  // Neighbor slot k of site i (k in [0, 2d)), -1 if outside the set.
  int neighbor(std::size_t i, int k) const {
    return nbr_[i][static_cast<std::size_t>(k)];
  }

 private:
  int d_ = 0;
  std::vector<Site> sites_;
  std::vector<std::array<int, 2 * kMaxDim>> nbr_;
};

// Connected component (nearest-neighbor adjacency) of `start` within the
// sorted unique site list `region`. Returns the component's sites.
inline std::vector<Site> connectedComponent(int d, const std::vector<Site>& region,
                                            const Site& start) {
  LatticeIndex idx(d, region);
  const int s0 = idx.indexOf(start);
  GFFPIN_CHECK(s0 >= 0, "connectedComponent: start site not in region");
  std::vector<char> seen(idx.size(), 0);
  std::vector<int> stack{s0};
  seen[static_cast<std::size_t>(s0)] = 1;
  std::vector<Site> out;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    out.push_back(idx.site(static_cast<std::size_t>(i)));
    for (int k = 0; k < 2 * d; ++k) {
      const int nb = idx.neighbor(static_cast<std::size_t>(i), k);
      if (nb >= 0 && !seen[static_cast<std::size_t>(nb)]) {
        seen[static_cast<std::size_t>(nb)] = 1;
        stack.push_back(nb);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct SolverOptions {
  enum class Backend { Auto, Cholesky, ConjugateGradient };
  Backend backend = Backend::Auto;
  // Auto backend: direct factorization up to here, conjugate gradients above.
  // 3D fill-in grows fast (~150 s and ~1 GB at 1.5e5 sites); 4e4 keeps the
  // worst case near 5 s and 130 MB.
  std::size_t choleskyLimit = 40000;
  double cgTol = 1e-10;                // relative residual target
  int cgMaxIter = 100000;
  double residualCheckTol = 1e-9;      // hard posterior check on every solve
};

class CovarianceSolver {
 public:
  CovarianceSolver(int d, std::vector<Site> interiorSites,
                   SolverOptions opts = {})
      : idx_(d, std::move(interiorSites)), opts_(opts) {
    const std::size_t n = idx_.size();
    useCholesky_ = opts_.backend == SolverOptions::Backend::Cholesky ||
                   (opts_.backend == SolverOptions::Backend::Auto &&
                    n <= opts_.choleskyLimit);
    if (useCholesky_) {
      Eigen::SparseMatrix<double> Q(static_cast<Eigen::Index>(n),
                                    static_cast<Eigen::Index>(n));
      std::vector<Eigen::Triplet<double>> trips;
      trips.reserve(n * (2 * static_cast<std::size_t>(idx_.d()) + 1));
      const double diag = 2.0 * idx_.d();
      for (std::size_t i = 0; i < n; ++i) {
        trips.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
        for (int k = 0; k < 2 * idx_.d(); ++k) {
          const int nb = idx_.neighbor(i, k);
          if (nb >= 0)
            trips.emplace_back(static_cast<int>(i), nb, -1.0);
        }
      }
      Q.setFromTriplets(trips.begin(), trips.end());
      llt_ = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
      llt_->compute(Q);
      GFFPIN_CHECK(llt_->info() == Eigen::Success,
                   "CovarianceSolver: Cholesky factorization failed");
    }
  }

  const LatticeIndex& index() const { return idx_; }
  std::size_t size() const { return idx_.size(); }
  bool usesDirectBackend() const { return useCholesky_; }

  // y = Q x, matrix-free.
  void applyPrecision(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    const double diag = 2.0 * idx_.d();
    y.resize(x.size());
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      double acc = diag * x(static_cast<Eigen::Index>(i));
      for (int k = 0; k < 2 * idx_.d(); ++k) {
        const int nb = idx_.neighbor(i, k);
        if (nb >= 0) acc -= x(nb);
      }
      y(static_cast<Eigen::Index>(i)) = acc;
    }
  }

  // Solves Q x = b and verifies the residual.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    GFFPIN_CHECK(static_cast<std::size_t>(b.size()) == idx_.size(),
                 "CovarianceSolver::solve: size mismatch");
    Eigen::VectorXd x;
    if (useCholesky_) {
      x = llt_->solve(b);
    } else {
      x = solveCG(b);
    }
    Eigen::VectorXd r;
    applyPrecision(x, r);
    r -= b;
    const double scale = std::max(1.0, b.lpNorm<Eigen::Infinity>());
    GFFPIN_CHECK(r.lpNorm<Eigen::Infinity>() <= opts_.residualCheckTol * scale,
                 "CovarianceSolver::solve: residual "
                     << r.lpNorm<Eigen::Infinity>() << " exceeds tolerance "
                     << opts_.residualCheckTol * scale);
    return x;
  }

  // Covariance column G(., y).
  Eigen::VectorXd greenColumn(const Site& y) const {
    const int iy = idx_.indexOf(y);
    GFFPIN_CHECK(iy >= 0, "greenColumn: site not in the region");
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(idx_.size()));
    b(iy) = 1.0;
    return solve(b);
  }

  double greenEntry(const Site& x, const Site& y) const {
    const int ix = idx_.indexOf(x);
    GFFPIN_CHECK(ix >= 0, "greenEntry: site not in the region");
    return greenColumn(y)(ix);
  }

  // v^T G v for a stencil given as (site, coefficient) pairs.
  double quadForm(const std::vector<std::pair<Site, double>>& stencil) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(idx_.size()));
    for (const auto& [s, c] : stencil) {
      const int i = idx_.indexOf(s);
      GFFPIN_CHECK(i >= 0, "quadForm: stencil site not in the region");
      b(i) += c;
    }
    const Eigen::VectorXd x = solve(b);
    return b.dot(x);
  }

  // Exact sample of the killed field (zero outside the set). Requires the
  // direct backend: with P Q P^T = L L^T, phi = P^T L^{-T} z has covariance
  // Q^{-1} for z standard normal.
  Eigen::VectorXd sample(Rng& rng) const {
    GFFPIN_CHECK(useCholesky_,
                 "CovarianceSolver::sample: exact sampling requires the direct "
                 "factorization backend; region of " << idx_.size()
                 << " sites was configured for conjugate gradients");
    Eigen::VectorXd z(static_cast<Eigen::Index>(idx_.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = sampleStdNormal(rng);
    Eigen::VectorXd w = llt_->matrixU().solve(z);
    return llt_->permutationPinv() * w;
  }

 private:
  Eigen::VectorXd solveCG(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd r = b, p = b, Ap(b.size());
    double rs = r.squaredNorm();
    const double bnorm = std::sqrt(rs);
    if (bnorm == 0.0) return x;
    const double target = opts_.cgTol * bnorm;
    for (int it = 0; it < opts_.cgMaxIter; ++it) {
      applyPrecision(p, Ap);
      const double alpha = rs / p.dot(Ap);
      x += alpha * p;
      r -= alpha * Ap;
      const double rsNew = r.squaredNorm();
      if (std::sqrt(rsNew) <= target) return x;
      p = r + (rsNew / rs) * p;
      rs = rsNew;
    }
    GFFPIN_CHECK(false, "CovarianceSolver: conjugate gradients failed to reach "
                        << opts_.cgTol << " in " << opts_.cgMaxIter
                        << " iterations");
    return x;
  }

  LatticeIndex idx_;
  SolverOptions opts_;
  bool useCholesky_ = false;
  std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
};

// Conditional variance of the field at x given the field on everything
// outside `region` (Dirichlet data): the diagonal Green entry of the region.
inline double conditionalVariance(const CovarianceSolver& solver, const Site& x) {
  return solver.greenEntry(x, x);
}

// Harmonic extension: values on `extSites` of the function that is discrete
// harmonic there and equals the datum on all neighbors outside. datumAt must
// return true (with the value) for every neighbor of an extension site that
// is not itself an extension site; every connected component of the extension
// region must see at least one datum site.
inline std::vector<double> harmonicExtend(
    int d, const std::vector<Site>& extSites,
    const std::function<bool(const Site&, double&)>& datumAt,
    SolverOptions opts = {}) {
  CovarianceSolver solver(d, extSites, opts);
  const LatticeIndex& idx = solver.index();
  const std::size_t n = idx.size();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<char> hasDatumNeighbor(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int slot = 0;
    for (int ax = 0; ax < d; ++ax) {
      for (int dir : {-1, +1}) {
        if (idx.neighbor(i, slot++) >= 0) continue;
        const Site nb = neighborOf(idx.site(i), ax, dir);
        double v = 0.0;
        GFFPIN_CHECK(datumAt(nb, v),
                     "harmonicExtend: extension site has a neighbor with no "
                     "datum value");
        b(static_cast<Eigen::Index>(i)) += v;
        hasDatumNeighbor[i] = 1;
      }
    }
  }
  // Every component must be anchored to some datum.
  {
    std::vector<char> seen(n, 0);
    for (std::size_t root = 0; root < n; ++root) {
      if (seen[root]) continue;
      std::vector<int> stack{static_cast<int>(root)}, comp;
      seen[root] = 1;
      bool anchored = false;
      while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        comp.push_back(i);
        if (hasDatumNeighbor[static_cast<std::size_t>(i)]) anchored = true;
        for (int k = 0; k < 2 * d; ++k) {
          const int nb = idx.neighbor(static_cast<std::size_t>(i), k);
          if (nb >= 0 && !seen[static_cast<std::size_t>(nb)]) {
            seen[static_cast<std::size_t>(nb)] = 1;
            stack.push_back(nb);
          }
        }
      }
      GFFPIN_CHECK(anchored,
                   "harmonicExtend: extension region has a connected component "
                   "with no datum neighbor");
    }
  }
  // Q H = boundary flux: (2d) H(x) - sum_{ext nbrs} H = sum_{datum nbrs} v.
  const Eigen::VectorXd H = solver.solve(b);
  std::vector<double> out(n);
  // The solver may have reordered sites; map back through indexOf.
  for (std::size_t i = 0; i < extSites.size(); ++i) {
    const int j = idx.indexOf(extSites[i]);
    GFFPIN_CHECK(j >= 0, "harmonicExtend: internal index error");
    out[i] = H(j);
  }
  return out;
}

// Second mixed difference along unit directions e (axisE) and g (axisG):
// f(x+e+g) - f(x+e) - f(x+g) + f(x). Coincident axes give the 1D second
// difference f(x+2e) - 2 f(x+e) + f(x).
template <class ValueFn>
double biGradient(ValueFn&& value, const Site& x, int axisE, int axisG, int) {
  const Site xe = neighborOf(x, axisE, +1);
  const Site xg = neighborOf(x, axisG, +1);
  const Site xeg = neighborOf(xe, axisG, +1);
  return value(xeg) - value(xe) - value(xg) + value(x);
}

inline std::vector<std::pair<Site, double>> biGradientStencil(const Site& x,
                                                              int axisE,
                                                              int axisG) {
  const Site xe = neighborOf(x, axisE, +1);
  const Site xg = neighborOf(x, axisG, +1);
  const Site xeg = neighborOf(xe, axisG, +1);
  return {{xeg, +1.0}, {xe, -1.0}, {xg, -1.0}, {x, +1.0}};
}

// Variance of the second mixed difference of the killed field on the
// solver's region (quadratic form of the stencil in the region's Green).
inline double biGradientVariance(const CovarianceSolver& regionSolver,
                                 const Site& x, int axisE, int axisG) {
  return regionSolver.quadForm(biGradientStencil(x, axisE, axisG));
}

// Boundary weights of the box cell z*L + [0,L]^d: for x on the cell boundary,
// p(x) = sum over interior neighbors y of G_cell(center, y), the exit law of
// the walk from the center. Weights depend only on (d, L) and are cached.
struct CellBoundaryWeights {
  std::vector<Site> boundary;   // relative to the cell's low corner
  std::vector<double> weights;  // same order, sums to 1
};

inline const CellBoundaryWeights& cellBoundaryWeights(int d, int L) {
  GFFPIN_CHECK(L >= 2, "cellBoundaryWeights: cell edge must be >= 2");
  static std::map<std::pair<int, int>, CellBoundaryWeights> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lk(mtx);
  auto key = std::make_pair(d, L);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const BoxRegion cell = buildBox(d, L);
  const BoxRegion inner = cell.interior();
  CovarianceSolver solver(d, boxSites(inner));
  const Eigen::VectorXd g = solver.greenColumn(cell.center());
  CellBoundaryWeights w;
  for (const Site& s : boundarySites(cell)) {
    double p = 0.0;
    for (int ax = 0; ax < d; ++ax) {
      for (int dir : {-1, +1}) {
        const int j = solver.index().indexOf(neighborOf(s, ax, dir));
        if (j >= 0) p += g(j);
      }
    }
    w.boundary.push_back(s);
    w.weights.push_back(p);
  }
  return cache.emplace(key, std::move(w)).first->second;
}

// Harmonic average of `value` over the boundary of the cell z*L + [0,L]^d:
// the expected value of the field at the cell center given the boundary,
// evaluated by the exit law from the center.
template <class ValueFn>
double harmonicAverage(int d, int L, const Site& z, ValueFn&& value) {
  const CellBoundaryWeights& w = cellBoundaryWeights(d, L);
  Site corner;
  for (int i = 0; i < d; ++i) corner[i] = z[i] * L;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.boundary.size(); ++i)
    acc += w.weights[i] * value(siteAdd(corner, w.boundary[i], d));
  return acc;
}

}  // namespace gffpin
