#pragma once
// Two-scale split and multiscale telescoping of a killed field over a box
// hierarchy. With grid(j) the cumulative conditioning set at level j
// (coarser for larger j, grid(J) = the domain boundary), the conditional
// expectations E[phi | grid(j)] telescope:
//   psi_j = E[phi | grid(j-1)] - E[phi | grid(j)],   j = 1..J,
//   phi = (phi - E[phi | grid(0)]) + sum_j psi_j + E[phi | grid(J)],
// and E[phi | grid(J)] = 0 for the killed field. Conditional expectations
// are realized per connected component of the grid complement as harmonic
// extensions; increments across distinct level-j boxes are independent.
#include <vector>

#include "gffpin/hierarchy.hpp"
#include "gffpin/solver.hpp"

namespace gffpin {

// Connected components of {interior sites not in grid(j)}; each component is
// returned as a sorted site list.
inline std::vector<std::vector<Site>> gridComplementComponents(
    const Hierarchy& H, int j, const LatticeIndex& interior) {
  const std::size_t n = interior.size();
  std::vector<char> inComp(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    inComp[i] = H.gridContains(j, interior.site(i)) ? 0 : 1;
  std::vector<char> seen(n, 0);
  std::vector<std::vector<Site>> comps;
  for (std::size_t root = 0; root < n; ++root) {
    if (!inComp[root] || seen[root]) continue;
    std::vector<int> stack{static_cast<int>(root)};
    seen[root] = 1;
    std::vector<Site> comp;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      comp.push_back(interior.site(static_cast<std::size_t>(i)));
      for (int k = 0; k < 2 * H.d; ++k) {
        const int nb = interior.neighbor(static_cast<std::size_t>(i), k);
        if (nb >= 0 && inComp[static_cast<std::size_t>(nb)] &&
            !seen[static_cast<std::size_t>(nb)]) {
          seen[static_cast<std::size_t>(nb)] = 1;
          stack.push_back(nb);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

// E[phi | grid(j)] over the interior: equals phi on grid sites, the harmonic
// extension on each component of the complement, with zero boundary data.
inline std::vector<double> conditionalExpectationOnGrid(
    const Hierarchy& H, int j, const LatticeIndex& interior,
    const std::vector<double>& phi, SolverOptions opts = {}) {
  GFFPIN_CHECK(phi.size() == interior.size(),
               "conditionalExpectationOnGrid: field size mismatch");
  std::vector<double> out(phi.size(), 0.0);
  for (std::size_t i = 0; i < interior.size(); ++i)
    if (H.gridContains(j, interior.site(i))) out[i] = phi[i];
  auto datumAt = [&](const Site& s, double& v) {
    const int i = interior.indexOf(s);
    if (i < 0) {
      v = 0.0;  // outside the domain interior: killed
      return true;
    }
    if (!H.gridContains(j, s)) return false;
    v = phi[static_cast<std::size_t>(i)];
    return true;
  };
  for (const std::vector<Site>& comp : gridComplementComponents(H, j, interior)) {
    const std::vector<double> ext = harmonicExtend(H.d, comp, datumAt, opts);
    for (std::size_t k = 0; k < comp.size(); ++k) {
      const int i = interior.indexOf(comp[k]);
      out[static_cast<std::size_t>(i)] = ext[k];
    }
  }
  return out;
}

struct TelescopingFields {
  // condExp[j] = E[phi | grid(j)], j = 0..J, over the interior index.
  std::vector<std::vector<double>> condExp;
  // increments[j-1] = psi_j = condExp[j-1] - condExp[j], j = 1..J.
  std::vector<std::vector<double>> increments;
  std::vector<double> smooth;     // condExp[0]
  std::vector<double> remainder;  // phi - condExp[0]
};

inline TelescopingFields buildTelescoping(const Hierarchy& H,
                                          const LatticeIndex& interior,
                                          const std::vector<double>& phi,
                                          SolverOptions opts = {}) {
  TelescopingFields T;
  T.condExp.resize(static_cast<std::size_t>(H.J) + 1);
  for (int j = 0; j <= H.J; ++j)
    T.condExp[static_cast<std::size_t>(j)] =
        conditionalExpectationOnGrid(H, j, interior, phi, opts);
  T.increments.resize(static_cast<std::size_t>(H.J));
  for (int j = 1; j <= H.J; ++j) {
    std::vector<double> inc(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
      inc[i] = T.condExp[static_cast<std::size_t>(j - 1)][i] -
               T.condExp[static_cast<std::size_t>(j)][i];
    T.increments[static_cast<std::size_t>(j - 1)] = std::move(inc);
  }
  T.smooth = T.condExp[0];
  T.remainder.resize(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i)
    T.remainder[i] = phi[i] - T.smooth[i];
  return T;
}

// Variance of the second mixed difference of psi_j at x:
//   Var = v^T G_{C_j(x)} v - v^T G_{C_{j-1}(x)} v,
// where C_j(x) is the component of the grid(j) complement containing x (the
// larger region, since grid(j) is coarser than grid(j-1)).
inline double telescopeIncrementVariance(const Hierarchy& H, int j,
                                         const Site& x, int axisE, int axisG,
                                         SolverOptions opts = {}) {
  GFFPIN_CHECK(j >= 1 && j <= H.J,
               "telescopeIncrementVariance: level must be in 1..J");
  auto componentQuadForm = [&](int level) {
    // Component of x within the grid(level) complement, grown by BFS over the
    // whole domain interior.
    std::vector<Site> domainInterior = boxSites(H.domain.interior());
    std::vector<Site> free;
    free.reserve(domainInterior.size());
    for (const Site& s : domainInterior)
      if (!H.gridContains(level, s)) free.push_back(s);
    const std::vector<Site> comp = connectedComponent(H.d, free, x);
    CovarianceSolver solver(H.d, comp, opts);
    return solver.quadForm(biGradientStencil(x, axisE, axisG));
  };
  return componentQuadForm(j) - componentQuadForm(j - 1);
}

}  // namespace gffpin
