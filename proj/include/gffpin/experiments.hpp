#pragma once
// Named experiments behind the CLI: strict JSON configs in, deterministic CSV
// outputs plus a run manifest out. Also: fast self-verification suites and
// aggregation of finished runs into summary tables.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gffpin/analytics.hpp"
#include "gffpin/freeenergy.hpp"
#include "gffpin/frd.hpp"
#include "gffpin/green.hpp"
#include "gffpin/hierarchy.hpp"
#include "gffpin/io.hpp"
#include "gffpin/mcmc.hpp"
#include "gffpin/partition.hpp"
#include "gffpin/stats.hpp"
#include "gffpin/telescoping.hpp"

namespace gffpin {

struct RunResult {
  std::filesystem::path dir;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
};

namespace detail {

inline ChainStart parseChainStart(const std::string& s) {
  if (s == "boundary") return ChainStart::AtBoundary;
  if (s == "window") return ChainStart::AtWindow;
  GFFPIN_CHECK(false, "config: start must be 'boundary' or 'window', got '"
               << s << "'");
  return ChainStart::AtBoundary;
}

inline WindowMode parseWindowMode(const std::string& s) {
  if (s == "tracking") return WindowMode::Tracking;
  if (s == "centered") return WindowMode::Centered;
  GFFPIN_CHECK(false, "config: mode must be 'tracking' or 'centered', got '"
               << s << "'");
  return WindowMode::Tracking;
}

inline void addOutput(RunResult& res, const std::filesystem::path& dir,
                      const std::string& name) {
  res.outputs.push_back(name);
  (void)dir;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// green-convergence: infinite-volume Green values at requested offsets.
inline void runGreenConvergence(const Json& p, const std::filesystem::path& dir,
                                std::uint64_t /*seed*/, RunResult& res) {
  checkKeys(p, {"dimension", "offsets", "target_accuracy", "max_edge"},
            "params (green-convergence)");
  const int d = optionalField<int>(p, "dimension", 3);
  const auto offsets =
      requireField<std::vector<std::vector<int>>>(p, "offsets", "params");
  const double acc = optionalField<double>(p, "target_accuracy", 5e-4);
  const int maxEdge = optionalField<int>(p, "max_edge", 256);

  std::vector<GreenEstimate> est(offsets.size());
  std::vector<Site> sites(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    GFFPIN_CHECK(static_cast<int>(offsets[i].size()) == d,
                 "config: offset " << i << " has " << offsets[i].size()
                 << " coordinates, dimension is " << d);
    Site s{};
    for (int ax = 0; ax < d; ++ax) s[ax] = offsets[i][static_cast<std::size_t>(ax)];
    sites[i] = s;
  }
  parallelFor(offsets.size(), [&](std::size_t i) {
    est[i] = infiniteVolumeGreen(d, sites[i], acc, maxEdge);
  });

  CsvWriter csv(dir / "green.csv");
  std::vector<std::string> header;
  for (int ax = 0; ax < d; ++ax) header.push_back("dx" + std::to_string(ax));
  header.insert(header.end(), {"value", "error_estimate", "largest_edge"});
  csv.writeRow(header);
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    std::vector<std::string> row;
    for (int ax = 0; ax < d; ++ax)
      row.push_back(std::to_string(sites[i][ax]));
    row.push_back(formatDouble(est[i].value));
    row.push_back(formatDouble(est[i].errorEstimate));
    row.push_back(std::to_string(est[i].largestEdge));
    csv.writeRow(row);
  }
  csv.close();
  detail::addOutput(res, dir, "green.csv");
}

// ---------------------------------------------------------------------------
// frd-verify: finite-range decomposition checks — exact covariance identity,
// per-draw reconstruction, and the variance profile of the smooth part.
inline void runFrdVerify(const Json& p, const std::filesystem::path& dir,
                         std::uint64_t seed, RunResult& res) {
  checkKeys(p,
            {"dimension", "block_scale", "window_edge", "pad",
             "reconstruction_pad", "draws", "profile_scales"},
            "params (frd-verify)");
  const int d = optionalField<int>(p, "dimension", 3);
  const int L = requireField<int>(p, "block_scale", "params");
  const int windowEdge = requireField<int>(p, "window_edge", "params");
  const int pad = optionalField<int>(p, "pad", -1);
  const int draws = optionalField<int>(p, "draws", 2);
  const std::vector<int> profileScales =
      optionalField<std::vector<int>>(p, "profile_scales", {L});

  const FRDecomposition F = buildFRD(d, L, windowEdge, pad);
  const double identityError = frdCovarianceIdentityError(F);

  // Reconstruction is algebraically exact for any padding, so it is checked
  // on a small instance that admits exact (Cholesky) sampling.
  const int reconPad = optionalField<int>(p, "reconstruction_pad", F.M);
  const FRDecomposition Fr = buildFRD(d, L, windowEdge, reconPad);
  FRDSampler sampler(Fr);
  Rng rng = streamFor(seed, stream_class::kGaussian, 0, 0);
  double reconError = 0.0;
  for (int t = 0; t < draws; ++t) {
    const FRDSample sm = sampler.sample(rng);
    std::vector<double> recon = sm.phi0;
    for (std::size_t k = 0; k < sm.blocks.size(); ++k) {
      std::size_t si = 0;
      forEachSite(sm.supports[k], [&](const Site& s) {
        const int i = sampler.regionSolver().index().indexOf(s);
        if (i >= 0) recon[static_cast<std::size_t>(i)] += sm.pieces[k][si];
        ++si;
      });
    }
    for (std::size_t i = 0; i < recon.size(); ++i)
      reconError = std::max(reconError, std::fabs(recon[i] - sm.tilde[i]));
  }

  CsvWriter csv(dir / "frd.csv");
  csv.writeRow({"block_scale", "range", "pad", "window_edge",
                "covariance_identity_error", "reconstruction_error",
                "reconstruction_pad", "draws"});
  csv.writeRow({std::to_string(F.L), std::to_string(F.M), std::to_string(F.pad),
                std::to_string(windowEdge), formatDouble(identityError),
                formatDouble(reconError), std::to_string(Fr.pad),
                std::to_string(draws)});
  csv.close();
  detail::addOutput(res, dir, "frd.csv");

  CsvWriter prof(dir / "profile.csv");
  prof.writeRow({"block_scale", "sup_variance", "sup_scaled"});
  for (int Ls : profileScales) {
    const Phi0Profile pr = phi0VarianceProfile(d, Ls);
    prof.writeRow({std::to_string(Ls), formatDouble(pr.sup),
                   formatDouble(pr.sup * Ls / std::log(Ls))});
  }
  prof.close();
  detail::addOutput(res, dir, "profile.csv");
}

// ---------------------------------------------------------------------------
// hierarchy-verify: edge orbit, nesting margins, and coverage for one domain.
inline void runHierarchyVerify(const Json& p, const std::filesystem::path& dir,
                               std::uint64_t /*seed*/, RunResult& res) {
  checkKeys(p, {"dimension", "edge", "h", "varkappa"},
            "params (hierarchy-verify)");
  const int d = optionalField<int>(p, "dimension", 3);
  const int N = requireField<int>(p, "edge", "params");
  const double h = requireField<double>(p, "h", "params");
  const double vk = optionalField<double>(p, "varkappa", 0.5);

  const Hierarchy H = buildHierarchy(d, N, h, vk);
  const double N0 = static_cast<double>(H.edges[0]);
  const double Ck = 6.0 / (1.0 - std::pow(2.0, -vk));
  const double upFactor = 1.0 + Ck * std::pow(N0, -vk);

  CsvWriter lv(dir / "levels.csv");
  lv.writeRow({"level", "edge", "boxes", "lower_bound", "upper_bound",
               "bounds_ok", "nested_ok"});
  for (int j = 0; j <= H.J; ++j) {
    const double lower = std::ldexp(N0, j);  // 2^j N0
    const double upper = upFactor * lower;
    const double Nj = static_cast<double>(H.edges[static_cast<std::size_t>(j)]);
    const bool boundsOk = (Nj >= lower) && (Nj <= upper);
    bool nestedOk = true;
    if (j < H.J) {
      const auto& boxes = H.levelBoxes[static_cast<std::size_t>(j)];
      const auto& cells = H.cells[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < boxes.size(); ++k)
        for (int ax = 0; ax < d; ++ax)
          if (boxes[k].lo[ax] <= cells[k].lo[ax] ||
              boxes[k].hi[ax] >= cells[k].hi[ax])
            nestedOk = false;
    }
    lv.writeRow({std::to_string(j), std::to_string(H.edges[static_cast<std::size_t>(j)]),
                 std::to_string(H.levelBoxes[static_cast<std::size_t>(j)].size()),
                 formatDouble(lower), formatDouble(upper),
                 boundsOk ? "1" : "0", nestedOk ? "1" : "0"});
  }
  lv.close();
  detail::addOutput(res, dir, "levels.csv");

  const double coverageLb = 1.0 - 2.0 * d * Ck * std::pow(N0, -vk);
  CsvWriter sm(dir / "summary.csv");
  sm.writeRow({"levels", "scale_T", "finest_edge", "elementary_edge",
               "elementary_boxes", "coverage", "coverage_lower_bound",
               "coverage_ok", "edge_window_ok"});
  // 7T < N0 <= 15T is the target operating window for the finest edge.
  const bool edgeWindowOk =
      N0 > 7.0 * H.scaleT && N0 <= 15.0 * H.scaleT;
  const double cov = H.coverageFraction();
  sm.writeRow({std::to_string(H.J), formatDouble(H.scaleT),
               std::to_string(H.edges[0]), std::to_string(H.elementaryEdge),
               std::to_string(H.elementaryBoxes.size()), formatDouble(cov),
               formatDouble(coverageLb), cov >= coverageLb ? "1" : "0",
               edgeWindowOk ? "1" : "0"});
  sm.close();
  detail::addOutput(res, dir, "summary.csv");
}

// ---------------------------------------------------------------------------
// telescope-variance: variance of the second mixed difference of one
// telescoping increment at growing distance from the splitting plane.
inline void runTelescopeVariance(const Json& p, const std::filesystem::path& dir,
                                 std::uint64_t /*seed*/, RunResult& res) {
  checkKeys(p, {"edge", "h", "level", "radii", "cg_tol"},
            "params (telescope-variance)");
  const int N = requireField<int>(p, "edge", "params");
  const double h = requireField<double>(p, "h", "params");
  const auto radii = requireField<std::vector<int>>(p, "radii", "params");
  const double cgTol = optionalField<double>(p, "cg_tol", 1e-12);

  const Hierarchy H = buildHierarchy(3, N, h);
  const int level = optionalField<int>(p, "level", H.J);
  GFFPIN_CHECK(level >= 1 && level <= H.J,
               "config: level must be in 1.." << H.J);
  SolverOptions opts;
  opts.cgTol = cgTol;

  // Probe the level box's bisecting plane on axis 0 from inside the low
  // chamber, with the second mixed difference across axes 1 and 2 placed
  // at lattice distance r from the plane.
  const BoxRegion& B = H.levelBoxes[static_cast<std::size_t>(level)][0];
  const std::int32_t plane = Hierarchy::planeCoord(B, 0);
  const std::int32_t mid1 = Hierarchy::planeCoord(B, 1) / 2 + B.lo[1] / 2;
  const std::int32_t mid2 = Hierarchy::planeCoord(B, 2) / 2 + B.lo[2] / 2;

  std::vector<double> vars(radii.size());
  std::vector<double> logR(radii.size()), logV(radii.size());
  parallelFor(radii.size(), [&](std::size_t i) {
    Site x = makeSite({plane - radii[i], mid1, mid2});
    vars[i] = telescopeIncrementVariance(H, level, x, 1, 2, opts);
  });
  CsvWriter csv(dir / "variance.csv");
  csv.writeRow({"radius", "variance"});
  for (std::size_t i = 0; i < radii.size(); ++i) {
    GFFPIN_CHECK(vars[i] > 0.0, "telescope-variance: nonpositive variance");
    logR[i] = std::log(static_cast<double>(radii[i]));
    logV[i] = std::log(vars[i]);
    csv.writeRow({std::to_string(radii[i]), formatDouble(vars[i])});
  }
  csv.close();
  detail::addOutput(res, dir, "variance.csv");

  const LineFit fit = fitLine(logR, logV);
  CsvWriter sm(dir / "summary.csv");
  sm.writeRow({"level", "plane", "loglog_slope"});
  sm.writeRow({std::to_string(level), std::to_string(plane),
               formatDouble(fit.slope)});
  sm.close();
  detail::addOutput(res, dir, "summary.csv");
}

// ---------------------------------------------------------------------------
// pstar-sweep: optimal contact density of the reference model vs strength.
inline void runPstarSweep(const Json& p, const std::filesystem::path& dir,
                          std::uint64_t /*seed*/, RunResult& res) {
  checkKeys(p, {"law", "beta", "strengths"}, "params (pstar-sweep)");
  const DisorderLaw law =
      parseDisorderLaw(requireField<std::string>(p, "law", "params"));
  const double beta = requireField<double>(p, "beta", "params");
  const auto grid = requireField<std::vector<double>>(p, "strengths", "params");
  GFFPIN_CHECK(!grid.empty(), "config: strengths must be nonempty");

  CsvWriter csv(dir / "pstar.csv");
  csv.writeRow({"h", "p_star", "value", "p_over_h", "gradient_residual",
                "mass_residual"});
  std::vector<double> hs, ratios;
  for (double h : grid) {
    const OptimalDensity od = optimalDensity(law, beta, h);
    const OptimalityResiduals r = optimalDensityResiduals(law, beta, h, od.p);
    csv.writeRow({formatDouble(h), formatDouble(od.p), formatDouble(od.value),
                  formatDouble(od.p / h), formatDouble(r.gradient),
                  formatDouble(r.massIdentity)});
    hs.push_back(h);
    ratios.push_back(od.p / h);
  }
  csv.close();
  detail::addOutput(res, dir, "pstar.csv");

  const double c = chi(law, beta);
  CsvWriter sm(dir / "summary.csv");
  sm.writeRow({"chi", "chi_variance_form", "two_chi", "extrapolated_p_over_h",
               "relative_gap"});
  double extrap = ratios.front();
  if (hs.size() >= 2) extrap = fitLine(hs, ratios).intercept;
  sm.writeRow({formatDouble(c), formatDouble(chiVarianceForm(law, beta)),
               formatDouble(2.0 * c), formatDouble(extrap),
               formatDouble(std::fabs(extrap - 2.0 * c) / (2.0 * c))});
  sm.close();
  detail::addOutput(res, dir, "summary.csv");
}

// ---------------------------------------------------------------------------
// uh-sweep: window center u_h, its asymptotic expansion, window-mass ratio,
// and the disorder cutoff across strengths.
inline void runUhSweep(const Json& p, const std::filesystem::path& dir,
                       std::uint64_t /*seed*/, RunResult& res) {
  checkKeys(p, {"law", "beta", "strengths", "sigma2"}, "params (uh-sweep)");
  const DisorderLaw law =
      parseDisorderLaw(requireField<std::string>(p, "law", "params"));
  const double beta = requireField<double>(p, "beta", "params");
  const auto grid = requireField<std::vector<double>>(p, "strengths", "params");
  double sigma2 = optionalField<double>(p, "sigma2", 0.0);
  if (sigma2 <= 0.0) sigma2 = infiniteVolumeVariance(3);
  const double a = 2.0 * chi(law, beta);

  CsvWriter csv(dir / "uh.csv");
  csv.writeRow({"h", "u", "u_expansion", "gap_scaled", "mass_ratio", "cutoff"});
  for (double h : grid) {
    const double u = shiftHeight(sigma2, law, beta, h);
    const double ux = shiftHeightExpansion(sigma2, a, h);
    const double gap = std::fabs(u - ux) * std::sqrt(std::log(1.0 / h));
    csv.writeRow({formatDouble(h), formatDouble(u), formatDouble(ux),
                  formatDouble(gap),
                  formatDouble(windowMassRatio(sigma2, law, beta, h)),
                  formatDouble(disorderCutoff(law, h))});
  }
  csv.close();
  detail::addOutput(res, dir, "uh.csv");
}

// ---------------------------------------------------------------------------
// Shared driver for rho-vs-h and free-energy.
inline FreeEnergyCurve runContactCurve(const Json& p, std::uint64_t seed,
                                       const std::string& ctx) {
  checkKeys(p,
            {"law", "beta", "edge", "strengths", "mode", "replicas", "sweeps",
             "batches", "start", "boundary_value", "sigma2"},
            ctx);
  FreeEnergyConfig cfg;
  cfg.base.d = 3;
  cfg.base.box = buildBox(3, requireField<int>(p, "edge", ctx));
  cfg.base.beta = requireField<double>(p, "beta", ctx);
  cfg.base.law = parseDisorderLaw(requireField<std::string>(p, "law", ctx));
  cfg.base.boundaryValue = optionalField<double>(p, "boundary_value", 0.0);
  cfg.grid = requireField<std::vector<double>>(p, "strengths", ctx);
  cfg.mode = detail::parseWindowMode(
      optionalField<std::string>(p, "mode", "tracking"));
  cfg.replicas = optionalField<int>(p, "replicas", 2);
  cfg.chain.sweeps = optionalField<int>(p, "sweeps", 4000);
  cfg.chain.batches = optionalField<int>(p, "batches", 30);
  cfg.chain.start = detail::parseChainStart(
      optionalField<std::string>(p, "start", "boundary"));
  cfg.masterSeed = seed;
  cfg.sigma2 = optionalField<double>(p, "sigma2", 0.0);
  return estimateFreeEnergy(cfg);
}

inline void runRhoVsH(const Json& p, const std::filesystem::path& dir,
                      std::uint64_t seed, RunResult& res) {
  const FreeEnergyCurve c = runContactCurve(p, seed, "params (rho-vs-h)");
  CsvWriter csv(dir / "contact.csv");
  csv.writeRow({"strength", "window_center", "contact_fraction", "se",
                "fraction_over_strength"});
  for (const FreeEnergyPoint& pt : c.points)
    csv.writeRow({formatDouble(pt.s), formatDouble(pt.u), formatDouble(pt.rho),
                  formatDouble(pt.se), formatDouble(pt.rho / pt.s)});
  csv.close();
  detail::addOutput(res, dir, "contact.csv");
  res.warnings.insert(res.warnings.end(), c.warnings.begin(), c.warnings.end());
}

inline void runFreeEnergy(const Json& p, const std::filesystem::path& dir,
                          std::uint64_t seed, RunResult& res) {
  const FreeEnergyCurve c = runContactCurve(p, seed, "params (free-energy)");
  CsvWriter csv(dir / "free_energy.csv");
  csv.writeRow({"strength", "window_center", "contact_fraction", "se",
                "free_energy", "free_energy_se", "free_energy_over_h2"});
  for (std::size_t k = 0; k < c.points.size(); ++k) {
    const FreeEnergyPoint& pt = c.points[k];
    csv.writeRow({formatDouble(pt.s), formatDouble(pt.u), formatDouble(pt.rho),
                  formatDouble(pt.se), formatDouble(c.F[k]),
                  formatDouble(c.Fse[k]),
                  formatDouble(c.F[k] / (pt.s * pt.s))});
  }
  csv.close();
  detail::addOutput(res, dir, "free_energy.csv");
  res.warnings.insert(res.warnings.end(), c.warnings.begin(), c.warnings.end());
}

// ---------------------------------------------------------------------------
// height-profile: pooled |phi| quantiles of the pinned field.
inline void runHeightProfile(const Json& p, const std::filesystem::path& dir,
                             std::uint64_t seed, RunResult& res) {
  checkKeys(p,
            {"law", "beta", "edge", "strength", "sweeps", "thin", "start",
             "track_window", "window_center", "replica"},
            "params (height-profile)");
  PinningModel m;
  m.d = 3;
  m.box = buildBox(3, requireField<int>(p, "edge", "params"));
  m.beta = requireField<double>(p, "beta", "params");
  m.law = parseDisorderLaw(requireField<std::string>(p, "law", "params"));
  m.h = requireField<double>(p, "strength", "params");
  const bool track = optionalField<bool>(p, "track_window", true);
  m.u = track ? shiftHeight(infiniteVolumeVariance(3), m.law, m.beta, m.h)
              : optionalField<double>(p, "window_center", 0.0);

  ChainOptions opts;
  opts.sweeps = optionalField<int>(p, "sweeps", 4000);
  opts.start = detail::parseChainStart(
      optionalField<std::string>(p, "start", "boundary"));
  const int thin = optionalField<int>(p, "thin", 10);
  const auto replica =
      static_cast<std::uint64_t>(optionalField<int>(p, "replica", 0));

  const std::vector<double> omega = drawDisorder(m, seed, replica, 0);
  Rng rng = streamFor(seed, stream_class::kChain, replica, 0);
  const HeightProfile prof = heightProfile(m, omega, opts, thin, rng);

  CsvWriter csv(dir / "profile.csv");
  csv.writeRow({"strength", "window_center", "median_abs", "q10", "q25", "q75",
                "q90", "mean_contact_fraction", "pooled_samples"});
  csv.writeRow({formatDouble(m.h), formatDouble(m.u),
                formatDouble(prof.medianAbs), formatDouble(prof.q10),
                formatDouble(prof.q25), formatDouble(prof.q75),
                formatDouble(prof.q90),
                formatDouble(prof.meanContactFraction),
                std::to_string(prof.pooledSamples)});
  csv.close();
  detail::addOutput(res, dir, "profile.csv");
}

// ---------------------------------------------------------------------------
// box-diagnostics: run a chain, then classify elementary boxes / level-0
// boxes / harmonic cells of the final configuration.
inline void runBoxDiagnostics(const Json& p, const std::filesystem::path& dir,
                              std::uint64_t seed, RunResult& res) {
  checkKeys(p,
            {"law", "beta", "edge", "strength", "varkappa", "eps",
             "cell_scale", "sweeps", "start", "replica", "export_field"},
            "params (box-diagnostics)");
  const int N = requireField<int>(p, "edge", "params");
  const double h = requireField<double>(p, "strength", "params");
  const double vk = optionalField<double>(p, "varkappa", 0.5);
  const Hierarchy H = buildHierarchy(3, N, h, vk);

  PinningModel m;
  m.d = 3;
  m.box = H.domain;
  m.beta = requireField<double>(p, "beta", "params");
  m.law = parseDisorderLaw(requireField<std::string>(p, "law", "params"));
  m.h = h;
  m.u = shiftHeight(infiniteVolumeVariance(3), m.law, m.beta, h);

  const int sweeps = optionalField<int>(p, "sweeps", 2000);
  const ChainStart start = detail::parseChainStart(
      optionalField<std::string>(p, "start", "boundary"));
  const auto replica =
      static_cast<std::uint64_t>(optionalField<int>(p, "replica", 0));
  const std::vector<double> omega = drawDisorder(m, seed, replica, 0);
  Rng rng = streamFor(seed, stream_class::kChain, replica, 0);
  PinningChain chain(m, omega);
  chain.reset(start);
  for (int t = 0; t < sweeps; ++t) chain.sweep(rng);
  std::vector<double> phi(chain.size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = chain.phiAt(i);

  const double eps = optionalField<double>(p, "eps", 0.5);
  const int L = optionalField<int>(p, "cell_scale", H.elementaryEdge);
  const double chiH = chi(m.law, m.beta) * h;
  const BoxDiagnostics diag =
      boxDiagnostics(H, chain.index(), phi, m.u, chiH, eps, L);

  CsvWriter sm(dir / "summary.csv");
  sm.writeRow({"edge", "levels", "window_center", "chi_h", "cell_scale",
               "good_density_fraction", "good_curvature_fraction",
               "tall_cell_fraction", "elementary_boxes", "level0_boxes",
               "cells_sampled"});
  sm.writeRow({std::to_string(N), std::to_string(H.J), formatDouble(m.u),
               formatDouble(chiH), std::to_string(L),
               formatDouble(diag.goodZetaFraction),
               formatDouble(diag.goodCurvatureFraction),
               formatDouble(diag.tallCellFraction),
               std::to_string(diag.zeta.size()),
               std::to_string(diag.smoothCurvatureSup.size()),
               std::to_string(diag.cellAverages.size())});
  sm.close();
  detail::addOutput(res, dir, "summary.csv");

  CsvWriter zs(dir / "density.csv");
  zs.writeRow({"box", "density", "density_over_chi_h"});
  for (std::size_t k = 0; k < diag.zeta.size(); ++k)
    zs.writeRow({std::to_string(k), formatDouble(diag.zeta[k]),
                 formatDouble(diag.zeta[k] / chiH)});
  zs.close();
  detail::addOutput(res, dir, "density.csv");

  CsvWriter cs(dir / "curvature.csv");
  cs.writeRow({"box", "curvature_sup"});
  for (std::size_t k = 0; k < diag.smoothCurvatureSup.size(); ++k)
    cs.writeRow({std::to_string(k), formatDouble(diag.smoothCurvatureSup[k])});
  cs.close();
  detail::addOutput(res, dir, "curvature.csv");

  CsvWriter ca(dir / "cells.csv");
  ca.writeRow({"cell", "harmonic_average"});
  for (std::size_t k = 0; k < diag.cellAverages.size(); ++k)
    ca.writeRow({std::to_string(k), formatDouble(diag.cellAverages[k])});
  ca.close();
  detail::addOutput(res, dir, "cells.csv");

  if (optionalField<bool>(p, "export_field", false)) {
    writeBinaryF64(dir / "field.f64", phi);
    detail::addOutput(res, dir, "field.f64");
  }
}

// ---------------------------------------------------------------------------
// bounds-suite: disorder cutoffs, truncation clamps on exact small systems,
// and binomial tail bounds.
inline void runBoundsSuite(const Json& p, const std::filesystem::path& dir,
                           std::uint64_t seed, RunResult& res) {
  checkKeys(p,
            {"law", "beta", "strengths", "clamp_draws", "clamp_strength"},
            "params (bounds-suite)");
  const DisorderLaw law = parseDisorderLaw(
      optionalField<std::string>(p, "law", "normal"));
  const double beta = optionalField<double>(p, "beta", 1.0);
  const std::vector<double> grid = optionalField<std::vector<double>>(
      p, "strengths", {0.1, 0.05, 0.02});
  const int clampDraws = optionalField<int>(p, "clamp_draws", 100);
  const double clampH = optionalField<double>(p, "clamp_strength", 0.05);

  CsvWriter cut(dir / "cutoffs.csv");
  cut.writeRow({"h", "cutoff", "tail_mean_at_cutoff", "target", "holds"});
  for (double h : grid) {
    const double K = disorderCutoff(law, h);
    const double tail = truncatedAbsMean(law, K);
    const double target = h * h * h;
    cut.writeRow({formatDouble(h), formatDouble(K), formatDouble(tail),
                  formatDouble(target), tail <= target * (1.0 + 1e-9) ? "1" : "0"});
  }
  cut.close();
  detail::addOutput(res, dir, "cutoffs.csv");

  // Clamping the disorder at K changes log Z by at most the clipped weight
  // mass on each side; the mean absolute change obeys the L_K envelope.
  const BoxRegion box =
      BoxRegion::fromCorners(3, makeSite({0, 0, 0}), makeSite({4, 2, 2}));
  const std::vector<Site> interior = boxSites(box.interior());
  const auto nSites = interior.size();
  const std::vector<double> cutoffs{disorderCutoff(law, clampH), 1.0};
  CsvWriter cl(dir / "clamp.csv");
  cl.writeRow({"cutoff", "draws", "squeeze_holds", "mean_abs_change",
               "mean_envelope"});
  for (std::size_t kk = 0; kk < cutoffs.size(); ++kk) {
    const double K = cutoffs[kk];
    bool holds = true;
    double meanAbs = 0.0;
    for (int r = 0; r < clampDraws; ++r) {
      Rng rng = streamFor(seed, stream_class::kDisorder, kk,
                          static_cast<std::uint64_t>(r));
      std::vector<double> omega(nSites), clamped(nSites);
      double low = 0.0, high = 0.0;
      for (std::size_t i = 0; i < nSites; ++i) {
        omega[i] = sampleDisorder(law, rng);
        clamped[i] = truncateDisorder(omega[i], K);
        if (omega[i] > K) high += beta * (omega[i] - K);
        if (omega[i] < -K) low += beta * (omega[i] + K);
      }
      const double z1 =
          exactPartitionOracle(3, box, omega, law, beta, clampH).logZ;
      const double z0 =
          exactPartitionOracle(3, box, clamped, law, beta, clampH).logZ;
      const double diff = z1 - z0;
      if (diff < low - 1e-9 || diff > high + 1e-9) holds = false;
      meanAbs += std::fabs(diff);
    }
    meanAbs /= clampDraws;
    const double envelope =
        beta * static_cast<double>(nSites) * truncatedAbsMean(law, K);
    cl.writeRow({formatDouble(K), std::to_string(clampDraws),
                 holds ? "1" : "0", formatDouble(meanAbs),
                 formatDouble(envelope)});
  }
  cl.close();
  detail::addOutput(res, dir, "clamp.csv");

  CsvWriter bn(dir / "binomial.csv");
  bn.writeRow({"lemma", "n", "p", "threshold", "exact_tail", "bound", "holds"});
  struct Case {
    const char* name;
    int n;
    double p;
    double threshold;
    BinomialLemma lemma;
  };
  const Case cases[] = {
      {"lower_delta", 20, 0.1, 1.0 / 6.0, BinomialLemma::LowerDelta},
      {"lower_delta", 200, 0.1, 1.0 / 6.0, BinomialLemma::LowerDelta},
      {"upper_delta", 20, 0.1, 3.0, BinomialLemma::UpperDelta},
      {"upper_delta", 200, 0.1, 3.0, BinomialLemma::UpperDelta},
      {"eta_form", 20, 0.1, 1.0, BinomialLemma::EtaForm},
      {"eta_form", 60, 0.05, 0.5, BinomialLemma::EtaForm},
  };
  for (const Case& c : cases) {
    const BinomialBoundReport rep = binomialBound(c.n, c.p, c.threshold, c.lemma);
    bn.writeRow({c.name, std::to_string(c.n), formatDouble(c.p),
                 formatDouble(c.threshold), formatDouble(rep.exactTail),
                 formatDouble(rep.bound), rep.holds ? "1" : "0"});
  }
  bn.close();
  detail::addOutput(res, dir, "binomial.csv");
}

// ---------------------------------------------------------------------------
// Dispatch.
using ExperimentFn = void (*)(const Json&, const std::filesystem::path&,
                              std::uint64_t, RunResult&);

inline const std::map<std::string, ExperimentFn>& experimentTable() {
  static const std::map<std::string, ExperimentFn> table = {
      {"green-convergence", &runGreenConvergence},
      {"frd-verify", &runFrdVerify},
      {"hierarchy-verify", &runHierarchyVerify},
      {"telescope-variance", &runTelescopeVariance},
      {"pstar-sweep", &runPstarSweep},
      {"uh-sweep", &runUhSweep},
      {"rho-vs-h", &runRhoVsH},
      {"free-energy", &runFreeEnergy},
      {"height-profile", &runHeightProfile},
      {"box-diagnostics", &runBoxDiagnostics},
      {"bounds-suite", &runBoundsSuite},
  };
  return table;
}

inline RunResult runExperimentConfig(const Json& cfg) {
  checkKeys(cfg, {"experiment", "output_dir", "seed", "params"}, "top level");
  const auto name = requireField<std::string>(cfg, "experiment", "top level");
  const auto outDir =
      requireField<std::string>(cfg, "output_dir", "top level");
  const auto seed =
      static_cast<std::uint64_t>(optionalField<std::int64_t>(cfg, "seed", 1));
  const Json params = cfg.contains("params") ? cfg.at("params") : Json::object();

  const auto& table = experimentTable();
  const auto it = table.find(name);
  if (it == table.end()) {
    std::string known;
    for (const auto& [k, fn] : table) {
      (void)fn;
      known += (known.empty() ? "" : ", ") + k;
    }
    GFFPIN_CHECK(false, "config: unknown experiment '" << name
                 << "' (known: " << known << ")");
  }

  RunResult res;
  res.dir = std::filesystem::path(outDir);
  std::filesystem::create_directories(res.dir);
  const auto t0 = std::chrono::steady_clock::now();
  it->second(params, res.dir, seed, res);
  const auto t1 = std::chrono::steady_clock::now();
  const double wall =
      std::chrono::duration<double>(t1 - t0).count();
  writeManifest(res.dir, cfg, std::round(wall * 1e3) / 1e3, res.warnings,
                res.outputs);
  res.outputs.push_back("manifest.json");
  return res;
}

inline RunResult runExperimentFile(const std::filesystem::path& configPath) {
  return runExperimentConfig(loadJsonFile(configPath));
}

// ---------------------------------------------------------------------------
// Verification suites: quick deterministic self-checks, one line per check.
struct VerifyReport {
  std::vector<std::string> lines;
  int failures = 0;

  void check(bool ok, const std::string& name, const std::string& detail) {
    std::ostringstream oss;
    oss << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) oss << " — " << detail;
    lines.push_back(oss.str());
    if (!ok) ++failures;
  }

  void closeTo(double measured, double expected, double tol,
               const std::string& name) {
    std::ostringstream oss;
    oss << "measured " << formatDouble(measured) << ", expected "
        << formatDouble(expected) << ", tol " << formatDouble(tol);
    check(std::fabs(measured - expected) <= tol, name, oss.str());
  }
};

// Reference lattice constants used by the verify suites. The field variance
// comes from the closed-form triple integral for the simple random walk; the
// neighbor value follows from the stationarity identity at the origin.
inline constexpr double kVariance3d = 0.25273100985866300;

inline void verifyGreen(VerifyReport& rep) {
  const GreenEstimate g0 = infiniteVolumeGreen(3, makeSite({0, 0, 0}), 1e-4);
  rep.closeTo(g0.value, kVariance3d, 1e-4, "green: variance at the origin");
  rep.check(g0.errorEstimate <= 1e-4, "green: self-reported error",
            "estimate " + formatDouble(g0.errorEstimate));
  const GreenEstimate g1 = infiniteVolumeGreen(3, makeSite({1, 0, 0}), 1e-4);
  rep.closeTo(g1.value, kVariance3d - 1.0 / 6.0, 2e-4,
              "green: nearest neighbor vs stationarity identity");
  const double inv4pi = 1.0 / (4.0 * M_PI);
  const GreenEstimate g8 = infiniteVolumeGreen(3, makeSite({8, 0, 0}), 1e-4);
  rep.check(std::fabs(8.0 * g8.value - inv4pi) < 0.15 * inv4pi,
            "green: far-field 1/(4 pi r) scale",
            "8*G = " + formatDouble(8.0 * g8.value) + ", 1/(4 pi) = " +
                formatDouble(inv4pi));
}

inline void verifyDecomposition(VerifyReport& rep) {
  const FRDecomposition F = buildFRD(3, 2, 2, 6);
  const double err = frdCovarianceIdentityError(F);
  rep.check(err < 1e-8, "decomposition: covariance identity",
            "max deviation " + formatDouble(err));
  const Phi0Profile pr = phi0VarianceProfile(3, 2);
  rep.closeTo(pr.sup, 0.197748, 1e-4, "decomposition: smooth-part variance sup");
}

inline void verifyHierarchy(VerifyReport& rep) {
  const Hierarchy h86 = buildHierarchy(3, 86, 0.3);
  rep.check(h86.J == 1 && h86.edges[0] == 25, "hierarchy: orbit 86 -> 25",
            "J = " + std::to_string(h86.J) + ", finest " +
                std::to_string(h86.edges[0]));
  const Hierarchy h300 = buildHierarchy(3, 300, 0.1);
  rep.check(h300.J == 1 && h300.edges[0] == 116, "hierarchy: orbit 300 -> 116",
            "J = " + std::to_string(h300.J) + ", finest " +
                std::to_string(h300.edges[0]));
  const Hierarchy h704 = buildHierarchy(3, 704, 0.1);
  rep.check(h704.J == 2 && h704.edges[0] == 116 && h704.edges[1] == 300,
            "hierarchy: orbit 704 -> 300 -> 116",
            "J = " + std::to_string(h704.J));
  bool nested = true;
  for (int j = 0; j < h704.J; ++j)
    for (std::size_t k = 0; k < h704.levelBoxes[static_cast<std::size_t>(j)].size(); ++k)
      for (int ax = 0; ax < 3; ++ax) {
        const auto& B = h704.levelBoxes[static_cast<std::size_t>(j)][k];
        const auto& C = h704.cells[static_cast<std::size_t>(j)][k];
        if (B.lo[ax] <= C.lo[ax] || B.hi[ax] >= C.hi[ax]) nested = false;
      }
  rep.check(nested, "hierarchy: boxes strictly inside isolation cells", "");
}

inline void verifyScalars(VerifyReport& rep) {
  rep.closeTo(chi(DisorderLaw::Normal, 1.0), 0.290988353434663, 1e-12,
              "scalars: chi(normal, 1)");
  rep.closeTo(chi(DisorderLaw::Rademacher, 0.5), 2.341347188415585, 1e-12,
              "scalars: chi(rademacher, 1/2)");
  rep.closeTo(chiVarianceForm(DisorderLaw::Normal, 1.0),
              chi(DisorderLaw::Normal, 1.0), 1e-12,
              "scalars: chi gap form vs variance form");
  rep.closeTo(optimalDensity(DisorderLaw::Normal, 1.0, 1e-3).p / 1e-3,
              0.583833570, 1e-6, "scalars: optimal density slope at h = 1e-3");
  rep.closeTo(shiftHeight(kVariance3d, DisorderLaw::Normal, 1.0, 0.01),
              2.268315505235, 1e-9, "scalars: window center at h = 0.01");
  rep.closeTo(disorderCutoff(DisorderLaw::Normal, 0.05), 4.186025673122, 1e-9,
              "scalars: disorder cutoff at h = 0.05");
  const BinomialBoundReport lo =
      binomialBound(20, 0.1, 1.0 / 6.0, BinomialLemma::LowerDelta);
  rep.closeTo(lo.exactTail, 1.215766545906e-01, 1e-12,
              "scalars: binomial lower tail");
  rep.check(lo.holds, "scalars: binomial lower bound holds", "");
}

inline void verifySampler(VerifyReport& rep) {
  // Exact one-site partition values.
  const BoxRegion b1 = BoxRegion::cube(3, 0, 2);
  rep.closeTo(std::exp(exactPartitionOracle(3, b1, {0.3}, DisorderLaw::Normal,
                                            1.0, 0.5)
                           .logZ),
              1.344853770005257, 1e-12, "sampler: one-site partition value");
  // Two-site window probability.
  Eigen::MatrixXd G2(2, 2);
  G2 << 6.0 / 35.0, 1.0 / 35.0, 1.0 / 35.0, 6.0 / 35.0;
  rep.closeTo(mvnBoxProbability(G2, {-1.0, -1.0}, {1.0, 1.0}),
              0.968950556084609, 1e-9, "sampler: two-site window mass");
  // Single-site chain against its exact stationary law.
  PinningModel m;
  m.d = 3;
  m.box = BoxRegion::cube(3, 0, 2);
  m.beta = 1.0;
  m.h = 0.3;
  const double omega = 0.5;
  PinningChain chain(m, {omega});
  Rng rng = streamFor(12345, stream_class::kChain, 0, 0);
  const int n = 200000;
  std::vector<double> sample(n);
  for (int t = 0; t < n; ++t) {
    chain.sweep(rng);
    sample[static_cast<std::size_t>(t)] = chain.phiAt(0);
  }
  const double sd = 1.0 / std::sqrt(6.0);
  const double w = std::exp(m.beta * omega - logMgf(m.law, m.beta) + m.h);
  const double q = normalIntervalMass(0.0, sd, -1.0, 1.0);
  const double total = w * q + (1.0 - q);
  auto cdf = [&](double t) {
    double acc = normalCdf(std::min(t, -1.0) / sd);
    if (t > -1.0)
      acc += w * normalIntervalMass(0.0, sd, -1.0, std::min(t, 1.0));
    if (t > 1.0) acc += normalIntervalMass(0.0, sd, 1.0, t);
    return acc / total;
  };
  const double D = ksStatistic(sample, cdf);
  const double crit = ksCriticalValue(static_cast<std::size_t>(n), 1e-3);
  rep.check(D < crit, "sampler: single-site law (KS)",
            "D = " + formatDouble(D) + ", critical " + formatDouble(crit));
}

inline VerifyReport runVerifySuite(const std::string& suite) {
  VerifyReport rep;
  bool known = false;
  const bool all = suite == "all";
  if (all || suite == "green") {
    verifyGreen(rep);
    known = true;
  }
  if (all || suite == "decomposition") {
    verifyDecomposition(rep);
    known = true;
  }
  if (all || suite == "hierarchy") {
    verifyHierarchy(rep);
    known = true;
  }
  if (all || suite == "scalars") {
    verifyScalars(rep);
    known = true;
  }
  if (all || suite == "sampler") {
    verifySampler(rep);
    known = true;
  }
  GFFPIN_CHECK(known, "verify: unknown suite '" << suite
               << "' (known: green, decomposition, hierarchy, scalars, "
                  "sampler, all)");
  return rep;
}

// ---------------------------------------------------------------------------
// Table aggregation: collect manifests under a directory into an index CSV
// and a readable Markdown digest.
inline std::vector<std::vector<std::string>> readCsv(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  GFFPIN_CHECK(in.good(), "readCsv: cannot open " << path.string());
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        break;
      case ',':
        row.push_back(field);
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          row.push_back(field);
          field.clear();
          rows.push_back(row);
          row.clear();
          any = false;
        }
        break;
      default:
        field += c;
    }
  }
  if (any || !field.empty()) {
    row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

inline int writeTables(const std::filesystem::path& root) {
  GFFPIN_CHECK(std::filesystem::is_directory(root),
               "tables: not a directory: " << root.string());
  std::vector<std::filesystem::path> manifests;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "manifest.json")
      manifests.push_back(entry.path());
  }
  std::sort(manifests.begin(), manifests.end());

  CsvWriter index(root / "index.csv");
  index.writeRow({"run_dir", "experiment", "wall_seconds", "warnings",
                  "outputs"});
  std::ofstream md(root / "tables.md", std::ios::binary);
  GFFPIN_CHECK(md.good(), "tables: cannot open tables.md");
  md << "# Run summary\n\n";

  for (const auto& mp : manifests) {
    const Json m = loadJsonFile(mp);
    const auto dir = mp.parent_path();
    const std::string rel =
        std::filesystem::relative(dir, root).generic_string();
    const std::string exp =
        m.contains("config") && m["config"].contains("experiment")
            ? m["config"]["experiment"].get<std::string>()
            : "?";
    const auto warnings =
        m.value("warnings", std::vector<std::string>{});
    const auto outputs = m.value("outputs", std::vector<std::string>{});
    std::string joined;
    for (const auto& o : outputs) joined += (joined.empty() ? "" : ";") + o;
    index.writeRow({rel, exp, formatDouble(m.value("wall_seconds", 0.0)),
                    std::to_string(warnings.size()), joined});

    md << "## " << (rel == "." ? root.filename().generic_string() : rel)
       << " (" << exp << ")\n\n";
    for (const auto& w : warnings) md << "- **warning:** " << w << "\n";
    if (!warnings.empty()) md << "\n";
    for (const auto& o : outputs) {
      const auto path = dir / o;
      if (path.extension() != ".csv" || !std::filesystem::exists(path))
        continue;
      const auto rows = readCsv(path);
      if (rows.empty()) continue;
      md << "**" << o << "**\n\n";
      const std::size_t shown = std::min<std::size_t>(rows.size(), 13);
      for (std::size_t r = 0; r < shown; ++r) {
        md << "|";
        for (const auto& f : rows[r]) md << " " << f << " |";
        md << "\n";
        if (r == 0) {
          md << "|";
          for (std::size_t k = 0; k < rows[0].size(); ++k) md << " --- |";
          md << "\n";
        }
      }
      if (rows.size() > shown)
        md << "\n(" << rows.size() - 1 << " data rows total)\n";
      md << "\n";
    }
  }
  index.close();
  md.close();
  GFFPIN_CHECK(md.good(), "tables: write failed");
  return static_cast<int>(manifests.size());
}

}  // namespace gffpin
