#pragma once
// Quenched Gibbs sampling of the pinned lattice free field by single-site
// heat bath. The chain state is kept in the window frame y = phi - u, so the
// contact window is always [-1,1] and the shift u enters only through the
// boundary datum: shift covariance holds bit-for-bit by construction. Each
// site update consumes exactly one uniform draw (inverse-CDF sampling of the
// two-piece conditional), so runs are reproducible from (seed, tags) alone.
#include <cmath>
#include <vector>

#include "gffpin/analytics.hpp"
#include "gffpin/disorder.hpp"
#include "gffpin/lattice.hpp"
#include "gffpin/normal.hpp"
#include "gffpin/rng.hpp"
#include "gffpin/solver.hpp"
#include "gffpin/stats.hpp"

namespace gffpin {

struct PinningModel {
  int d = 3;
  BoxRegion box;               // closed box; the field lives on its interior
  double beta = 1.0;
  double h = 0.0;
  double u = 0.0;              // window center: contacts are phi in [u-1, u+1]
  double boundaryValue = 0.0;  // phi datum outside the interior
  DisorderLaw law = DisorderLaw::Normal;
};

enum class ChainStart {
  AtBoundary,  // phi = boundaryValue everywhere (cold)
  AtWindow     // phi = u everywhere (all sites in contact)
};

// Draws the disorder field on the interior of the box in raster order from
// the stream (masterSeed, kDisorder, replica, gridIndex) — bit-identical
// regeneration from the manifest keys.
inline std::vector<double> drawDisorder(const PinningModel& m,
                                        std::uint64_t masterSeed,
                                        std::uint64_t replica,
                                        std::uint64_t gridIndex) {
  Rng rng = streamFor(masterSeed, stream_class::kDisorder, replica, gridIndex);
  const std::int64_t n = m.box.interior().volume();
  std::vector<double> omega(static_cast<std::size_t>(n));
  for (auto& w : omega) w = sampleDisorder(m.law, rng);
  return omega;
}

class PinningChain {
 public:
  PinningChain(const PinningModel& model, const std::vector<double>& omega)
      : m_(model), idx_(model.d, boxSites(model.box.interior())) {
    const std::size_t n = idx_.size();
    GFFPIN_CHECK(omega.size() == n,
                 "PinningChain: omega has " << omega.size()
                 << " entries, interior has " << n);
    const double lam = (m_.beta > 0.0) ? logMgf(m_.law, m_.beta) : 0.0;
    logw_.resize(n);
    extCount_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      logw_[i] = m_.beta * omega[i] - lam + m_.h;
      int ext = 0;
      for (int k = 0; k < 2 * m_.d; ++k)
        if (idx_.neighbor(i, k) < 0) ++ext;
      extCount_[i] = ext;
    }
    reset(ChainStart::AtBoundary);
  }

  const PinningModel& model() const { return m_; }
  const LatticeIndex& index() const { return idx_; }
  std::size_t size() const { return idx_.size(); }

  void reset(ChainStart start) {
    const double yInit = (start == ChainStart::AtWindow)
                             ? 0.0
                             : m_.boundaryValue - m_.u;
    y_.assign(idx_.size(), yInit);
    recountContacts();
  }

  // phi = y + u.
  double phiAt(std::size_t i) const { return y_[i] + m_.u; }
  const std::vector<double>& windowFrame() const { return y_; }

  std::size_t contactCount() const { return contacts_; }
  double contactFraction() const {
    return static_cast<double>(contacts_) / static_cast<double>(idx_.size());
  }

  std::size_t recountContacts() {
    contacts_ = 0;
    for (double v : y_)
      if (inWindow(v)) ++contacts_;
    return contacts_;
  }

  // One raster-order heat-bath sweep; exactly one uniform per site.
  void sweep(Rng& rng) {
    const double extDatum = m_.boundaryValue - m_.u;
    const double invDeg = 1.0 / (2.0 * m_.d);
    const double sd = std::sqrt(invDeg);
    for (std::size_t i = 0; i < y_.size(); ++i) {
      double sum = extCount_[i] * extDatum;
      for (int k = 0; k < 2 * m_.d; ++k) {
        const int nb = idx_.neighbor(i, k);
        if (nb >= 0) sum += y_[static_cast<std::size_t>(nb)];
      }
      const double mean = sum * invDeg;
      const double a = (-1.0 - mean) / sd;
      const double b = (1.0 - mean) / sd;
      const double q = normalIntervalMass(a, b);
      const double wq = std::exp(logw_[i]) * q;
      const double pIn = wq / (wq + (1.0 - q));
      const bool wasIn = inWindow(y_[i]);
      const double v = rng.uniform01();
      double z;
      bool nowIn;
      if (v < pIn) {
        z = truncatedNormalInverse(a, b, v / pIn);
        nowIn = true;
      } else {
        z = complementNormalInverse(a, b, (v - pIn) / (1.0 - pIn));
        nowIn = false;
      }
      y_[i] = mean + sd * z;
      if (nowIn != wasIn) contacts_ += nowIn ? 1 : -1;
    }
  }

 private:
  static bool inWindow(double y) { return y >= -1.0 && y <= 1.0; }

  PinningModel m_;
  LatticeIndex idx_;
  std::vector<double> y_;
  std::vector<double> logw_;
  std::vector<int> extCount_;
  std::size_t contacts_ = 0;
};

struct ChainOptions {
  int sweeps = 4000;          // total, including burn-in
  double burnFraction = 0.2;  // leading fraction discarded
  int batches = 30;           // batch-means blocks (>= 20 required)
  ChainStart start = ChainStart::AtBoundary;
};

struct ContactEstimate {
  double mean = 0.0;  // contact fraction
  double se = 0.0;
  int batches = 0;
  int sweepsUsed = 0;
};

// Runs the chain and estimates the quenched contact fraction with a
// batch-means standard error over the post-burn sweep series.
inline ContactEstimate estimateContactFraction(const PinningModel& model,
                                               const std::vector<double>& omega,
                                               const ChainOptions& opts,
                                               Rng& rng) {
  GFFPIN_CHECK(opts.batches >= 20,
               "estimateContactFraction: need at least 20 batches, got "
                   << opts.batches);
  GFFPIN_CHECK(opts.sweeps >= 10 * opts.batches,
               "estimateContactFraction: " << opts.sweeps
               << " sweeps is too short for " << opts.batches << " batches");
  PinningChain chain(model, omega);
  chain.reset(opts.start);
  const int burn = static_cast<int>(opts.burnFraction * opts.sweeps);
  std::vector<double> series;
  series.reserve(static_cast<std::size_t>(opts.sweeps - burn));
  for (int t = 0; t < opts.sweeps; ++t) {
    chain.sweep(rng);
    if (t >= burn) series.push_back(chain.contactFraction());
    // Guard against drift of the incremental counter.
    if ((t + 1) % 100 == 0) {
      const std::size_t cached = chain.contactCount();
      GFFPIN_CHECK(chain.recountContacts() == cached,
                   "estimateContactFraction: contact counter drifted");
    }
  }
  const BatchMeansResult r = batchMeans(series, opts.batches);
  ContactEstimate est;
  est.mean = r.mean;
  est.se = r.se;
  est.batches = r.batches;
  est.sweepsUsed = static_cast<int>(series.size());
  return est;
}

// Height profile of the pinned field: pooled |phi| quantiles after burn-in.
struct HeightProfile {
  double medianAbs = 0.0;
  double q10 = 0.0, q25 = 0.0, q75 = 0.0, q90 = 0.0;
  double meanContactFraction = 0.0;
  std::size_t pooledSamples = 0;
};

inline HeightProfile heightProfile(const PinningModel& model,
                                   const std::vector<double>& omega,
                                   const ChainOptions& opts, int thin,
                                   Rng& rng) {
  GFFPIN_CHECK(thin >= 1, "heightProfile: thin must be >= 1");
  PinningChain chain(model, omega);
  chain.reset(opts.start);
  const int burn = static_cast<int>(opts.burnFraction * opts.sweeps);
  std::vector<double> pooled;
  RunningStat rho;
  for (int t = 0; t < opts.sweeps; ++t) {
    chain.sweep(rng);
    if (t >= burn) {
      rho.add(chain.contactFraction());
      if ((t - burn) % thin == 0)
        for (std::size_t i = 0; i < chain.size(); ++i)
          pooled.push_back(std::fabs(chain.phiAt(i)));
    }
  }
  GFFPIN_CHECK(!pooled.empty(), "heightProfile: no samples collected");
  std::sort(pooled.begin(), pooled.end());
  HeightProfile prof;
  prof.medianAbs = quantileOfSorted(pooled, 0.5);
  prof.q10 = quantileOfSorted(pooled, 0.10);
  prof.q25 = quantileOfSorted(pooled, 0.25);
  prof.q75 = quantileOfSorted(pooled, 0.75);
  prof.q90 = quantileOfSorted(pooled, 0.90);
  prof.meanContactFraction = rho.mean();
  prof.pooledSamples = pooled.size();
  return prof;
}

}  // namespace gffpin
