#pragma once
// Small statistics toolkit for chain output: online moments, batch-means
// standard errors, empirical quantiles, Kolmogorov-Smirnov distance, and a
// least-squares line fit used by extrapolations.
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gffpin/common.hpp"

namespace gffpin {

class RunningStat {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }
  double stddev() const { return std::sqrt(variance()); }
  double seOfMean() const {
    return n_ > 1 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0;
};

struct BatchMeansResult {
  double mean = 0.0;
  double se = 0.0;
  int batches = 0;
};

// Batch-means SE for a correlated series: split into `batches` contiguous
// blocks, use the block means as approximately independent observations.
inline BatchMeansResult batchMeans(const std::vector<double>& series, int batches) {
  GFFPIN_CHECK(batches >= 20,
               "batchMeans: need at least 20 batches for a usable standard "
               "error, got " << batches);
  GFFPIN_CHECK(series.size() >= static_cast<std::size_t>(2 * batches),
               "batchMeans: series of length " << series.size()
               << " too short for " << batches << " batches");
  const std::size_t len = series.size() / batches;
  RunningStat blockStat;
  for (int b = 0; b < batches; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) acc += series[b * len + i];
    blockStat.add(acc / static_cast<double>(len));
  }
  BatchMeansResult r;
  r.mean = blockStat.mean();
  r.se = blockStat.seOfMean();
  r.batches = batches;
  return r;
}

inline double quantileOfSorted(const std::vector<double>& sorted, double q) {
  GFFPIN_CHECK(!sorted.empty(), "quantileOfSorted: empty sample");
  GFFPIN_CHECK(q >= 0.0 && q <= 1.0, "quantileOfSorted: q outside [0,1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

inline double medianInPlace(std::vector<double>& v) {
  GFFPIN_CHECK(!v.empty(), "medianInPlace: empty sample");
  std::sort(v.begin(), v.end());
  return quantileOfSorted(v, 0.5);
}

// Two-sided KS statistic of a sample against a continuous cdf.
inline double ksStatistic(std::vector<double> sample,
                          const std::function<double(double)>& cdf) {
  GFFPIN_CHECK(!sample.empty(), "ksStatistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::max(d, std::fabs(F - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - F));
  }
  return d;
}

// Asymptotic KS critical value at level alpha: sqrt(-log(alpha/2)/2) / sqrt(n).
inline double ksCriticalValue(std::size_t n, double alpha) {
  GFFPIN_CHECK(n > 0 && alpha > 0.0 && alpha < 1.0, "ksCriticalValue: bad args");
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) /
         std::sqrt(static_cast<double>(n));
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit fitLine(const std::vector<double>& x, const std::vector<double>& y) {
  GFFPIN_CHECK(x.size() == y.size() && x.size() >= 2, "fitLine: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  GFFPIN_CHECK(std::fabs(det) > 1e-300, "fitLine: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

}  // namespace gffpin
