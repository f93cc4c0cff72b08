#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "gffpin/normal.hpp"
#include "gffpin/rng.hpp"
#include "gffpin/stats.hpp"

using namespace gffpin;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("splitmix64 matches the reference sequence") {
  std::uint64_t st = 0;
  CHECK(splitmix64(st) == 0xE220A8397B1DCDAFull);
  CHECK(splitmix64(st) == 0x6E789E6AA1B965F4ull);
  CHECK(splitmix64(st) == 0x06C45D188009454Full);
}

TEST_CASE("generator streams are deterministic and distinct") {
  Rng a = streamFor(42, stream_class::kChain, 0, 0);
  Rng b = streamFor(42, stream_class::kChain, 0, 0);
  for (int i = 0; i < 16; ++i) CHECK(a.nextU64() == b.nextU64());

  std::set<std::uint64_t> firsts;
  for (std::uint64_t r = 0; r < 4; ++r)
    for (std::uint64_t k = 0; k < 4; ++k) {
      firsts.insert(streamFor(42, stream_class::kChain, r, k).nextU64());
      firsts.insert(streamFor(42, stream_class::kDisorder, r, k).nextU64());
    }
  CHECK(firsts.size() == 32);  // no stream collisions
}

TEST_CASE("uniform01 is strictly inside (0,1) with the right mean") {
  Rng rng(123);
  RunningStat st;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    st.add(u);
  }
  CHECK_THAT(st.mean(), WithinAbs(0.5, 4e-3));
  CHECK_THAT(st.variance(), WithinAbs(1.0 / 12.0, 2e-3));
}

TEST_CASE("normal quantile hits reference values") {
  CHECK_THAT(normalQuantile(0.5), WithinAbs(0.0, 1e-15));
  CHECK_THAT(normalQuantile(0.975), WithinAbs(1.959963984540054, 1e-12));
  CHECK_THAT(normalQuantile(0.025), WithinAbs(-1.959963984540054, 1e-12));
  CHECK_THAT(normalQuantile(0.841344746068543), WithinAbs(1.0, 1e-12));
}

TEST_CASE("normal quantile round-trips through the cdf") {
  for (double p : {1e-12, 1e-6, 1e-3, 0.1, 0.25, 0.5, 0.77, 0.999, 1 - 1e-9}) {
    const double z = normalQuantile(p);
    CHECK_THAT(normalCdf(z), WithinRel(p, 1e-11));
  }
  // Far tail: quantiles of extreme probabilities stay finite and ordered.
  const double zTiny = normalQuantile(1e-300);
  CHECK(std::isfinite(zTiny));
  CHECK(zTiny < -37.0);
  CHECK(zTiny > -38.0);
}

TEST_CASE("interval mass straddling zero uses the erf form") {
  CHECK_THAT(normalIntervalMass(-1.0, 1.0),
             WithinAbs(0.682689492137086, 1e-14));
  CHECK_THAT(normalIntervalMass(0.0, 1.0, -1.0, 1.0),
             WithinAbs(0.682689492137086, 1e-14));
  CHECK_THAT(normalIntervalMass(0.0, 2.0, -2.0, 2.0),
             WithinAbs(0.682689492137086, 1e-14));
}

TEST_CASE("interval mass in a far tail keeps relative accuracy") {
  const double m = normalIntervalMass(8.0, 9.0);
  CHECK(m > 0.0);
  CHECK_THAT(m, WithinRel(normalSf(8.0) - normalSf(9.0), 1e-13));
  CHECK_THAT(normalSf(8.0), WithinRel(6.22096057427178e-16, 1e-10));
}

TEST_CASE("truncated normal inverse is a proper inverse") {
  struct Range {
    double a, b;
  };
  for (const Range r : {Range{-1.0, 2.0}, Range{-0.3, 0.3}, Range{8.0, 9.0},
                        Range{-9.0, -8.0}, Range{-2.0, 11.0}}) {
    const double total = normalIntervalMass(r.a, r.b);
    double prev = r.a;
    for (double v : {1e-6, 0.1, 0.3, 0.5, 0.7, 0.9, 1 - 1e-6}) {
      const double z = truncatedNormalInverse(r.a, r.b, v);
      REQUIRE(z >= r.a);
      REQUIRE(z <= r.b);
      CHECK(z >= prev);  // monotone in v
      prev = z;
      const double back = normalIntervalMass(r.a, z) / total;
      CHECK_THAT(back, WithinAbs(v, 1e-9));
    }
  }
}

TEST_CASE("complement inverse lands outside the window") {
  const double a = -1.0, b = 1.0;
  const double below = normalCdf(a);
  const double total = below + normalSf(b);
  double prev = -1e300;
  for (double v : {1e-6, 0.1, 0.3, 0.5, 0.7, 0.9, 1 - 1e-6}) {
    const double z = complementNormalInverse(a, b, v);
    REQUIRE((z <= a || z >= b));
    CHECK(z >= prev);
    prev = z;
    const double back =
        z <= a ? normalCdf(z) / total : (below + normalSf(b) - normalSf(z)) / total;
    CHECK_THAT(back, WithinAbs(v, 1e-9));
  }
}

TEST_CASE("standard normal sampler has the right law") {
  Rng rng = streamFor(7, stream_class::kGaussian, 0, 0);
  const int n = 200000;
  std::vector<double> sample(n);
  RunningStat st;
  for (int i = 0; i < n; ++i) {
    sample[static_cast<std::size_t>(i)] = sampleStdNormal(rng);
    st.add(sample[static_cast<std::size_t>(i)]);
  }
  CHECK_THAT(st.mean(), WithinAbs(0.0, 4.0 / std::sqrt(double(n))));
  CHECK_THAT(st.variance(), WithinAbs(1.0, 0.02));
  const double d = ksStatistic(sample, [](double t) { return normalCdf(t); });
  CHECK(d < ksCriticalValue(n, 1e-3));
}
