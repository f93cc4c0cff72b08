#pragma once
// Lattice geometry: sites of Z^d (d <= 4), inclusive boxes, site sets with
// O(log n) membership, neighbor enumeration, and l1 distances.
#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <vector>

#include "gffpin/common.hpp"

namespace gffpin {

inline constexpr int kMaxDim = 4;

struct Site {
  std::array<std::int32_t, kMaxDim> c{0, 0, 0, 0};
  auto operator<=>(const Site&) const = default;
  std::int32_t& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  std::int32_t operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
};

inline Site makeSite(std::initializer_list<std::int32_t> coords) {
  GFFPIN_CHECK(coords.size() <= static_cast<std::size_t>(kMaxDim),
               "makeSite: too many coordinates");
  Site s;
  int i = 0;
  for (auto v : coords) s[i++] = v;
  return s;
}

inline int l1Norm(const Site& s, int d) {
  int acc = 0;
  for (int i = 0; i < d; ++i) acc += std::abs(s[i]);
  return acc;
}

inline int l1Distance(const Site& a, const Site& b, int d) {
  int acc = 0;
  for (int i = 0; i < d; ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

inline int linfNorm(const Site& s, int d) {
  int m = 0;
  for (int i = 0; i < d; ++i) m = std::max(m, std::abs(s[i]));
  return m;
}

inline Site siteAdd(const Site& a, const Site& b, int d) {
  Site r = a;
  for (int i = 0; i < d; ++i) r[i] += b[i];
  return r;
}

inline Site siteSub(const Site& a, const Site& b, int d) {
  Site r = a;
  for (int i = 0; i < d; ++i) r[i] -= b[i];
  return r;
}

inline Site neighborOf(const Site& s, int axis, int dir) {
  Site r = s;
  r[axis] += dir;
  return r;
}

// Axis-aligned box of sites, all coordinates inclusive: [lo_i, hi_i] per axis.
struct BoxRegion {
  int d = 0;
  Site lo, hi;

  static BoxRegion cube(int d, std::int32_t loCoord, std::int32_t hiCoord) {
    GFFPIN_CHECK(d >= 1 && d <= kMaxDim, "BoxRegion: dimension must be 1..4");
    GFFPIN_CHECK(hiCoord >= loCoord, "BoxRegion: hi < lo");
    BoxRegion b;
    b.d = d;
    for (int i = 0; i < d; ++i) {
      b.lo[i] = loCoord;
      b.hi[i] = hiCoord;
    }
    return b;
  }

  static BoxRegion fromCorners(int d, const Site& lo, const Site& hi) {
    GFFPIN_CHECK(d >= 1 && d <= kMaxDim, "BoxRegion: dimension must be 1..4");
    for (int i = 0; i < d; ++i)
      GFFPIN_CHECK(hi[i] >= lo[i], "BoxRegion: hi < lo on axis " << i);
    BoxRegion b;
    b.d = d;
    b.lo = lo;
    b.hi = hi;
    return b;
  }

  std::int64_t sideSites(int axis) const {
    return static_cast<std::int64_t>(hi[axis]) - lo[axis] + 1;
  }

  std::int64_t volume() const {
    std::int64_t v = 1;
    for (int i = 0; i < d; ++i) v *= sideSites(i);
    return v;
  }

  bool contains(const Site& s) const {
    for (int i = 0; i < d; ++i)
      if (s[i] < lo[i] || s[i] > hi[i]) return false;
    return true;
  }

  bool strictlyContains(const Site& s) const {
    for (int i = 0; i < d; ++i)
      if (s[i] <= lo[i] || s[i] >= hi[i]) return false;
    return true;
  }

  // Open box of sites strictly inside; requires each side to have >= 3 sites.
  BoxRegion interior() const {
    for (int i = 0; i < d; ++i)
      GFFPIN_CHECK(sideSites(i) >= 3, "BoxRegion::interior: side too short");
    BoxRegion b = *this;
    for (int i = 0; i < d; ++i) {
      ++b.lo[i];
      --b.hi[i];
    }
    return b;
  }

  Site center() const {  // coordinate-wise floor of the midpoint
    Site s;
    for (int i = 0; i < d; ++i) s[i] = lo[i] + (hi[i] - lo[i]) / 2;
    return s;
  }
};

// Standard simulation box [0,N]^d (edge N, N+1 sites per side).
inline BoxRegion buildBox(int d, int edge) {
  GFFPIN_CHECK(edge >= 1, "buildBox: edge must be >= 1");
  return BoxRegion::cube(d, 0, edge);
}

// Visits every site of the box in raster (lexicographic, last axis fastest) order.
template <class Fn>
void forEachSite(const BoxRegion& box, Fn&& fn) {
  Site s = box.lo;
  for (;;) {
    fn(static_cast<const Site&>(s));
    int axis = box.d - 1;
    while (axis >= 0) {
      if (s[axis] < box.hi[axis]) {
        ++s[axis];
        break;
      }
      s[axis] = box.lo[axis];
      --axis;
    }
    if (axis < 0) return;
  }
}

inline std::vector<Site> boxSites(const BoxRegion& box) {
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(box.volume()));
  forEachSite(box, [&](const Site& s) { out.push_back(s); });
  return out;
}

inline std::vector<Site> boundarySites(const BoxRegion& box) {
  std::vector<Site> out;
  forEachSite(box, [&](const Site& s) {
    if (!box.strictlyContains(s)) out.push_back(s);
  });
  return out;
}

// Sorted, deduplicated site collection with binary-search membership.
class SiteSet {
 public:
  SiteSet() = default;
  explicit SiteSet(std::vector<Site> sites) : sites_(std::move(sites)) {
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
  }

  bool contains(const Site& s) const {
    return std::binary_search(sites_.begin(), sites_.end(), s);
  }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  const std::vector<Site>& sites() const { return sites_; }

  void insert(const Site& s) {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
    if (it == sites_.end() || *it != s) sites_.insert(it, s);
  }

  void merge(const SiteSet& other) {
    std::vector<Site> merged;
    merged.reserve(sites_.size() + other.sites_.size());
    std::merge(sites_.begin(), sites_.end(), other.sites_.begin(),
               other.sites_.end(), std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    sites_ = std::move(merged);
  }

 private:
  std::vector<Site> sites_;
};

inline int l1DistanceToSet(const Site& x, const SiteSet& set, int d) {
  GFFPIN_CHECK(!set.empty(), "l1DistanceToSet: empty set");
  int best = std::numeric_limits<int>::max();
  for (const Site& s : set.sites()) best = std::min(best, l1Distance(x, s, d));
  return best;
}

}  // namespace gffpin
