#pragma once

// Robust geometric predicates.
//
// Each predicate evaluates a floating-point determinant together with a
// static error bound (the stage-A bounds of Shewchuk's adaptive predicates)
// and falls back to exact expansion arithmetic when the sign is uncertain.
// Voxel-centroid clouds are exactly cospherical everywhere, so the exact
// path is hit routinely and insphere() additionally resolves exact zeros by
// simulation of simplicity on the lifted coordinate.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "spinekit/vec3.hpp"

namespace spinekit::predicates {

namespace detail {

inline constexpr double kEpsilon = 0x1p-53;
inline constexpr double kCcwBound = (3.0 + 16.0 * kEpsilon) * kEpsilon;
inline constexpr double kO3dBound = (7.0 + 56.0 * kEpsilon) * kEpsilon;
inline constexpr double kIspBound = (16.0 + 224.0 * kEpsilon) * kEpsilon;

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  const double av = x - bv;
  y = (a - av) + (b - bv);
}

inline void fast_two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  y = b - (x - a);
}

inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

/// Nonoverlapping floating-point expansion, components sorted by increasing
/// magnitude, zero components eliminated. The value is the exact sum.
class Expansion {
 public:
  Expansion() = default;
  explicit Expansion(double v) {
    if (v != 0.0) terms_.push_back(v);
  }

  static Expansion difference(double a, double b) {
    Expansion e;
    double x, y;
    two_sum(a, -b, x, y);
    if (y != 0.0) e.terms_.push_back(y);
    if (x != 0.0) e.terms_.push_back(x);
    return e;
  }

  static Expansion product(double a, double b) {
    Expansion e;
    double x, y;
    two_product(a, b, x, y);
    if (y != 0.0) e.terms_.push_back(y);
    if (x != 0.0) e.terms_.push_back(x);
    return e;
  }

  int sign() const {
    if (terms_.empty()) return 0;
    return terms_.back() > 0.0 ? 1 : -1;
  }

  double estimate() const {
    double s = 0.0;
    for (double t : terms_) s += t;
    return s;
  }

  Expansion operator-() const {
    Expansion r = *this;
    for (double& t : r.terms_) t = -t;
    return r;
  }

  friend Expansion operator+(const Expansion& e, const Expansion& f) {
    if (e.terms_.empty()) return f;
    if (f.terms_.empty()) return e;
    // Shewchuk's fast_expansion_sum_zeroelim: merge by magnitude, then sweep.
    std::vector<double> merged;
    merged.reserve(e.terms_.size() + f.terms_.size());
    std::merge(e.terms_.begin(), e.terms_.end(), f.terms_.begin(), f.terms_.end(),
               std::back_inserter(merged),
               [](double a, double b) { return std::fabs(a) < std::fabs(b); });
    Expansion h;
    h.terms_.reserve(merged.size());
    double q = merged[0];
    double hh;
    std::size_t i = 1;
    if (merged.size() > 1) {
      fast_two_sum(merged[1], q, q, hh);
      if (hh != 0.0) h.terms_.push_back(hh);
      i = 2;
    }
    for (; i < merged.size(); ++i) {
      two_sum(q, merged[i], q, hh);
      if (hh != 0.0) h.terms_.push_back(hh);
    }
    if (q != 0.0) h.terms_.push_back(q);
    return h;
  }

  friend Expansion operator-(const Expansion& e, const Expansion& f) { return e + (-f); }

  Expansion scaled(double b) const {
    Expansion h;
    if (terms_.empty() || b == 0.0) return h;
    h.terms_.reserve(2 * terms_.size());
    double q, hh;
    two_product(terms_[0], b, q, hh);
    if (hh != 0.0) h.terms_.push_back(hh);
    for (std::size_t i = 1; i < terms_.size(); ++i) {
      double p1, p0, sum;
      two_product(terms_[i], b, p1, p0);
      two_sum(q, p0, sum, hh);
      if (hh != 0.0) h.terms_.push_back(hh);
      fast_two_sum(p1, sum, q, hh);
      if (hh != 0.0) h.terms_.push_back(hh);
    }
    if (q != 0.0) h.terms_.push_back(q);
    return h;
  }

  friend Expansion operator*(const Expansion& e, const Expansion& f) {
    Expansion acc;
    for (double t : f.terms_) acc = acc + e.scaled(t);
    return acc;
  }

 private:
  std::vector<double> terms_;
};

inline Expansion det2(const Expansion& a, const Expansion& b, const Expansion& c,
                      const Expansion& d) {
  return a * d - b * c;
}

// det[[a],[b],[c]] of three exact row vectors.
inline Expansion det3(const std::array<Expansion, 3>& a, const std::array<Expansion, 3>& b,
                      const std::array<Expansion, 3>& c) {
  return a[0] * det2(b[1], b[2], c[1], c[2]) - a[1] * det2(b[0], b[2], c[0], c[2]) +
         a[2] * det2(b[0], b[1], c[0], c[1]);
}

inline std::array<Expansion, 3> exact_difference(const Vec3& p, const Vec3& q) {
  return {Expansion::difference(p.x, q.x), Expansion::difference(p.y, q.y),
          Expansion::difference(p.z, q.z)};
}

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace detail

/// Sign of the 2D orientation of (a, b, c): positive when counterclockwise.
inline int orient2d(double ax, double ay, double bx, double by, double cx, double cy) {
  const double detleft = (ax - cx) * (by - cy);
  const double detright = (ay - cy) * (bx - cx);
  const double det = detleft - detright;
  const double bound = detail::kCcwBound * (std::fabs(detleft) + std::fabs(detright));
  if (det > bound || -det > bound) return detail::sign_of(det);
  using detail::Expansion;
  const Expansion e = Expansion::difference(ax, cx) * Expansion::difference(by, cy) -
                      Expansion::difference(ay, cy) * Expansion::difference(bx, cx);
  return e.sign();
}

/// Sign of det[b - a, c - a, d - a]: positive when d lies on the side of the
/// plane (a, b, c) that the right-handed normal (b - a) x (c - a) points to.
inline int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const double adx = a.x - d.x, bdx = b.x - d.x, cdx = c.x - d.x;
  const double ady = a.y - d.y, bdy = b.y - d.y, cdy = c.y - d.y;
  const double adz = a.z - d.z, bdz = b.z - d.z, cdz = c.z - d.z;
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  // det[a - d, b - d, c - d] has the opposite sign of det[b - a, c - a, d - a].
  const double det =
      adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
  const double permanent = (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * std::fabs(adz) +
                           (std::fabs(cdxady) + std::fabs(adxcdy)) * std::fabs(bdz) +
                           (std::fabs(adxbdy) + std::fabs(bdxady)) * std::fabs(cdz);
  const double bound = detail::kO3dBound * permanent;
  if (det > bound || -det > bound) return -detail::sign_of(det);
  const auto ad = detail::exact_difference(a, d);
  const auto bd = detail::exact_difference(b, d);
  const auto cd = detail::exact_difference(c, d);
  return -detail::det3(ad, bd, cd).sign();
}

/// For a positively oriented tetrahedron (orient3d(a, b, c, d) > 0), returns
/// +1 when e is strictly inside its circumsphere, -1 when strictly outside
/// and 0 when cospherical.
inline int insphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  const double aex = a.x - e.x, bex = b.x - e.x, cex = c.x - e.x, dex = d.x - e.x;
  const double aey = a.y - e.y, bey = b.y - e.y, cey = c.y - e.y, dey = d.y - e.y;
  const double aez = a.z - e.z, bez = b.z - e.z, cez = c.z - e.z, dez = d.z - e.z;

  const double aexbey = aex * bey, bexaey = bex * aey;
  const double bexcey = bex * cey, cexbey = cex * bey;
  const double cexdey = cex * dey, dexcey = dex * cey;
  const double dexaey = dex * aey, aexdey = aex * dey;
  const double aexcey = aex * cey, cexaey = cex * aey;
  const double bexdey = bex * dey, dexbey = dex * bey;
  const double ab = aexbey - bexaey, bc = bexcey - cexbey, cd = cexdey - dexcey;
  const double da = dexaey - aexdey, ac = aexcey - cexaey, bd = bexdey - dexbey;

  const double abc = aez * bc - bez * ac + cez * ab;
  const double bcd = bez * cd - cez * bd + dez * bc;
  const double cda = cez * da + dez * ac + aez * cd;
  const double dab = dez * ab + aez * bd + bez * da;

  const double alift = aex * aex + aey * aey + aez * aez;
  const double blift = bex * bex + bey * bey + bez * bez;
  const double clift = cex * cex + cey * cey + cez * cez;
  const double dlift = dex * dex + dey * dey + dez * dez;

  const double det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd);

  const double aezp = std::fabs(aez), bezp = std::fabs(bez), cezp = std::fabs(cez),
               dezp = std::fabs(dez);
  const double aexbeyp = std::fabs(aexbey), bexaeyp = std::fabs(bexaey);
  const double bexceyp = std::fabs(bexcey), cexbeyp = std::fabs(cexbey);
  const double cexdeyp = std::fabs(cexdey), dexceyp = std::fabs(dexcey);
  const double dexaeyp = std::fabs(dexaey), aexdeyp = std::fabs(aexdey);
  const double aexceyp = std::fabs(aexcey), cexaeyp = std::fabs(cexaey);
  const double bexdeyp = std::fabs(bexdey), dexbeyp = std::fabs(dexbey);
  const double permanent =
      ((cexdeyp + dexceyp) * bezp + (dexbeyp + bexdeyp) * cezp + (bexceyp + cexbeyp) * dezp) *
          alift +
      ((dexaeyp + aexdeyp) * cezp + (aexceyp + cexaeyp) * dezp + (cexdeyp + dexceyp) * aezp) *
          blift +
      ((aexbeyp + bexaeyp) * dezp + (bexdeyp + dexbeyp) * aezp + (dexaeyp + aexdeyp) * bezp) *
          clift +
      ((bexceyp + cexbeyp) * aezp + (cexaeyp + aexceyp) * bezp + (aexbeyp + bexaeyp) * cezp) *
          dlift;
  const double bound = detail::kIspBound * permanent;
  // Shewchuk's determinant is positive-inside for his orientation, which is
  // the opposite of ours.
  if (det > bound || -det > bound) return -detail::sign_of(det);

  using detail::Expansion;
  const auto ae = detail::exact_difference(a, e);
  const auto be = detail::exact_difference(b, e);
  const auto ce = detail::exact_difference(c, e);
  const auto de = detail::exact_difference(d, e);
  auto lift = [](const std::array<Expansion, 3>& v) {
    return v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  };
  // Cofactor expansion of det[[p - e, |p - e|^2]] along the lift column.
  const Expansion raw = lift(de) * detail::det3(ae, be, ce) -
                        lift(ce) * detail::det3(ae, be, de) +
                        lift(be) * detail::det3(ae, ce, de) -
                        lift(ae) * detail::det3(be, ce, de);
  return -raw.sign();
}

/// insphere() made total by symbolically perturbing the lifted coordinate of
/// every point by epsilon^(rank), ranks taken from the caller's global point
/// ids (lower id = larger perturbation). Never returns 0 for a
/// non-degenerate tetrahedron.
inline int insphere_sos(const std::array<Vec3, 5>& pts, const std::array<std::uint32_t, 5>& ids) {
  const int s = insphere(pts[0], pts[1], pts[2], pts[3], pts[4]);
  if (s != 0) return s;
  std::array<int, 5> order{0, 1, 2, 3, 4};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return ids[i] < ids[j]; });
  for (int row : order) {
    std::array<Vec3, 4> rest;
    int k = 0;
    for (int i = 0; i < 5; ++i) {
      if (i != row) rest[k++] = pts[i];
    }
    const int o = orient3d(rest[0], rest[1], rest[2], rest[3]);
    if (o != 0) {
      const int cofactor = (row % 2 == 0) ? o : -o;
      return -cofactor;
    }
  }
  return 0;
}

}  // namespace spinekit::predicates
