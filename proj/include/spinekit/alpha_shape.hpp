#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "spinekit/delaunay.hpp"
#include "spinekit/error.hpp"
#include "spinekit/mesh.hpp"
#include "spinekit/vec3.hpp"

namespace spinekit {

/// Either a fixed alpha radius in mm (infinity selects the convex hull) or
/// automatic selection of the smallest admissible critical value.
class AlphaMode {
 public:
  static AlphaMode automatic() { return AlphaMode{}; }
  static AlphaMode fixed(double radius_mm) { return AlphaMode{radius_mm}; }
  static AlphaMode convex_hull() { return AlphaMode{std::numeric_limits<double>::infinity()}; }

  bool is_auto() const { return !radius_.has_value(); }
  double radius() const { return radius_.value(); }

 private:
  AlphaMode() = default;
  explicit AlphaMode(double r) : radius_(r) {}
  std::optional<double> radius_;
};

/// One voxel diagonal, the natural alpha for face-adjacent grid samples.
inline double default_grid_alpha(const Vec3& spacing) { return norm(spacing); }

/// Regularized alpha shape over a Delaunay tetrahedralization: the solid is
/// the union of finite tetrahedra whose circumradius is at most alpha, and
/// the surface is the set of solid/non-solid interface facets.
class AlphaComplex {
 public:
  explicit AlphaComplex(std::span<const Vec3> points) : dt_(validated(points)) {
    tets_ = dt_.finite_tets();
    radius2_.reserve(tets_.size());
    for (std::size_t t : tets_) radius2_.push_back(circumradius2(t));
    std::vector<double> sorted = radius2_;
    std::sort(sorted.begin(), sorted.end());
    for (double r2 : sorted) {
      // Tetrahedra of one cospherical cell share a circumsphere; merge the
      // floating-point jitter between them into one critical value.
      if (critical_.empty() || r2 > critical_.back() * (1.0 + kRelTol)) critical_.push_back(r2);
    }
  }

  const Delaunay3& delaunay() const { return dt_; }

  /// Distinct critical alpha values (mm), ascending.
  std::vector<double> critical_alphas() const {
    std::vector<double> out;
    out.reserve(critical_.size());
    for (double r2 : critical_) out.push_back(std::sqrt(r2));
    return out;
  }

  struct Surface {
    std::vector<Triangle> triangles;  // Delaunay vertex ids, outward oriented
    bool covers_all_points = false;
    bool manifold = false;
    bool cavities_discarded = false;
  };

  Surface surface(double alpha) const { return extract(solid(alpha)); }

  TriangleMesh build(const AlphaMode& mode) const {
    double alpha = 0.0;
    Surface s;
    if (mode.is_auto()) {
      std::tie(alpha, s) = search();
    } else {
      alpha = mode.radius();
      s = surface(alpha);
      if (!s.covers_all_points || !s.manifold) {
        std::ostringstream msg;
        msg << "alpha " << alpha << " mm gives "
            << (s.covers_all_points ? "a non-manifold surface" : "a surface not enclosing all points");
        throw Error(ErrorKind::reconstruction, msg.str());
      }
    }
    return to_mesh(s, alpha);
  }

 private:
  static constexpr double kRelTol = 1e-9;

  static std::span<const Vec3> validated(std::span<const Vec3> points) {
    if (points.size() < 4) {
      throw Error(ErrorKind::reconstruction, "alpha shape needs at least 4 points");
    }
    const Vec3& p0 = points[0];
    std::size_t i1 = 0;
    double far = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      const double d = squared_distance(points[i], p0);
      if (d > far) far = d, i1 = i;
    }
    std::size_t i2 = 0;
    double best = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      const double c = squared_norm(cross(points[i1] - p0, points[i] - p0));
      if (c > best) best = c, i2 = i;
    }
    if (far == 0.0 || best == 0.0) {
      throw Error(ErrorKind::reconstruction, "alpha shape input points are collinear");
    }
    for (const Vec3& p : points) {
      if (predicates::orient3d(p0, points[i1], points[i2], p) != 0) return points;
    }
    throw Error(ErrorKind::reconstruction, "alpha shape input points are coplanar");
  }

  double circumradius2(std::size_t t) const {
    const auto& v = dt_.tet(t).v;
    const Vec3& a = dt_.vertex(v[0]);
    const Vec3 u = dt_.vertex(v[1]) - a;
    const Vec3 w = dt_.vertex(v[2]) - a;
    const Vec3 z = dt_.vertex(v[3]) - a;
    const double den = 2.0 * dot(u, cross(w, z));
    const Vec3 off = (cross(w, z) * squared_norm(u) + cross(z, u) * squared_norm(w) +
                      cross(u, w) * squared_norm(z)) *
                     (1.0 / den);
    return squared_norm(off);
  }

  std::vector<std::uint8_t> solid(double alpha) const {
    std::vector<std::uint8_t> in(dt_.tet_capacity(), 0);
    const double limit = std::isinf(alpha) ? alpha : alpha * alpha * (1.0 + kRelTol);
    for (std::size_t k = 0; k < tets_.size(); ++k) {
      if (radius2_[k] <= limit) in[tets_[k]] = 1;
    }
    return in;
  }

  bool covers(const std::vector<std::uint8_t>& in) const {
    std::vector<std::uint8_t> hit(dt_.num_vertices(), 0);
    for (std::size_t t : tets_) {
      if (!in[t]) continue;
      for (auto v : dt_.tet(t).v) hit[v] = 1;
    }
    return std::all_of(hit.begin(), hit.end(), [](std::uint8_t h) { return h != 0; });
  }

  Surface extract(const std::vector<std::uint8_t>& in) const {
    // Outward facet opposite vertex i of a positively oriented tetrahedron.
    static constexpr int kFace[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    Surface s;
    s.covers_all_points = covers(in);
    std::vector<Triangle> all;
    for (std::size_t t : tets_) {
      if (!in[t]) continue;
      const auto& tet = dt_.tet(t);
      for (int i = 0; i < 4; ++i) {
        const std::int32_t nb = tet.n[static_cast<std::size_t>(i)];
        if (nb != Delaunay3::kNone && in[static_cast<std::size_t>(nb)]) continue;
        all.push_back({tet.v[kFace[i][0]], tet.v[kFace[i][1]], tet.v[kFace[i][2]]});
      }
    }
    s.manifold = is_closed_manifold(all);
    if (!s.manifold) {
      s.triangles = std::move(all);
      return s;
    }

    // Split into shells; outer shells have positive signed volume, cavity
    // shells negative.
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_edge;
    for (std::size_t f = 0; f < all.size(); ++f) {
      for (int k = 0; k < 3; ++k) by_edge[detail::edge_key(all[f][k], all[f][(k + 1) % 3])].push_back(f);
    }
    std::vector<int> shell(all.size(), -1);
    int shells = 0;
    for (std::size_t seed = 0; seed < all.size(); ++seed) {
      if (shell[seed] >= 0) continue;
      std::vector<std::size_t> stack{seed};
      shell[seed] = shells;
      while (!stack.empty()) {
        const std::size_t f = stack.back();
        stack.pop_back();
        for (int k = 0; k < 3; ++k) {
          for (std::size_t g : by_edge[detail::edge_key(all[f][k], all[f][(k + 1) % 3])]) {
            if (shell[g] < 0) {
              shell[g] = shells;
              stack.push_back(g);
            }
          }
        }
      }
      ++shells;
    }
    std::vector<std::vector<Triangle>> parts(static_cast<std::size_t>(shells));
    for (std::size_t f = 0; f < all.size(); ++f) parts[static_cast<std::size_t>(shell[f])].push_back(all[f]);
    const std::vector<Vec3> verts(dt_.vertices().begin(), dt_.vertices().end());
    for (auto& part : parts) {
      if (signed_volume(verts, part) > 0.0) {
        s.triangles.insert(s.triangles.end(), part.begin(), part.end());
      } else {
        s.cavities_discarded = true;
      }
    }
    return s;
  }

  std::pair<double, Surface> search() const {
    if (critical_.empty()) throw Error(ErrorKind::reconstruction, "no finite Delaunay tetrahedra");
    // Coverage is monotone in alpha: bisect for the first enclosing value.
    std::size_t lo = 0, hi = critical_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (covers(solid(std::sqrt(critical_[mid])))) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    // Manifoldness is not monotone; step upward to the first valid value.
    // The full hull (last value) is convex and therefore always valid.
    for (std::size_t k = lo; k < critical_.size(); ++k) {
      const double alpha = std::sqrt(critical_[k]);
      Surface s = extract(solid(alpha));
      if (s.covers_all_points && s.manifold && !s.triangles.empty()) return {alpha, std::move(s)};
    }
    std::ostringstream msg;
    msg << "no alpha among " << critical_.size() << " critical values yields a closed manifold "
        << "enclosing all " << dt_.num_vertices() << " points";
    throw Error(ErrorKind::reconstruction, msg.str());
  }

  TriangleMesh to_mesh(const Surface& s, double alpha) const {
    TriangleMesh m;
    m.alpha_used = alpha;
    m.cavities_discarded = s.cavities_discarded;
    std::vector<std::uint32_t> remap(dt_.num_vertices(), UINT32_MAX);
    std::vector<std::uint32_t> used;
    for (const Triangle& t : s.triangles) {
      for (auto v : t) used.push_back(v);
    }
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    for (std::uint32_t v : used) {
      remap[v] = static_cast<std::uint32_t>(m.vertices.size());
      m.vertices.push_back(dt_.vertex(v));
    }
    m.triangles.reserve(s.triangles.size());
    for (const Triangle& t : s.triangles) m.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
    // Deterministic triangle order independent of tetrahedron slot reuse.
    for (Triangle& t : m.triangles) {
      std::rotate(t.begin(), std::min_element(t.begin(), t.end()), t.end());
    }
    std::sort(m.triangles.begin(), m.triangles.end());
    if (signed_volume(m.vertices, m.triangles) < 0.0) {
      for (Triangle& t : m.triangles) std::swap(t[1], t[2]);
    }
    return m;
  }

  Delaunay3 dt_;
  std::vector<std::size_t> tets_;
  std::vector<double> radius2_;
  std::vector<double> critical_;
};

/// Closed outward surface of the alpha shape of `points`.
inline TriangleMesh build_alpha_shape(std::span<const Vec3> points, const AlphaMode& mode) {
  return AlphaComplex(points).build(mode);
}

}  // namespace spinekit
