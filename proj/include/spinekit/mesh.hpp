#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "spinekit/error.hpp"
#include "spinekit/predicates.hpp"
#include "spinekit/vec3.hpp"

namespace spinekit {

using Triangle = std::array<std::uint32_t, 3>;

/// Closed, outward-oriented triangle surface in mm.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  int source_label = 0;
  double alpha_used = 0.0;
  /// Interior boundary components (cavities) were dropped during extraction.
  bool cavities_discarded = false;
};

struct MeshMetrics {
  double area = 0.0;
  double volume = 0.0;
};

namespace detail {

inline std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
}

}  // namespace detail

/// Number of triangles using each undirected edge.
inline std::unordered_map<std::uint64_t, int> edge_use_counts(const std::vector<Triangle>& tris) {
  std::unordered_map<std::uint64_t, int> uses;
  uses.reserve(tris.size() * 2);
  for (const Triangle& t : tris) {
    for (int k = 0; k < 3; ++k) ++uses[detail::edge_key(t[k], t[(k + 1) % 3])];
  }
  return uses;
}

inline bool is_edge_manifold(const std::vector<Triangle>& tris) {
  if (tris.empty()) return false;
  for (const auto& [key, count] : edge_use_counts(tris)) {
    if (count != 2) return false;
  }
  return true;
}

/// Every edge shared by exactly two triangles and every vertex star a single
/// fan (no pinched vertices).
inline bool is_closed_manifold(const std::vector<Triangle>& tris) {
  if (!is_edge_manifold(tris)) return false;
  // Link of each vertex: edges opposite to it. In an edge-manifold mesh every
  // link vertex has degree two, so the link is a union of cycles; require one.
  std::unordered_map<std::uint32_t, std::vector<std::array<std::uint32_t, 2>>> links;
  for (const Triangle& t : tris) {
    for (int k = 0; k < 3; ++k) links[t[k]].push_back({t[(k + 1) % 3], t[(k + 2) % 3]});
  }
  for (auto& [v, link] : links) {
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> adj;
    for (auto [a, b] : link) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    std::vector<std::uint32_t> stack{link.front()[0]};
    std::unordered_map<std::uint32_t, bool> seen{{link.front()[0], true}};
    while (!stack.empty()) {
      const std::uint32_t u = stack.back();
      stack.pop_back();
      for (std::uint32_t w : adj[u]) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    if (seen.size() != adj.size()) return false;
  }
  return true;
}

/// Signed volume by the divergence theorem, sum of tetrahedra against the
/// first vertex (translation-stable reference point).
inline double signed_volume(const std::vector<Vec3>& vertices, const std::vector<Triangle>& tris) {
  if (tris.empty()) return 0.0;
  const Vec3 origin = vertices[tris.front()[0]];
  double six_v = 0.0;
  for (const Triangle& t : tris) {
    six_v += dot(vertices[t[0]] - origin, cross(vertices[t[1]] - origin, vertices[t[2]] - origin));
  }
  return six_v / 6.0;
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

inline MeshMetrics mesh_metrics(const TriangleMesh& m) {
  if (!is_edge_manifold(m.triangles)) {
    throw Error(ErrorKind::contract, "mesh_metrics requires a closed mesh");
  }
  MeshMetrics out;
  for (const Triangle& t : m.triangles) {
    out.area += triangle_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
  }
  out.volume = std::fabs(signed_volume(m.vertices, m.triangles));
  return out;
}

inline int euler_characteristic(const TriangleMesh& m) {
  std::vector<bool> used(m.vertices.size(), false);
  for (const Triangle& t : m.triangles) {
    for (auto v : t) used[v] = true;
  }
  const auto v = static_cast<int>(std::count(used.begin(), used.end(), true));
  const auto e = static_cast<int>(edge_use_counts(m.triangles).size());
  return v - e + static_cast<int>(m.triangles.size());
}

/// Axis-aligned bounding box of the mesh vertices.
struct Box {
  Vec3 lo;
  Vec3 hi;
  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }
  double volume() const { return (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z); }
};

inline Box bounding_box(const std::vector<Vec3>& pts) {
  Box b{pts.at(0), pts.at(0)};
  for (const Vec3& p : pts) {
    for (std::size_t a = 0; a < 3; ++a) {
      b.lo[a] = std::min(b.lo[a], p[a]);
      b.hi[a] = std::max(b.hi[a], p[a]);
    }
  }
  return b;
}

namespace detail {

// Query point q is perturbed to q + (e, e^2, e^3) and the ray cast along +x.
// Both tests below return the sign of the perturbed expression.

// Perturbed orientation of (a, b, q) projected onto the yz-plane.
inline int orient_yz_perturbed(const Vec3& a, const Vec3& b, const Vec3& q) {
  const int s = predicates::orient2d(a.y, a.z, b.y, b.z, q.y, q.z);
  if (s != 0) return s;
  // d/dq_y and d/dq_z of (b.y - a.y)(q.z - a.z) - (b.z - a.z)(q.y - a.y).
  if (a.z != b.z) return a.z > b.z ? 1 : -1;
  if (a.y != b.y) return b.y > a.y ? 1 : -1;
  return 0;
}

// Sign of orient3d(a, b, c, q + perturbation).
inline int orient_perturbed(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& q) {
  const int s = predicates::orient3d(a, b, c, q);
  if (s != 0) return s;
  // Gradient with respect to q is the normal (b - a) x (c - a); take its
  // components' exact signs in order x, y, z.
  const int nx = predicates::orient2d(a.y, a.z, b.y, b.z, c.y, c.z);
  if (nx != 0) return nx;
  const int ny = predicates::orient2d(a.z, a.x, b.z, b.x, c.z, c.x);
  if (ny != 0) return ny;
  return predicates::orient2d(a.x, a.y, b.x, b.y, c.x, c.y);
}

}  // namespace detail

/// Parity ray casting with symbolic perturbation: every query, including
/// points exactly on the surface, gets a deterministic inside/outside answer.
inline bool point_in_mesh(const TriangleMesh& m, const Vec3& q) {
  int crossings = 0;
  for (const Triangle& t : m.triangles) {
    const Vec3& a = m.vertices[t[0]];
    const Vec3& b = m.vertices[t[1]];
    const Vec3& c = m.vertices[t[2]];
    if (std::max({a.x, b.x, c.x}) < q.x) continue;
    if (std::min({a.y, b.y, c.y}) > q.y || std::max({a.y, b.y, c.y}) < q.y) continue;
    if (std::min({a.z, b.z, c.z}) > q.z || std::max({a.z, b.z, c.z}) < q.z) continue;
    const int nx = predicates::orient2d(a.y, a.z, b.y, b.z, c.y, c.z);
    if (nx == 0) continue;  // triangle parallel to the ray
    const int s1 = detail::orient_yz_perturbed(a, b, q);
    const int s2 = detail::orient_yz_perturbed(b, c, q);
    const int s3 = detail::orient_yz_perturbed(c, a, q);
    if (s1 != nx || s2 != nx || s3 != nx) continue;
    // Hit lies at x > q.x iff q is on the negative side of the normal's x.
    if (detail::orient_perturbed(a, b, c, q) != nx) ++crossings;
  }
  return (crossings % 2) == 1;
}

}  // namespace spinekit
