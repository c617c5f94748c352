#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "spinekit/error.hpp"
#include "spinekit/predicates.hpp"
#include "spinekit/vec3.hpp"

namespace spinekit {

/// Delaunay tetrahedralization of a 3D point set.
///
/// Incremental Bowyer-Watson insertion inside a far enclosing tetrahedron.
/// Exact predicates plus symbolic perturbation of the lifted coordinate make
/// the result a deterministic, well-defined triangulation even for grid
/// samples where every voxel's eight centroids are cospherical. Tetrahedra
/// are stored positively oriented; neighbour i is across the face opposite
/// vertex i.
class Delaunay3 {
 public:
  static constexpr std::int32_t kNone = -1;

  struct Tet {
    std::array<std::uint32_t, 4> v{};
    std::array<std::int32_t, 4> n{kNone, kNone, kNone, kNone};
  };

  /// Duplicate input points are merged; input_to_vertex() maps them.
  explicit Delaunay3(std::span<const Vec3> input) {
    if (input.empty()) throw Error(ErrorKind::reconstruction, "Delaunay over an empty point set");
    dedupe(input);
    insert_super_tet();
    std::uint32_t hint = 0;
    for (std::uint32_t i = 0; i < num_vertices_; ++i) hint = insert(i, hint);
  }

  std::size_t num_vertices() const { return num_vertices_; }
  const Vec3& vertex(std::uint32_t i) const { return points_[i]; }
  std::span<const Vec3> vertices() const { return {points_.data(), num_vertices_}; }
  std::uint32_t input_to_vertex(std::size_t input_index) const { return input_map_[input_index]; }

  std::size_t tet_capacity() const { return tets_.size(); }
  bool alive(std::size_t t) const { return alive_[t] != 0; }
  const Tet& tet(std::size_t t) const { return tets_[t]; }

  /// Alive tetrahedron with all four vertices from the input.
  bool finite(std::size_t t) const {
    if (!alive(t)) return false;
    for (std::uint32_t v : tets_[t].v) {
      if (v >= num_vertices_) return false;
    }
    return true;
  }

  std::vector<std::size_t> finite_tets() const {
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < tets_.size(); ++t) {
      if (finite(t)) out.push_back(t);
    }
    return out;
  }

 private:
  void dedupe(std::span<const Vec3> input) {
    std::vector<std::size_t> order(input.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto key = [&](std::size_t i) { return std::array<double, 3>{input[i].x, input[i].y, input[i].z}; };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    input_map_.assign(input.size(), 0);
    // Keep first occurrences in input order so insertion stays spatially coherent.
    std::vector<std::size_t> canonical(input.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      const bool dup = k > 0 && input[order[k]] == input[order[k - 1]];
      canonical[order[k]] = dup ? canonical[order[k - 1]] : order[k];
    }
    std::vector<std::uint32_t> vertex_of(input.size(), 0);
    for (std::size_t i = 0; i < input.size(); ++i) {
      if (canonical[i] == i) {
        vertex_of[i] = static_cast<std::uint32_t>(points_.size());
        points_.push_back(input[i]);
      }
      input_map_[i] = vertex_of[canonical[i]];
    }
    num_vertices_ = static_cast<std::uint32_t>(points_.size());
  }

  void insert_super_tet() {
    Vec3 lo = points_[0], hi = points_[0];
    for (const Vec3& p : points_) {
      for (std::size_t a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    }
    const Vec3 c = (lo + hi) * 0.5;
    const double extent = std::max(1.0, norm(hi - lo));
    const double m = 1.0e4 * extent;
    points_.push_back(c + Vec3{m, m, m});
    points_.push_back(c + Vec3{m, -m, -m});
    points_.push_back(c + Vec3{-m, m, -m});
    points_.push_back(c + Vec3{-m, -m, m});
    Tet t;
    t.v = {num_vertices_, num_vertices_ + 1, num_vertices_ + 2, num_vertices_ + 3};
    if (orient(t.v) < 0) std::swap(t.v[0], t.v[1]);
    tets_.push_back(t);
    alive_.push_back(1);
    mark_.push_back(0);
  }

  int orient(const std::array<std::uint32_t, 4>& v) const {
    return predicates::orient3d(points_[v[0]], points_[v[1]], points_[v[2]], points_[v[3]]);
  }

  bool conflict(std::size_t t, std::uint32_t p) const {
    const auto& v = tets_[t].v;
    return predicates::insphere_sos(
               {points_[v[0]], points_[v[1]], points_[v[2]], points_[v[3]], points_[p]},
               {v[0], v[1], v[2], v[3], p}) > 0;
  }

  std::size_t locate(std::uint32_t p, std::size_t start) {
    std::size_t t = alive(start) ? start : last_alive();
    const std::size_t limit = 64 + 4 * tets_.size();
    for (std::size_t step = 0; step < limit; ++step) {
      rng_ = rng_ * 6364136223846793005ULL + 1442695040888963407ULL;
      const int offset = static_cast<int>((rng_ >> 33) & 3U);
      bool moved = false;
      for (int k = 0; k < 4; ++k) {
        const int i = (k + offset) & 3;
        auto v = tets_[t].v;
        v[static_cast<std::size_t>(i)] = p;
        if (orient(v) < 0) {
          const std::int32_t next = tets_[t].n[static_cast<std::size_t>(i)];
          if (next == kNone) break;
          t = static_cast<std::size_t>(next);
          moved = true;
          break;
        }
      }
      if (!moved) return t;
    }
    // Walk failed to converge; fall back to a scan.
    for (std::size_t s = 0; s < tets_.size(); ++s) {
      if (alive(s) && conflict(s, p)) return s;
    }
    throw Error(ErrorKind::reconstruction, "Delaunay point location failed");
  }

  std::size_t last_alive() const {
    for (std::size_t t = tets_.size(); t-- > 0;) {
      if (alive(t)) return t;
    }
    return 0;
  }

  std::size_t allocate() {
    if (!free_.empty()) {
      const std::size_t t = free_.back();
      free_.pop_back();
      alive_[t] = 1;
      tets_[t] = Tet{};
      return t;
    }
    tets_.emplace_back();
    alive_.push_back(1);
    mark_.push_back(0);
    return tets_.size() - 1;
  }

  std::uint32_t insert(std::uint32_t p, std::uint32_t hint) {
    const std::size_t start = locate(p, hint);
    if (!conflict(start, p)) throw Error(ErrorKind::reconstruction, "located tetrahedron not in conflict");

    ++stamp_;
    cavity_.clear();
    boundary_.clear();
    cavity_.push_back(start);
    mark_[start] = stamp_;
    for (std::size_t k = 0; k < cavity_.size(); ++k) {
      const std::size_t t = cavity_[k];
      for (std::size_t i = 0; i < 4; ++i) {
        const std::int32_t nb = tets_[t].n[i];
        if (nb != kNone && mark_[static_cast<std::size_t>(nb)] == stamp_) continue;
        if (nb != kNone && conflict(static_cast<std::size_t>(nb), p)) {
          mark_[static_cast<std::size_t>(nb)] = stamp_;
          cavity_.push_back(static_cast<std::size_t>(nb));
        } else {
          boundary_.push_back({t, i});
        }
      }
    }

    struct Face {
      Tet outer_tet;
      std::size_t slot;
      std::int32_t outside;
      std::size_t cavity_tet;
    };
    std::vector<Face> faces;
    faces.reserve(boundary_.size());
    for (auto [t, i] : boundary_) faces.push_back({tets_[t], i, tets_[t].n[i], t});

    for (std::size_t t : cavity_) alive_[t] = 0;

    edge_link_.clear();
    std::uint32_t last = 0;
    for (const Face& f : faces) {
      const std::size_t nt = allocate();
      Tet& tet = tets_[nt];
      tet.v = f.outer_tet.v;
      tet.v[f.slot] = p;
      tet.n[f.slot] = f.outside;
      if (f.outside != kNone) {
        Tet& other = tets_[static_cast<std::size_t>(f.outside)];
        for (auto& back : other.n) {
          if (back == static_cast<std::int32_t>(f.cavity_tet)) {
            back = static_cast<std::int32_t>(nt);
            break;
          }
        }
      }
      for (std::size_t j = 0; j < 4; ++j) {
        if (j == f.slot) continue;
        std::array<std::uint32_t, 2> e{};
        std::size_t k = 0;
        for (std::size_t m = 0; m < 4; ++m) {
          if (m != j && m != f.slot) e[k++] = tet.v[m];
        }
        const std::uint64_t key = (static_cast<std::uint64_t>(std::min(e[0], e[1])) << 32) |
                                  std::max(e[0], e[1]);
        auto [it, inserted] = edge_link_.try_emplace(key, nt, j);
        if (!inserted) {
          tets_[nt].n[j] = static_cast<std::int32_t>(it->second.first);
          tets_[it->second.first].n[it->second.second] = static_cast<std::int32_t>(nt);
        }
      }
      last = static_cast<std::uint32_t>(nt);
    }
    // Recycle only after every back pointer into the cavity is rewritten.
    free_.insert(free_.end(), cavity_.begin(), cavity_.end());
    return last;
  }

  std::vector<Vec3> points_;
  std::uint32_t num_vertices_ = 0;
  std::vector<std::uint32_t> input_map_;
  std::vector<Tet> tets_;
  std::vector<std::uint8_t> alive_;
  std::vector<std::uint32_t> mark_;
  std::vector<std::size_t> free_;
  std::uint32_t stamp_ = 0;
  std::uint64_t rng_ = 0x9E3779B97F4A7C15ULL;
  std::vector<std::size_t> cavity_;
  std::vector<std::pair<std::size_t, std::size_t>> boundary_;
  std::unordered_map<std::uint64_t, std::pair<std::size_t, std::size_t>> edge_link_;
};

}  // namespace spinekit
