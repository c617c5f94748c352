#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "spinekit/alpha_shape.hpp"
#include "spinekit/error.hpp"
#include "spinekit/kdtree.hpp"
#include "spinekit/mesh.hpp"
#include "spinekit/segmentation.hpp"
#include "spinekit/volume.hpp"

namespace spinekit {

/// Sorted, unique vertex indices of one mesh.
struct FacingSet {
  std::vector<std::uint32_t> indices;

  bool empty() const { return indices.empty(); }
  std::size_t size() const { return indices.size(); }
};

struct FacingPair {
  FacingSet on_a;
  FacingSet on_b;
};

namespace detail {

inline FacingSet nn_image(const TriangleMesh& model, const TriangleMesh& queries, std::optional<double> cutoff) {
  const KdTree tree(model.vertices);
  std::vector<std::uint8_t> hit(model.vertices.size(), 0);
  const double limit2 = cutoff ? *cutoff * *cutoff : std::numeric_limits<double>::infinity();
  for (const Vec3& q : queries.vertices) {
    const Neighbor nb = tree.nearest(q);
    if (nb.squared_distance <= limit2) hit[nb.index] = 1;
  }
  FacingSet f;
  for (std::size_t i = 0; i < hit.size(); ++i) {
    if (hit[i]) f.indices.push_back(static_cast<std::uint32_t>(i));
  }
  return f;
}

}  // namespace detail

/// Nearest-neighbour images in each mesh of the other mesh's vertices.
/// An optional cutoff (mm) drops pairs farther apart; off by default.
inline FacingPair facing_vertices(const TriangleMesh& a, const TriangleMesh& b,
                                  std::optional<double> cutoff = std::nullopt) {
  if (a.vertices.empty() || b.vertices.empty()) {
    throw Error(ErrorKind::contract, "facing vertices need two non-empty meshes");
  }
  return {detail::nn_image(a, b, cutoff), detail::nn_image(b, a, cutoff)};
}

/// Keeps the facing vertices lying within t1 of the body centroid.
inline FacingSet filter_body(const FacingSet& f, const DistanceSamples& s, const Thresholds& t) {
  FacingSet out;
  for (std::uint32_t i : f.indices) {
    if (i >= s.values.size()) throw Error(ErrorKind::contract, "facing index outside the distance samples");
    if (s.values[i] < t.t1) out.indices.push_back(i);
  }
  return out;
}

struct InterspaceMesh {
  TriangleMesh mesh;
  int label_lo = 0;
  int label_hi = 0;
  double volume = 0.0;
  double area = 0.0;
  double centroid_distance = 0.0;
};

/// Alpha shape (automatic alpha) of the union of both facing clouds.
inline InterspaceMesh build_interspace(const TriangleMesh& a, const TriangleMesh& b, const FacingSet& fa,
                                       const FacingSet& fb, const Vec3& centroid_a, const Vec3& centroid_b) {
  std::vector<Vec3> cloud;
  cloud.reserve(fa.size() + fb.size());
  for (std::uint32_t i : fa.indices) cloud.push_back(a.vertices.at(i));
  for (std::uint32_t i : fb.indices) cloud.push_back(b.vertices.at(i));
  // The union is sorted so the result does not depend on argument order.
  std::sort(cloud.begin(), cloud.end(), [](const Vec3& p, const Vec3& q) {
    return std::tie(p.x, p.y, p.z) < std::tie(q.x, q.y, q.z);
  });
  InterspaceMesh out;
  out.label_lo = std::min(a.source_label, b.source_label);
  out.label_hi = std::max(a.source_label, b.source_label);
  out.centroid_distance = distance(centroid_a, centroid_b);
  try {
    out.mesh = build_alpha_shape(cloud, AlphaMode::automatic());
  } catch (const Error& e) {
    throw Error(ErrorKind::extraction, std::string("interspace cloud of ") + std::to_string(cloud.size()) +
                                           " points: " + e.what());
  }
  const MeshMetrics mm = mesh_metrics(out.mesh);
  if (!(mm.volume > 0.0)) throw Error(ErrorKind::extraction, "interspace surface encloses no volume");
  out.volume = mm.volume;
  out.area = mm.area;
  return out;
}

struct InterspaceHu {
  std::size_t voxel_count = 0;
  std::int64_t hu_sum = 0;
  std::optional<double> hu_mean;
  /// Vertebra-labelled voxels inside the surface, left out of the statistics.
  std::size_t excluded_vertebra_voxels = 0;
};

/// HU statistics over background voxels whose centroid lies inside the surface.
inline InterspaceHu interspace_hu(const LabeledVolume& v, const TriangleMesh& m) {
  InterspaceHu out;
  if (m.vertices.empty()) return out;
  const Box box = bounding_box(m.vertices);
  const Vec3& s = v.spacing();
  std::array<std::size_t, 3> lo{}, hi{};
  for (std::size_t a = 0; a < 3; ++a) {
    const double top = static_cast<double>(v.dims()[a]) - 1.0;
    lo[a] = static_cast<std::size_t>(std::clamp(std::ceil(box.lo[a] / s[a] - 0.5), 0.0, top));
    hi[a] = static_cast<std::size_t>(std::clamp(std::floor(box.hi[a] / s[a] - 0.5), 0.0, top));
  }
  for (std::size_t k = lo[2]; k <= hi[2]; ++k) {
    for (std::size_t j = lo[1]; j <= hi[1]; ++j) {
      for (std::size_t i = lo[0]; i <= hi[0]; ++i) {
        if (!point_in_mesh(m, v.voxel_center(i, j, k))) continue;
        const std::size_t lin = v.linear_index(i, j, k);
        if (v.label_at(lin) != 0) {
          ++out.excluded_vertebra_voxels;
          continue;
        }
        out.hu_sum += v.hu_at(lin);
        ++out.voxel_count;
      }
    }
  }
  if (out.voxel_count > 0) out.hu_mean = static_cast<double>(out.hu_sum) / static_cast<double>(out.voxel_count);
  return out;
}

}  // namespace spinekit
