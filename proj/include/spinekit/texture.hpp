#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spinekit/error.hpp"
#include "spinekit/kde.hpp"
#include "spinekit/mesh.hpp"
#include "spinekit/parallel.hpp"
#include "spinekit/segmentation.hpp"
#include "spinekit/volume.hpp"

namespace spinekit {

enum class MappingCriterion { internal, euclidean, external };

inline const char* to_string(MappingCriterion c) {
  switch (c) {
    case MappingCriterion::internal: return "internal";
    case MappingCriterion::euclidean: return "euclidean";
    case MappingCriterion::external: return "external";
  }
  return "?";
}

/// Short column suffix used in tables.
inline const char* short_name(MappingCriterion c) {
  switch (c) {
    case MappingCriterion::internal: return "int";
    case MappingCriterion::euclidean: return "euc";
    case MappingCriterion::external: return "ext";
  }
  return "?";
}

inline MappingCriterion parse_criterion(const std::string& s) {
  if (s == "internal" || s == "int") return MappingCriterion::internal;
  if (s == "euclidean" || s == "euc") return MappingCriterion::euclidean;
  if (s == "external" || s == "ext") return MappingCriterion::external;
  throw Error(ErrorKind::parse, "unknown mapping criterion '" + s + "'");
}

struct VertexTexture {
  MappingCriterion criterion = MappingCriterion::euclidean;
  std::vector<std::int16_t> hu;
  std::vector<VoxelIndex> source_voxel;
  std::vector<double> source_distance;  // mm, vertex to chosen voxel centroid
};

namespace detail {

inline bool voxel_admitted(std::uint16_t voxel_label, int label, MappingCriterion c) {
  switch (c) {
    case MappingCriterion::internal: return voxel_label == label;
    case MappingCriterion::euclidean: return true;
    case MappingCriterion::external: return voxel_label != label;
  }
  return false;
}

struct NearestVoxel {
  std::size_t linear = 0;
  double squared_distance = std::numeric_limits<double>::infinity();
};

// Exact nearest admitted voxel by expanding Chebyshev shells around the
// voxel containing p. The grid itself is the spatial index. Search stops
// once no voxel in the next shell can be as close as the best so far, so
// equal-distance candidates are all seen and the lowest index wins.
inline NearestVoxel nearest_voxel(const LabeledVolume& v, const Vec3& p, int label, MappingCriterion c) {
  const auto& dims = v.dims();
  const Vec3& s = v.spacing();
  std::array<long long, 3> home{};
  std::array<double, 3> off{};
  for (std::size_t a = 0; a < 3; ++a) {
    const auto n = static_cast<long long>(dims[a]);
    home[a] = std::clamp(static_cast<long long>(std::floor(p[a] / s[a])), 0LL, n - 1);
    off[a] = std::abs(p[a] - (static_cast<double>(home[a]) + 0.5) * s[a]);
  }
  long long max_r = 0;
  for (std::size_t a = 0; a < 3; ++a) {
    max_r = std::max({max_r, home[a], static_cast<long long>(dims[a]) - 1 - home[a]});
  }
  NearestVoxel best;
  const auto& labels = v.labels();
  auto visit = [&](long long i, long long j, long long k) {
    const std::size_t lin =
        v.linear_index(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k));
    if (!voxel_admitted(labels[lin], label, c)) return;
    const double d2 = squared_distance(p, v.voxel_center(lin));
    if (d2 < best.squared_distance || (d2 == best.squared_distance && lin < best.linear)) {
      best = {lin, d2};
    }
  };
  for (long long r = 0; r <= max_r; ++r) {
    if (r > 0 && std::isfinite(best.squared_distance)) {
      double bound = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < 3; ++a) bound = std::min(bound, static_cast<double>(r) * s[a] - off[a]);
      if (bound > 0.0 && bound * bound > best.squared_distance) break;
    }
    const long long k0 = std::max(0LL, home[2] - r), k1 = std::min<long long>(dims[2] - 1, home[2] + r);
    const long long j0 = std::max(0LL, home[1] - r), j1 = std::min<long long>(dims[1] - 1, home[1] + r);
    const long long i0 = std::max(0LL, home[0] - r), i1 = std::min<long long>(dims[0] - 1, home[0] + r);
    for (long long k = k0; k <= k1; ++k) {
      const bool k_face = std::llabs(k - home[2]) == r;
      for (long long j = j0; j <= j1; ++j) {
        const bool j_face = std::llabs(j - home[1]) == r;
        if (k_face || j_face) {
          for (long long i = i0; i <= i1; ++i) visit(i, j, k);
        } else {
          if (home[0] - r >= 0) visit(home[0] - r, j, k);
          if (r > 0 && home[0] + r < static_cast<long long>(dims[0])) visit(home[0] + r, j, k);
        }
      }
    }
  }
  return best;
}

}  // namespace detail

/// Grey level of the nearest admitted voxel for every mesh vertex.
/// Internal admits voxels carrying `label`, External the others, Euclidean all.
inline VertexTexture map_grey(const TriangleMesh& m, const LabeledVolume& v, int label, MappingCriterion c,
                              unsigned workers = 0) {
  bool any = false;
  for (std::uint16_t l : v.labels()) {
    if (detail::voxel_admitted(l, label, c)) {
      any = true;
      break;
    }
  }
  if (!any) {
    throw Error(ErrorKind::mapping, std::string("no candidate voxels for ") + to_string(c) + " mapping of label " +
                                        std::to_string(label));
  }
  VertexTexture t;
  t.criterion = c;
  t.hu.resize(m.vertices.size());
  t.source_voxel.resize(m.vertices.size());
  t.source_distance.resize(m.vertices.size());
  parallel_for(m.vertices.size(), [&](std::size_t i) {
    const auto nv = detail::nearest_voxel(v, m.vertices[i], label, c);
    t.hu[i] = v.hu_at(nv.linear);
    t.source_voxel[i] = v.voxel_index(nv.linear);
    t.source_distance[i] = std::sqrt(nv.squared_distance);
  }, workers);
  return t;
}

struct RegionHuSummary {
  std::array<std::optional<double>, 3> mean;  // body, arch, process
  std::array<std::size_t, 3> count{0, 0, 0};
  Thresholds thresholds;

  const std::optional<double>& of(Region r) const { return mean[static_cast<std::size_t>(r)]; }
};

/// Mean vertex HU per region; empty regions stay absent.
inline RegionHuSummary region_mean_hu(const VertexTexture& t, const RegionLabeling& r, const Thresholds& th) {
  if (t.hu.size() != r.regions.size()) {
    throw Error(ErrorKind::contract, "texture and region labeling have different vertex counts");
  }
  RegionHuSummary s;
  s.thresholds = th;
  std::array<double, 3> sum{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < t.hu.size(); ++i) {
    const auto k = static_cast<std::size_t>(r.regions[i]);
    sum[k] += t.hu[i];
    ++s.count[k];
  }
  for (std::size_t k = 0; k < 3; ++k) {
    if (s.count[k] > 0) s.mean[k] = sum[k] / static_cast<double>(s.count[k]);
  }
  return s;
}

}  // namespace spinekit
