#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "spinekit/error.hpp"
#include "spinekit/mesh.hpp"
#include "spinekit/volume.hpp"

namespace spinekit {

struct RoiStats {
  double radius = 0.0;
  std::size_t voxel_count = 0;
  double hu_mean = 0.0;
  std::int64_t hu_sum = 0;
};

/// Largest k * voxel_diag strictly below the nearest mesh vertex distance,
/// i.e. the sphere grown in diagonal steps until it would touch the surface.
inline double max_inscribed_radius(const TriangleMesh& m, const Vec3& centroid, double voxel_diag) {
  if (!(voxel_diag > 0.0)) throw Error(ErrorKind::contract, "voxel diagonal must be positive");
  if (m.vertices.empty()) throw Error(ErrorKind::contract, "inscribed radius of an empty mesh");
  if (!m.triangles.empty() && !point_in_mesh(m, centroid)) {
    throw Error(ErrorKind::roi_too_small, "centroid is not inside the vertebra surface");
  }
  double dmin = std::numeric_limits<double>::infinity();
  for (const Vec3& p : m.vertices) dmin = std::min(dmin, distance(p, centroid));
  auto k = static_cast<long long>(std::floor(dmin / voxel_diag));
  while (k > 0 && static_cast<double>(k) * voxel_diag >= dmin) --k;
  if (k < 1) {
    std::ostringstream msg;
    msg << "nearest surface vertex is " << dmin << " mm from the centroid, less than one voxel diagonal ("
        << voxel_diag << " mm)";
    throw Error(ErrorKind::roi_too_small, msg.str());
  }
  return static_cast<double>(k) * voxel_diag;
}

inline double max_inscribed_radius(const TriangleMesh& m, const CentroidAnnotation& c, double voxel_diag) {
  return max_inscribed_radius(m, c.mm_pos, voxel_diag);
}

/// HU sum and mean over voxels whose centroid lies in the closed ball (c, r).
inline RoiStats roi_stats(const LabeledVolume& v, const Vec3& c, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::contract, "ROI radius must be positive");
  const auto& dims = v.dims();
  const Vec3& s = v.spacing();
  std::array<std::size_t, 3> lo{}, hi{};
  for (std::size_t a = 0; a < 3; ++a) {
    // centre (i + 0.5) s within [c - r, c + r]
    const double first = std::ceil((c[a] - r) / s[a] - 0.5);
    const double last = std::floor((c[a] + r) / s[a] - 0.5);
    const double top = static_cast<double>(dims[a]) - 1.0;
    lo[a] = static_cast<std::size_t>(std::clamp(first, 0.0, top));
    hi[a] = static_cast<std::size_t>(std::clamp(last, 0.0, top));
  }
  RoiStats out;
  out.radius = r;
  const double r2 = r * r;
  for (std::size_t k = lo[2]; k <= hi[2]; ++k) {
    for (std::size_t j = lo[1]; j <= hi[1]; ++j) {
      for (std::size_t i = lo[0]; i <= hi[0]; ++i) {
        if (squared_distance(v.voxel_center(i, j, k), c) > r2) continue;
        out.hu_sum += v.hu_at(v.linear_index(i, j, k));
        ++out.voxel_count;
      }
    }
  }
  if (out.voxel_count == 0) throw Error(ErrorKind::contract, "ROI sphere contains no voxel centroid");
  out.hu_mean = static_cast<double>(out.hu_sum) / static_cast<double>(out.voxel_count);
  return out;
}

inline RoiStats roi_stats(const LabeledVolume& v, const CentroidAnnotation& c, double r) {
  return roi_stats(v, c.mm_pos, r);
}

}  // namespace spinekit
