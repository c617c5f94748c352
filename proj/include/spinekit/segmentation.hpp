#pragma once

#include <array>
#include <vector>

#include "spinekit/kde.hpp"
#include "spinekit/mesh.hpp"
#include "spinekit/volume.hpp"

namespace spinekit {

enum class Region { body = 0, arch = 1, process = 2 };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::body: return "body";
    case Region::arch: return "arch";
    case Region::process: return "process";
  }
  return "?";
}

struct DistanceSamples {
  std::vector<double> values;  // one per mesh vertex
  Vec3 centroid;
  bool centroid_outside_bbox = false;
};

/// Euclidean distance of every mesh vertex from the vertebral body centroid.
/// A centroid outside the mesh bounding box is flagged, not rejected.
inline DistanceSamples distance_distribution(const TriangleMesh& m, const Vec3& centroid_mm) {
  if (m.vertices.empty()) throw Error(ErrorKind::contract, "distance distribution of an empty mesh");
  DistanceSamples s;
  s.centroid = centroid_mm;
  s.centroid_outside_bbox = !bounding_box(m.vertices).contains(centroid_mm);
  s.values.reserve(m.vertices.size());
  for (const Vec3& p : m.vertices) s.values.push_back(distance(p, centroid_mm));
  return s;
}

inline DistanceSamples distance_distribution(const TriangleMesh& m, const CentroidAnnotation& c) {
  return distance_distribution(m, c.mm_pos);
}

inline DensityCurve estimate_density(const DistanceSamples& s, const KdeSettings& settings = {}) {
  return estimate_density(s.values, settings);
}

/// d < t1 -> body, t1 <= d < t2 -> arch, d >= t2 -> process.
inline Region classify_distance(double d, const Thresholds& t) {
  if (d < t.t1) return Region::body;
  if (d < t.t2) return Region::arch;
  return Region::process;
}

struct RegionLabeling {
  std::vector<Region> regions;

  std::array<std::size_t, 3> counts() const {
    std::array<std::size_t, 3> c{0, 0, 0};
    for (Region r : regions) ++c[static_cast<std::size_t>(r)];
    return c;
  }
};

inline RegionLabeling classify_vertices(const DistanceSamples& s, const Thresholds& t) {
  if (!(t.t1 > 0.0 && t.t1 < t.t2)) throw Error(ErrorKind::contract, "thresholds must satisfy 0 < t1 < t2");
  RegionLabeling out;
  out.regions.reserve(s.values.size());
  for (double d : s.values) out.regions.push_back(classify_distance(d, t));
  return out;
}

}  // namespace spinekit
