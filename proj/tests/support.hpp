#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "spinekit/spinekit.hpp"

namespace spinekit::test {

// Lowest-index exact nearest neighbour by full scan.
inline std::size_t brute_nearest(std::span<const Vec3> pts, const Vec3& q) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = squared_distance(pts[i], q);
    if (d < bd) bd = d, best = i;
  }
  return best;
}

inline std::vector<Vec3> random_cloud(std::size_t n, std::uint32_t seed, double extent = 100.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

struct BuiltVertebra {
  Phantom phantom;
  PointCloud cloud;
  TriangleMesh mesh;
};

inline BuiltVertebra build(Phantom ph, int label = 1) {
  BuiltVertebra b{std::move(ph), {}, {}};
  b.cloud = extract_label_points(b.phantom.volume, label);
  b.mesh = build_alpha_shape(b.cloud.points, AlphaMode::automatic());
  b.mesh.source_label = label;
  return b;
}

inline const BuiltVertebra& sphere10() {
  static const BuiltVertebra b = build(make_sphere_phantom(10.0, {1, 1, 1}, 100, 0, 1));
  return b;
}

inline const BuiltVertebra& compound() {
  static const BuiltVertebra b = build(make_compound_vertebra(15.0, 3.0, 15.0, {1, 1, 1}, 1));
  return b;
}

inline KdeSettings voxel_kde(const Vec3& spacing) {
  KdeSettings k;
  k.min_bandwidth = std::max({spacing.x, spacing.y, spacing.z});
  return k;
}

// Exact integer orientation and insphere determinants.
using i128 = __int128;

inline int sign(i128 v) { return (v > 0) - (v < 0); }

inline i128 det3(i128 a, i128 b, i128 c, i128 d, i128 e, i128 f, i128 g, i128 h, i128 i) {
  return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

struct IPoint {
  std::int64_t x, y, z;
};

inline int exact_orient3d(IPoint a, IPoint b, IPoint c, IPoint d) {
  return sign(det3(b.x - a.x, b.y - a.y, b.z - a.z, c.x - a.x, c.y - a.y, c.z - a.z, d.x - a.x, d.y - a.y,
                   d.z - a.z));
}

// Positive when e is inside the sphere through a, b, c, d (positively oriented).
inline int exact_insphere(IPoint a, IPoint b, IPoint c, IPoint d, IPoint e) {
  const IPoint p[4] = {a, b, c, d};
  i128 m[4][4];
  for (int r = 0; r < 4; ++r) {
    const i128 x = p[r].x - e.x, y = p[r].y - e.y, z = p[r].z - e.z;
    m[r][0] = x;
    m[r][1] = y;
    m[r][2] = z;
    m[r][3] = x * x + y * y + z * z;
  }
  i128 det = 0;
  for (int c = 0; c < 4; ++c) {
    i128 minor[9];
    int k = 0;
    for (int r = 1; r < 4; ++r) {
      for (int cc = 0; cc < 4; ++cc) {
        if (cc != c) minor[k++] = m[r][cc];
      }
    }
    const i128 d3 = det3(minor[0], minor[1], minor[2], minor[3], minor[4], minor[5], minor[6], minor[7], minor[8]);
    det += (c % 2 == 0 ? 1 : -1) * m[0][c] * d3;
  }
  // det[a-e; b-e; c-e; d-e | lift] is negative for e inside when orient(a,b,c,d) > 0
  // under the det[b-a, c-a, d-a] orientation convention.
  return -sign(det);
}

inline Vec3 to_vec(IPoint p, double offset = 0.0) {
  return {static_cast<double>(p.x) + offset, static_cast<double>(p.y) + offset, static_cast<double>(p.z) + offset};
}

}  // namespace spinekit::test
