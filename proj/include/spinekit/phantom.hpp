#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "spinekit/error.hpp"
#include "spinekit/volume.hpp"

namespace spinekit {

// Synthetic volumes with closed-form ground truth. Shapes are centred on a
// voxel centroid and padded with at least two background voxels per side.

enum class Band { none, body, arch, process };

inline const char* to_string(Band b) {
  switch (b) {
    case Band::body: return "body";
    case Band::arch: return "arch";
    case Band::process: return "process";
    case Band::none: break;
  }
  return "none";
}

struct SphereShape {
  double radius = 10.0;
};

/// Body sphere, posterior half-torus arch in the z = centre plane, and two
/// lateral rods parallel to z at distance arch_distance + process_length.
struct CompoundShape {
  double body_radius = 15.0;
  double arch_radius = 3.0;
  double process_length = 15.0;
  std::optional<double> arch_distance;  // default body + 2 * arch_radius + 4 voxels
  /// Fractured-vertebra analogue: the body is crushed into an oblate
  /// spheroid with equatorial radius body * (1 + crush) and polar radius
  /// body * (1 - crush), spreading its surface into the arch band.
  double body_crush = 0.0;
};

/// Two coaxial z-aligned cylinders; the facing caps lie on voxel-centroid
/// planes so the labelled layers are exactly `gap` apart.
struct DiscPairShape {
  double disc_radius = 15.0;
  double thickness = 10.0;
  double gap = 4.0;
  std::optional<std::int16_t> hu_gap;
};

struct PhantomSpec {
  std::variant<SphereShape, CompoundShape, DiscPairShape> shape;
  Vec3 spacing{1.0, 1.0, 1.0};
  std::int16_t hu_inside = 100;
  std::int16_t hu_outside = 0;
  std::array<int, 2> labels{1, 2};
};

struct CompoundTruth {
  Vec3 center;
  double body_radius = 0.0;
  double body_crush = 0.0;
  double arch_distance = 0.0;
  double arch_radius = 0.0;
  double process_distance = 0.0;
  double process_length = 0.0;

  Band band_of(const Vec3& p) const {
    const Vec3 q = p - center;
    const double eq = body_radius * (1.0 + body_crush);
    const double pol = body_radius * (1.0 - body_crush);
    if ((q.x * q.x + q.y * q.y) / (eq * eq) + q.z * q.z / (pol * pol) <= 1.0) return Band::body;
    const double rho = std::hypot(q.x, q.y);
    if (q.y <= 0.0 && std::hypot(rho - arch_distance, q.z) <= arch_radius) return Band::arch;
    if (std::hypot(std::fabs(q.x) - process_distance, q.y) <= arch_radius &&
        std::fabs(q.z) <= 0.5 * process_length) {
      return Band::process;
    }
    return Band::none;
  }
};

struct Phantom {
  LabeledVolume volume;
  nlohmann::json truth;
  std::optional<CompoundTruth> compound;
};

namespace detail {

inline constexpr std::size_t kMarginVoxels = 2;

// Odd voxel count covering [-half, half] around the central voxel centroid.
inline std::size_t odd_extent(double half_mm, double spacing) {
  return 2 * (static_cast<std::size_t>(std::ceil(half_mm / spacing - 1e-9)) + kMarginVoxels) + 1;
}

inline void check_spacing(const Vec3& s) {
  if (!(s.x > 0.0 && s.y > 0.0 && s.z > 0.0)) throw Error(ErrorKind::phantom_spec, "spacing must be positive");
}

inline double max_spacing(const Vec3& s) { return std::max({s.x, s.y, s.z}); }

inline Vec3 to_voxel(const Vec3& mm, const Vec3& s) {
  return {mm.x / s.x - 0.5, mm.y / s.y - 0.5, mm.z / s.z - 0.5};
}

// Fill labels/HU from a membership predicate; verifies the margin.
template <typename Member>
std::pair<std::vector<std::int16_t>, std::vector<std::uint16_t>> rasterize(const Dims& dims, const Vec3& s,
                                                                         Member&& member) {
  const std::size_t n = dims[0] * dims[1] * dims[2];
  std::vector<std::int16_t> hu(n);
  std::vector<std::uint16_t> labels(n, 0);
  std::size_t idx = 0;
  for (std::size_t k = 0; k < dims[2]; ++k) {
    for (std::size_t j = 0; j < dims[1]; ++j) {
      for (std::size_t i = 0; i < dims[0]; ++i, ++idx) {
        const Vec3 p{(static_cast<double>(i) + 0.5) * s.x, (static_cast<double>(j) + 0.5) * s.y,
                     (static_cast<double>(k) + 0.5) * s.z};
        auto [label, value] = member(p);
        if (label != 0) {
          const VoxelIndex v{i, j, k};
          for (std::size_t a = 0; a < 3; ++a) {
            if (v[a] < kMarginVoxels || v[a] + kMarginVoxels >= dims[a]) {
              throw Error(ErrorKind::phantom_spec, "phantom shape does not fit inside the volume margin");
            }
          }
        }
        labels[idx] = static_cast<std::uint16_t>(label);
        hu[idx] = value;
      }
    }
  }
  return {std::move(hu), std::move(labels)};
}

inline Vec3 grid_center(const Dims& dims, const Vec3& s) {
  return {static_cast<double>(dims[0]) * s.x / 2.0, static_cast<double>(dims[1]) * s.y / 2.0,
          static_cast<double>(dims[2]) * s.z / 2.0};
}

}  // namespace detail

inline Phantom make_sphere_phantom(double radius, const Vec3& spacing, std::int16_t hu_in, std::int16_t hu_out,
                                   int label) {
  detail::check_spacing(spacing);
  if (!(radius > 0.0)) throw Error(ErrorKind::phantom_spec, "sphere radius must be positive");
  if (label < 1) throw Error(ErrorKind::phantom_spec, "label must be positive");
  const Dims dims{detail::odd_extent(radius, spacing.x), detail::odd_extent(radius, spacing.y),
                  detail::odd_extent(radius, spacing.z)};
  const Vec3 c = detail::grid_center(dims, spacing);
  const double r2 = radius * radius;
  auto [hu, labels] = detail::rasterize(dims, spacing, [&](const Vec3& p) {
    return squared_distance(p, c) <= r2 ? std::pair<int, std::int16_t>{label, hu_in}
                                        : std::pair<int, std::int16_t>{0, hu_out};
  });
  std::map<int, CentroidAnnotation> cents{
      {label, CentroidAnnotation::from_voxel(label, detail::to_voxel(c, spacing), spacing)}};
  Phantom ph{LabeledVolume(dims, spacing, std::move(hu), std::move(labels), std::move(cents)), {}, std::nullopt};
  ph.truth = {{"kind", "sphere"},
              {"radius_mm", radius},
              {"solid_volume_mm3", 4.0 / 3.0 * std::numbers::pi * radius * radius * radius},
              {"surface_area_mm2", 4.0 * std::numbers::pi * radius * radius}};
  return ph;
}

inline Phantom make_compound_vertebra(const CompoundShape& shape, const Vec3& spacing, std::int16_t hu_in,
                                      std::int16_t hu_out, int label) {
  detail::check_spacing(spacing);
  const double ms = detail::max_spacing(spacing);
  if (!(shape.body_radius > 0.0 && shape.arch_radius > 0.0)) {
    throw Error(ErrorKind::phantom_spec, "compound vertebra radii must be positive");
  }
  if (!(shape.process_length > 0.0)) throw Error(ErrorKind::phantom_spec, "process length must be positive");
  if (!(shape.body_crush >= 0.0 && shape.body_crush < 1.0)) {
    throw Error(ErrorKind::phantom_spec, "body crush must lie in [0, 1)");
  }
  if (!(shape.body_radius > shape.arch_radius)) {
    throw Error(ErrorKind::phantom_spec, "body radius must exceed arch radius");
  }
  if (label < 1) throw Error(ErrorKind::phantom_spec, "label must be positive");
  CompoundTruth t;
  t.body_radius = shape.body_radius;
  t.body_crush = shape.body_crush;
  t.arch_radius = shape.arch_radius;
  t.arch_distance = shape.arch_distance.value_or(shape.body_radius + 2.0 * shape.arch_radius + 4.0 * ms);
  t.process_length = shape.process_length;
  t.process_distance = t.arch_distance + shape.process_length;
  if (shape.body_crush == 0.0) {
    if (t.arch_distance - shape.body_radius < 3.0 * ms ||
        (t.arch_distance - t.arch_radius) - shape.body_radius < 3.0 * ms) {
      throw Error(ErrorKind::phantom_spec, "body and arch bands overlap");
    }
  }
  if ((t.process_distance - t.arch_radius) - (t.arch_distance + t.arch_radius) < 3.0 * ms) {
    throw Error(ErrorKind::phantom_spec, "arch and process bands overlap");
  }
  const double equator = shape.body_radius * (1.0 + shape.body_crush);
  const double half_x = std::max(t.process_distance + t.arch_radius, equator);
  const double half_y = std::max(t.arch_distance + t.arch_radius, equator);
  const double half_z = std::max({shape.body_radius, t.arch_radius, 0.5 * shape.process_length});
  const Dims dims{detail::odd_extent(half_x, spacing.x), detail::odd_extent(half_y, spacing.y),
                  detail::odd_extent(half_z, spacing.z)};
  t.center = detail::grid_center(dims, spacing);
  auto [hu, labels] = detail::rasterize(dims, spacing, [&](const Vec3& p) {
    return t.band_of(p) != Band::none ? std::pair<int, std::int16_t>{label, hu_in}
                                      : std::pair<int, std::int16_t>{0, hu_out};
  });
  std::map<int, CentroidAnnotation> cents{
      {label, CentroidAnnotation::from_voxel(label, detail::to_voxel(t.center, spacing), spacing)}};
  Phantom ph{LabeledVolume(dims, spacing, std::move(hu), std::move(labels), std::move(cents)), {}, t};
  ph.truth = {{"kind", "compound_vertebra"},
              {"body_radius_mm", t.body_radius},
              {"body_crush", t.body_crush},
              {"arch_distance_mm", t.arch_distance},
              {"arch_radius_mm", t.arch_radius},
              {"process_distance_mm", t.process_distance},
              {"process_length_mm", t.process_length}};
  return ph;
}

inline Phantom make_compound_vertebra(double body_radius, double arch_radius, double process_length,
                                      const Vec3& spacing, int label) {
  return make_compound_vertebra(CompoundShape{body_radius, arch_radius, process_length, std::nullopt, 0.0},
                                spacing, 100, 0, label);
}

inline Phantom make_disc_pair(const DiscPairShape& shape, const Vec3& spacing, std::int16_t hu_in,
                              std::int16_t hu_out, std::array<int, 2> labels) {
  detail::check_spacing(spacing);
  if (!(shape.disc_radius > 0.0 && shape.thickness > 0.0)) {
    throw Error(ErrorKind::phantom_spec, "disc radius and thickness must be positive");
  }
  if (!(shape.gap > 0.0)) throw Error(ErrorKind::phantom_spec, "disc gap must be positive");
  if (!(shape.gap > detail::max_spacing(spacing))) {
    throw Error(ErrorKind::phantom_spec, "disc gap must exceed the voxel spacing");
  }
  if (labels[0] < 1 || labels[1] < 1 || labels[0] == labels[1]) {
    throw Error(ErrorKind::phantom_spec, "disc pair needs two distinct positive labels");
  }
  const double sz = spacing.z;
  const std::size_t below = static_cast<std::size_t>(std::ceil(shape.thickness / sz - 1e-9)) + detail::kMarginVoxels;
  const std::size_t above =
      static_cast<std::size_t>(std::ceil((shape.gap + shape.thickness) / sz - 1e-9)) + detail::kMarginVoxels;
  const Dims dims{detail::odd_extent(shape.disc_radius, spacing.x), detail::odd_extent(shape.disc_radius, spacing.y),
                  below + 1 + above};
  Vec3 c = detail::grid_center(dims, spacing);
  c.z = (static_cast<double>(below) + 0.5) * sz;  // upper cap plane of the lower disc
  const double eps = 1e-9 * sz;
  const double r2 = shape.disc_radius * shape.disc_radius;
  const std::int16_t gap_hu = shape.hu_gap.value_or(hu_out);
  auto [hu, lab] = detail::rasterize(dims, spacing, [&](const Vec3& p) {
    const double radial2 = (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
    if (radial2 > r2) return std::pair<int, std::int16_t>{0, hu_out};
    const double dz = p.z - c.z;
    if (dz <= eps && dz >= -shape.thickness - eps) return std::pair<int, std::int16_t>{labels[0], hu_in};
    if (dz >= shape.gap - eps && dz <= shape.gap + shape.thickness + eps) {
      return std::pair<int, std::int16_t>{labels[1], hu_in};
    }
    if (dz > 0.0 && dz < shape.gap) return std::pair<int, std::int16_t>{0, gap_hu};
    return std::pair<int, std::int16_t>{0, hu_out};
  });
  const Vec3 ca{c.x, c.y, c.z - 0.5 * shape.thickness};
  const Vec3 cb{c.x, c.y, c.z + shape.gap + 0.5 * shape.thickness};
  std::map<int, CentroidAnnotation> cents{
      {labels[0], CentroidAnnotation::from_voxel(labels[0], detail::to_voxel(ca, spacing), spacing)},
      {labels[1], CentroidAnnotation::from_voxel(labels[1], detail::to_voxel(cb, spacing), spacing)}};
  Phantom ph{LabeledVolume(dims, spacing, std::move(hu), std::move(lab), std::move(cents)), {}, std::nullopt};
  ph.truth = {{"kind", "disc_pair"},
              {"disc_radius_mm", shape.disc_radius},
              {"gap_mm", shape.gap},
              {"gap_volume_mm3", std::numbers::pi * r2 * shape.gap},
              {"centroid_distance_mm", distance(ca, cb)}};
  return ph;
}

inline Phantom make_disc_pair(double disc_radius, double thickness, double gap, const Vec3& spacing,
                              std::array<int, 2> labels) {
  return make_disc_pair(DiscPairShape{disc_radius, thickness, gap, std::nullopt}, spacing, 100, 0, labels);
}

inline Phantom make_phantom(const PhantomSpec& spec) {
  return std::visit(
      [&](const auto& shape) -> Phantom {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, SphereShape>) {
          return make_sphere_phantom(shape.radius, spec.spacing, spec.hu_inside, spec.hu_outside, spec.labels[0]);
        } else if constexpr (std::is_same_v<T, CompoundShape>) {
          return make_compound_vertebra(shape, spec.spacing, spec.hu_inside, spec.hu_outside, spec.labels[0]);
        } else {
          return make_disc_pair(shape, spec.spacing, spec.hu_inside, spec.hu_outside, spec.labels);
        }
      },
      spec.shape);
}

/// Parse the JSON phantom description accepted by `spinekit phantom`.
inline PhantomSpec parse_phantom_spec(const nlohmann::json& j) {
  try {
    PhantomSpec spec;
    if (j.contains("spacing_mm")) {
      const auto s = j.at("spacing_mm").get<std::array<double, 3>>();
      spec.spacing = {s[0], s[1], s[2]};
    }
    spec.hu_inside = j.value("hu_inside", std::int16_t{100});
    spec.hu_outside = j.value("hu_outside", std::int16_t{0});
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "sphere") {
      spec.shape = SphereShape{j.at("radius_mm").get<double>()};
      spec.labels[0] = j.value("label", 1);
    } else if (kind == "compound_vertebra") {
      CompoundShape c;
      c.body_radius = j.at("body_radius_mm").get<double>();
      c.arch_radius = j.at("arch_radius_mm").get<double>();
      c.process_length = j.at("process_length_mm").get<double>();
      if (j.contains("arch_distance_mm")) c.arch_distance = j.at("arch_distance_mm").get<double>();
      c.body_crush = j.value("body_crush", 0.0);
      spec.shape = c;
      spec.labels[0] = j.value("label", 1);
    } else if (kind == "disc_pair") {
      DiscPairShape d;
      d.disc_radius = j.at("disc_radius_mm").get<double>();
      d.thickness = j.at("thickness_mm").get<double>();
      d.gap = j.at("gap_mm").get<double>();
      if (j.contains("hu_gap")) d.hu_gap = j.at("hu_gap").get<std::int16_t>();
      spec.shape = d;
      spec.labels = j.value("labels", std::array<int, 2>{1, 2});
    } else {
      throw Error(ErrorKind::phantom_spec, "unknown phantom kind '" + kind + "'");
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::phantom_spec, std::string("phantom spec: ") + e.what());
  }
}

}  // namespace spinekit
