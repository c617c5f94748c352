#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinekit/error.hpp"
#include "spinekit/vec3.hpp"

namespace spinekit {

using Dims = std::array<std::size_t, 3>;
using VoxelIndex = std::array<std::size_t, 3>;

/// Expert-annotated vertebral body centre. voxel_pos is a continuous voxel
/// index in which integer values address voxel centres, so the mm position
/// is (voxel_pos + 0.5) * spacing under the corner-origin convention.
struct CentroidAnnotation {
  int label = 0;
  Vec3 voxel_pos;
  Vec3 mm_pos;

  static CentroidAnnotation from_voxel(int label, const Vec3& voxel, const Vec3& spacing) {
    return {label, voxel, hadamard(voxel + Vec3{0.5, 0.5, 0.5}, spacing)};
  }
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<std::size_t> voxels;  // linear voxel index of each point
};

/// Dense CT grid with HU values, vertebra labels and centroid annotations.
/// Immutable once constructed.
class LabeledVolume {
 public:
  LabeledVolume(Dims dims, Vec3 spacing, std::vector<std::int16_t> hu, std::vector<std::uint16_t> labels,
                std::map<int, CentroidAnnotation> centroids = {})
      : dims_(dims), spacing_(spacing), hu_(std::move(hu)), labels_(std::move(labels)),
        centroids_(std::move(centroids)) {
    for (std::size_t a = 0; a < 3; ++a) {
      if (dims_[a] == 0) throw Error(ErrorKind::parse, "volume dims must be positive");
      if (!(spacing_[a] > 0.0)) throw Error(ErrorKind::parse, "volume spacing must be positive");
    }
    const std::size_t n = voxel_count();
    if (hu_.size() != n || labels_.size() != n) {
      throw Error(ErrorKind::size_mismatch, "HU/label buffers do not match " + std::to_string(dims_[0]) + "x" +
                                                std::to_string(dims_[1]) + "x" + std::to_string(dims_[2]));
    }
    for (const auto& [label, c] : centroids_) {
      for (std::size_t a = 0; a < 3; ++a) {
        if (!(c.voxel_pos[a] >= -0.5 && c.voxel_pos[a] <= static_cast<double>(dims_[a]) - 0.5)) {
          throw Error(ErrorKind::parse, "centroid of label " + std::to_string(label) + " lies outside the volume");
        }
      }
    }
  }

  const Dims& dims() const { return dims_; }
  const Vec3& spacing() const { return spacing_; }
  const std::vector<std::int16_t>& hu() const { return hu_; }
  const std::vector<std::uint16_t>& labels() const { return labels_; }
  const std::map<int, CentroidAnnotation>& centroids() const { return centroids_; }

  std::size_t voxel_count() const { return dims_[0] * dims_[1] * dims_[2]; }
  double voxel_volume() const { return spacing_.x * spacing_.y * spacing_.z; }
  double voxel_diagonal() const { return norm(spacing_); }

  std::size_t linear_index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + dims_[0] * (j + dims_[1] * k);
  }
  VoxelIndex voxel_index(std::size_t linear) const {
    return {linear % dims_[0], (linear / dims_[0]) % dims_[1], linear / (dims_[0] * dims_[1])};
  }
  Vec3 voxel_center(std::size_t i, std::size_t j, std::size_t k) const {
    return {(static_cast<double>(i) + 0.5) * spacing_.x, (static_cast<double>(j) + 0.5) * spacing_.y,
            (static_cast<double>(k) + 0.5) * spacing_.z};
  }
  Vec3 voxel_center(std::size_t linear) const {
    const auto v = voxel_index(linear);
    return voxel_center(v[0], v[1], v[2]);
  }

  std::int16_t hu_at(std::size_t linear) const { return hu_[linear]; }
  std::uint16_t label_at(std::size_t linear) const { return labels_[linear]; }

  const CentroidAnnotation* centroid(int label) const {
    auto it = centroids_.find(label);
    return it == centroids_.end() ? nullptr : &it->second;
  }

  /// Distinct nonzero labels with their voxel counts, ascending by label.
  std::map<int, std::size_t> label_counts() const {
    std::map<int, std::size_t> counts;
    for (std::uint16_t l : labels_) {
      if (l != 0) ++counts[l];
    }
    return counts;
  }

 private:
  Dims dims_;
  Vec3 spacing_;
  std::vector<std::int16_t> hu_;
  std::vector<std::uint16_t> labels_;
  std::map<int, CentroidAnnotation> centroids_;
};

struct AnnotationIssues {
  std::vector<int> labels_without_centroid;
  std::vector<int> centroids_without_voxels;
};

inline AnnotationIssues annotation_issues(const LabeledVolume& v) {
  AnnotationIssues issues;
  const auto counts = v.label_counts();
  for (const auto& [label, n] : counts) {
    if (!v.centroid(label)) issues.labels_without_centroid.push_back(label);
  }
  for (const auto& [label, c] : v.centroids()) {
    if (!counts.contains(label)) issues.centroids_without_voxels.push_back(label);
  }
  return issues;
}

/// Voxel centroids (mm) of every voxel carrying `label`, x-fastest order.
inline PointCloud extract_label_points(const LabeledVolume& v, int label) {
  if (label <= 0) throw Error(ErrorKind::contract, "label must be positive");
  PointCloud cloud;
  const auto& labels = v.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) {
      cloud.points.push_back(v.voxel_center(i));
      cloud.voxels.push_back(i);
    }
  }
  if (cloud.points.empty()) {
    throw Error(ErrorKind::empty_selection, "label " + std::to_string(label) + " has no voxels");
  }
  return cloud;
}

namespace io {

template <typename T>
std::vector<T> read_raw_le(const std::filesystem::path& path, std::size_t expected) {
  static_assert(sizeof(T) == 2, "raw volumes hold 16-bit samples");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != expected * sizeof(T)) {
    throw Error(ErrorKind::size_mismatch, path.string() + " holds " + std::to_string(bytes.size() / sizeof(T)) +
                                              " voxels, expected " + std::to_string(expected));
  }
  std::vector<T> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    const auto lo = static_cast<std::uint16_t>(bytes[2 * i]);
    const auto hi = static_cast<std::uint16_t>(bytes[2 * i + 1]);
    out[i] = static_cast<T>(static_cast<std::uint16_t>(lo | (hi << 8)));
  }
  return out;
}

template <typename T>
void write_raw_le(const std::filesystem::path& path, const std::vector<T>& values) {
  static_assert(sizeof(T) == 2, "raw volumes hold 16-bit samples");
  std::vector<unsigned char> bytes(values.size() * 2);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto u = static_cast<std::uint16_t>(values[i]);
    bytes[2 * i] = static_cast<unsigned char>(u & 0xFF);
    bytes[2 * i + 1] = static_cast<unsigned char>(u >> 8);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "short write to " + path.string());
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "short write to " + path.string());
}

}  // namespace io

inline std::map<int, CentroidAnnotation> parse_centroids(const nlohmann::json& j, const Vec3& spacing) {
  if (!j.is_array()) throw Error(ErrorKind::parse, "centroid file must hold a JSON array");
  std::map<int, CentroidAnnotation> out;
  for (const auto& entry : j) {
    const int label = entry.at("label").get<int>();
    const auto v = entry.at("voxel").get<std::array<double, 3>>();
    if (label < 1) throw Error(ErrorKind::parse, "centroid label must be positive");
    if (!out.emplace(label, CentroidAnnotation::from_voxel(label, {v[0], v[1], v[2]}, spacing)).second) {
      throw Error(ErrorKind::parse, "duplicate centroid for label " + std::to_string(label));
    }
  }
  return out;
}

/// Load a volume from its JSON descriptor. Relative paths resolve against
/// the descriptor's directory.
inline LabeledVolume load_volume(const std::filesystem::path& descriptor) {
  const nlohmann::json d = io::read_json(descriptor);
  const auto base = descriptor.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  try {
    const auto dims_in = d.at("dims").get<std::array<long long, 3>>();
    const auto sp = d.at("spacing_mm").get<std::array<double, 3>>();
    Dims dims{};
    for (std::size_t a = 0; a < 3; ++a) {
      if (dims_in[a] <= 0) throw Error(ErrorKind::parse, "volume dims must be positive");
      dims[a] = static_cast<std::size_t>(dims_in[a]);
    }
    const Vec3 spacing{sp[0], sp[1], sp[2]};
    const std::size_t n = dims[0] * dims[1] * dims[2];
    auto hu = io::read_raw_le<std::int16_t>(resolve(d.at("hu_file").get<std::string>()), n);
    auto labels = io::read_raw_le<std::uint16_t>(resolve(d.at("label_file").get<std::string>()), n);
    std::map<int, CentroidAnnotation> centroids;
    if (d.contains("centroid_file") && !d.at("centroid_file").is_null()) {
      centroids = parse_centroids(io::read_json(resolve(d.at("centroid_file").get<std::string>())), spacing);
    }
    return LabeledVolume(dims, spacing, std::move(hu), std::move(labels), std::move(centroids));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, descriptor.string() + ": " + e.what());
  }
}

/// Write volume.json, hu.raw, labels.raw and centroids.json into `dir`.
/// Returns the descriptor path.
inline std::filesystem::path write_volume(const LabeledVolume& v, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_raw_le(dir / "hu.raw", v.hu());
  io::write_raw_le(dir / "labels.raw", v.labels());
  nlohmann::json cents = nlohmann::json::array();
  for (const auto& [label, c] : v.centroids()) {
    cents.push_back({{"label", label}, {"voxel", {c.voxel_pos.x, c.voxel_pos.y, c.voxel_pos.z}}});
  }
  io::write_text(dir / "centroids.json", cents.dump(2) + "\n");
  const nlohmann::json desc = {
      {"dims", {v.dims()[0], v.dims()[1], v.dims()[2]}},
      {"spacing_mm", {v.spacing().x, v.spacing().y, v.spacing().z}},
      {"hu_file", "hu.raw"},
      {"label_file", "labels.raw"},
      {"centroid_file", "centroids.json"},
  };
  io::write_text(dir / "volume.json", desc.dump(2) + "\n");
  return dir / "volume.json";
}

}  // namespace spinekit
