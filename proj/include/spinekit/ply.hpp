#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spinekit/error.hpp"
#include "spinekit/mesh.hpp"
#include "spinekit/volume.hpp"

namespace spinekit {

using Rgb = std::array<std::uint8_t, 3>;

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "PLY writer assumes a little-endian host");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace detail

/// Binary little-endian PLY: float64 vertices, optional uchar RGB per vertex,
/// uint32 triangle indices.
inline std::string encode_ply(const TriangleMesh& m, const std::vector<Rgb>* colors = nullptr) {
  if (colors && colors->size() != m.vertices.size()) {
    throw Error(ErrorKind::contract, "one colour per vertex is required");
  }
  std::string out = "ply\nformat binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(m.vertices.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (colors) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "element face " + std::to_string(m.triangles.size()) + "\n";
  out += "property list uchar uint vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    const Vec3& p = m.vertices[i];
    detail::put_le(out, p.x);
    detail::put_le(out, p.y);
    detail::put_le(out, p.z);
    if (colors) {
      for (std::uint8_t c : (*colors)[i]) detail::put_le(out, c);
    }
  }
  for (const Triangle& t : m.triangles) {
    detail::put_le(out, std::uint8_t{3});
    for (std::uint32_t v : t) detail::put_le(out, v);
  }
  return out;
}

inline void write_ply(const std::filesystem::path& path, const TriangleMesh& m,
                      const std::vector<Rgb>* colors = nullptr) {
  io::write_text(path, encode_ply(m, colors));
}

}  // namespace spinekit
