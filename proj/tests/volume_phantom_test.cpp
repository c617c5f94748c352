#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "support.hpp"

namespace spinekit {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spinekit_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Volume, BackgroundVolume) {
  const LabeledVolume v({2, 2, 2}, {1, 1, 1}, std::vector<std::int16_t>(8, 0), std::vector<std::uint16_t>(8, 0));
  EXPECT_EQ(v.voxel_count(), 8u);
  EXPECT_TRUE(v.centroids().empty());
  EXPECT_TRUE(v.label_counts().empty());
}

TEST(Volume, SizeMismatchOnConstruction) {
  EXPECT_THROW(LabeledVolume({2, 2, 2}, {1, 1, 1}, std::vector<std::int16_t>(7, 0), std::vector<std::uint16_t>(8, 0)),
               Error);
}

TEST(Volume, SingleVoxelCentroid) {
  std::vector<std::uint16_t> labels(27, 0);
  labels[0] = 7;
  const LabeledVolume v({3, 3, 3}, {2, 2, 2}, std::vector<std::int16_t>(27, 0), labels);
  const PointCloud c = extract_label_points(v, 7);
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.points[0], (Vec3{1, 1, 1}));
}

TEST(Volume, ExtractOrderAndPartition) {
  const auto& s = test::sphere10();
  const auto& v = s.phantom.volume;
  const PointCloud c = extract_label_points(v, 1);
  for (std::size_t i = 1; i < c.voxels.size(); ++i) ASSERT_LT(c.voxels[i - 1], c.voxels[i]);
  std::size_t background = 0;
  for (auto l : v.labels()) background += l == 0;
  EXPECT_EQ(c.points.size() + background, v.voxel_count());
  for (const Vec3& p : c.points) {
    for (std::size_t a = 0; a < 3; ++a) {
      ASSERT_GT(p[a], 0.0);
      ASSERT_LT(p[a], static_cast<double>(v.dims()[a]) * v.spacing()[a]);
    }
  }
  try {
    extract_label_points(v, 99);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_selection);
  }
}

TEST(Volume, RoundTripIsByteIdentical) {
  const auto& s = test::sphere10();
  const fs::path dir = scratch_dir("roundtrip");
  const fs::path desc = write_volume(s.phantom.volume, dir);
  const LabeledVolume back = load_volume(desc);
  EXPECT_EQ(back.hu(), s.phantom.volume.hu());
  EXPECT_EQ(back.labels(), s.phantom.volume.labels());
  EXPECT_EQ(back.dims(), s.phantom.volume.dims());
  ASSERT_NE(back.centroid(1), nullptr);
  EXPECT_EQ(back.centroid(1)->mm_pos, s.phantom.volume.centroid(1)->mm_pos);
  const fs::path dir2 = scratch_dir("roundtrip2");
  write_volume(back, dir2);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  EXPECT_EQ(slurp(dir / "hu.raw"), slurp(dir2 / "hu.raw"));
  EXPECT_EQ(slurp(dir / "labels.raw"), slurp(dir2 / "labels.raw"));
}

TEST(Volume, DeclaredDimsLargerThanFile) {
  const fs::path dir = scratch_dir("mismatch");
  io::write_raw_le(dir / "hu.raw", std::vector<std::int16_t>(999, 0));
  io::write_raw_le(dir / "labels.raw", std::vector<std::uint16_t>(999, 0));
  io::write_text(dir / "volume.json",
                 R"({"dims":[10,10,10],"spacing_mm":[1,1,1],"hu_file":"hu.raw","label_file":"labels.raw"})");
  try {
    load_volume(dir / "volume.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::size_mismatch);
  }
}

TEST(Volume, MalformedDescriptor) {
  const fs::path dir = scratch_dir("malformed");
  io::write_text(dir / "volume.json", R"({"dims":[10,10],"spacing_mm":[1,1,1]})");
  EXPECT_THROW(load_volume(dir / "volume.json"), Error);
  io::write_text(dir / "bad.json", "{not json");
  EXPECT_THROW(load_volume(dir / "bad.json"), Error);
  EXPECT_THROW(load_volume(dir / "missing.json"), Error);
}

TEST(Volume, AnnotationIssues) {
  std::vector<std::uint16_t> labels(27, 0);
  labels[13] = 3;
  labels[0] = 4;
  std::map<int, CentroidAnnotation> c{{3, CentroidAnnotation::from_voxel(3, {1, 1, 1}, {1, 1, 1})},
                                      {9, CentroidAnnotation::from_voxel(9, {0, 0, 0}, {1, 1, 1})}};
  const LabeledVolume v({3, 3, 3}, {1, 1, 1}, std::vector<std::int16_t>(27, 0), labels, c);
  const auto issues = annotation_issues(v);
  EXPECT_EQ(issues.labels_without_centroid, std::vector<int>{4});
  EXPECT_EQ(issues.centroids_without_voxels, std::vector<int>{9});
  EXPECT_EQ(v.centroid(3)->mm_pos, (Vec3{1.5, 1.5, 1.5}));
}

std::size_t count_label(const LabeledVolume& v, int label) {
  std::size_t n = 0;
  for (auto l : v.labels()) n += l == label;
  return n;
}

TEST(Phantom, SphereVoxelCounts) {
  EXPECT_EQ(count_label(make_sphere_phantom(1.5, {1, 1, 1}, 100, 0, 1).volume, 1), 19u);
  EXPECT_EQ(count_label(make_sphere_phantom(0.5, {1, 1, 1}, 100, 0, 1).volume, 1), 1u);
  const double truth = 4.0 / 3.0 * std::numbers::pi * 1000.0;
  const auto n1 = static_cast<double>(count_label(test::sphere10().phantom.volume, 1));
  EXPECT_LE(std::abs(n1 - truth) / truth, 0.05);
  const auto n05 = static_cast<double>(count_label(make_sphere_phantom(10, {0.5, 0.5, 0.5}, 100, 0, 1).volume, 1));
  EXPECT_LT(std::abs(n05 * 0.125 - truth), std::abs(n1 - truth));
}

TEST(Phantom, SphereIsTwoValuedAndCentred) {
  const auto& v = test::sphere10().phantom.volume;
  const Vec3 c = v.centroid(1)->mm_pos;
  for (std::size_t i = 0; i < v.voxel_count(); ++i) {
    const bool in = distance(v.voxel_center(i), c) <= 10.0;
    ASSERT_EQ(v.label_at(i), in ? 1 : 0);
    ASSERT_EQ(v.hu_at(i), in ? 100 : 0);
  }
}

TEST(Phantom, CompoundBandsMatchTruth) {
  const auto& b = test::compound();
  const CompoundTruth& t = *b.phantom.compound;
  EXPECT_DOUBLE_EQ(t.arch_distance, 25.0);
  EXPECT_DOUBLE_EQ(t.process_distance, 40.0);
  const auto& v = b.phantom.volume;
  for (std::size_t i = 0; i < v.voxel_count(); ++i) {
    ASSERT_EQ(v.label_at(i) != 0, t.band_of(v.voxel_center(i)) != Band::none);
  }
  // Mesh vertex distances sit in three disjoint bands near 15, 25 and 40.
  const Vec3 c = v.centroid(1)->mm_pos;
  for (const Vec3& p : b.mesh.vertices) {
    const double d = distance(p, c);
    const bool near15 = d <= 15.0, near25 = d >= 19.0 && d <= 31.0, near40 = d >= 37.0 && d <= 44.0;
    ASSERT_TRUE(near15 || near25 || near40) << d;
  }
}

TEST(Phantom, InvalidSpecs) {
  EXPECT_THROW(make_compound_vertebra(15, 3, 0, {1, 1, 1}, 1), Error);
  EXPECT_THROW(make_compound_vertebra(CompoundShape{15, 3, 15, 19.0, 0.0}, {1, 1, 1}, 100, 0, 1), Error);
  EXPECT_THROW(make_disc_pair(15, 10, 0, {1, 1, 1}, {1, 2}), Error);
  EXPECT_THROW(make_disc_pair(15, 10, 4, {1, 1, 1}, {1, 1}), Error);
  EXPECT_THROW(make_sphere_phantom(-1, {1, 1, 1}, 100, 0, 1), Error);
}

TEST(Phantom, DiscPairGapVolume) {
  DiscPairShape shape{15, 10, 4, std::int16_t{-50}};
  const Phantom ph = make_disc_pair(shape, {1, 1, 1}, 100, 0, {1, 2});
  EXPECT_NEAR(ph.truth.at("gap_volume_mm3").get<double>(), 2827.43, 0.01);
  // Voxel-counting cross-check: background voxels strictly between the caps
  // inside the disc radius carry the gap HU.
  std::size_t gap_voxels = 0;
  for (auto h : ph.volume.hu()) gap_voxels += h == -50;
  // Three voxel layers of the discrete disc cross-section plus the unit
  // offset from the cap planes reproduce the gap height.
  const double cross_section = static_cast<double>(gap_voxels) / 3.0;
  EXPECT_NEAR(cross_section * 4.0, 2827.43, 0.05 * 2827.43);
  EXPECT_EQ(count_label(ph.volume, 1), count_label(ph.volume, 2));
}

TEST(Phantom, SpecParsing) {
  const auto spec = parse_phantom_spec(nlohmann::json::parse(
      R"({"kind":"disc_pair","disc_radius_mm":15,"thickness_mm":10,"gap_mm":4,"labels":[3,4],"hu_gap":-50})"));
  const Phantom ph = make_phantom(spec);
  EXPECT_NE(ph.volume.centroid(3), nullptr);
  EXPECT_NE(ph.volume.centroid(4), nullptr);
  EXPECT_THROW(parse_phantom_spec(nlohmann::json::parse(R"({"kind":"cube"})")), Error);
}

}  // namespace
}  // namespace spinekit
