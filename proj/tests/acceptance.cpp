// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "spinekit/spinekit.hpp"

namespace fs = std::filesystem;
using namespace spinekit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TriangleMesh mesh_of(const std::vector<Vec3>& pts, int label = 1) {
  TriangleMesh m = build_alpha_shape(pts, AlphaMode::automatic());
  m.source_label = label;
  return m;
}

std::size_t brute_nearest(const std::vector<Vec3>& pts, const Vec3& q) {
  std::size_t best = 0;
  double bd = INFINITY;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = squared_distance(pts[i], q);
    if (d < bd) bd = d, best = i;
  }
  return best;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spinekit_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SPINEKIT_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

KdeSettings voxel_kde(double spacing) {
  KdeSettings k;
  k.min_bandwidth = spacing;
  return k;
}

Outcome ac1() {
  const auto t0 = std::chrono::steady_clock::now();
  const Phantom ph = make_sphere_phantom(10.0, {1, 1, 1}, 100, 0, 1);
  const PointCloud cloud = extract_label_points(ph.volume, 1);
  const TriangleMesh m = mesh_of(cloud.points);
  const MeshMetrics mm = mesh_metrics(m);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool edges_twice = true;
  for (const auto& [k, uses] : edge_use_counts(m.triangles)) edges_twice &= uses == 2;
  const double n = static_cast<double>(cloud.points.size());
  const double v_truth = 4.0 / 3.0 * std::numbers::pi * 1000.0;
  const double a_truth = 4.0 * std::numbers::pi * 100.0;
  const double e_count = (mm.volume - n) / n, e_vol = (mm.volume - v_truth) / v_truth;
  const double e_area = (mm.area - a_truth) / a_truth;
  const bool pass = edges_twice && is_closed_manifold(m.triangles) && std::abs(e_count) <= 0.05 &&
                    std::abs(e_vol) <= 0.05 && std::abs(e_area) <= 0.08 && seconds < 10.0;
  return {pass, fmt("closed=%d edges2=%d volume %.2f vs voxels %.0f (%+.1f%%) vs analytic %.2f (%+.1f%%); "
                    "area %.2f (%+.1f%%); alpha %.3f; %.2fs",
                    is_closed_manifold(m.triangles), edges_twice, mm.volume, n, 100 * e_count, v_truth,
                    100 * e_vol, mm.area, 100 * e_area, m.alpha_used, seconds)};
}

Outcome ac2() {
  std::size_t mismatches = 0, queries = 0;
  for (std::uint32_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::vector<Vec3> pts(1000);
    for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
    const KdTree tree(pts);
    for (int i = 0; i < 1000; ++i) {
      const Vec3 q{u(rng), u(rng), u(rng)};
      mismatches += tree.nearest(q).index != brute_nearest(pts, q);
      ++queries;
    }
    for (std::size_t i = 0; i < pts.size(); ++i, ++queries) mismatches += tree.nearest(pts[i]).index != i;
  }
  return {mismatches == 0, fmt("%zu queries over 5 clouds, %zu mismatches", queries, mismatches)};
}

struct CompoundRun {
  Phantom phantom;
  TriangleMesh mesh;
  DistanceSamples d;
  ThresholdResult r;
};

CompoundRun compound_run(const CompoundShape& shape) {
  CompoundRun c{make_compound_vertebra(shape, {1, 1, 1}, 100, 0, 1), {}, {}, {}};
  c.mesh = mesh_of(extract_label_points(c.phantom.volume, 1).points);
  c.d = distance_distribution(c.mesh, *c.phantom.volume.centroid(1));
  c.r = find_thresholds(estimate_density(c.d, voxel_kde(1.0)));
  return c;
}

Outcome ac3() {
  const CompoundRun c = compound_run(CompoundShape{});
  const auto& t = c.r.thresholds;
  const RegionLabeling lab = classify_vertices(c.d, t);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < lab.regions.size(); ++i) {
    const Band b = c.phantom.compound->band_of(c.mesh.vertices[i]);
    const Region expect = b == Band::body ? Region::body : b == Band::arch ? Region::arch : Region::process;
    wrong += lab.regions[i] != expect;
  }
  const bool pass = t.t1 > 15 && t.t1 < 25 && t.t2 > 25 && t.t2 < 40 && wrong == 0;
  return {pass, fmt("bands 15/%.0f/%.0f mm: t1 %.3f t2 %.3f t3 %.3f; %zu of %zu vertices misclassified",
                    c.phantom.compound->arch_distance, c.phantom.compound->process_distance, t.t1, t.t2, t.t3, wrong,
                    lab.regions.size())};
}

Outcome ac4() {
  const Phantom full = make_sphere_phantom(10.0, {1, 1, 1}, 100, 0, 1);
  const auto& v = full.volume;
  // The 25^3 phantom padded with background to a 32^3 block.
  const std::size_t o = (32 - v.dims()[0]) / 2;
  std::vector<std::int16_t> hu(32 * 32 * 32, 0);
  std::vector<std::uint16_t> lab(hu.size(), 0);
  for (std::size_t k = 0; k < v.dims()[2]; ++k)
    for (std::size_t j = 0; j < v.dims()[1]; ++j)
      for (std::size_t i = 0; i < v.dims()[0]; ++i) {
        const std::size_t dst = (i + o) + 32 * ((j + o) + 32 * (k + o));
        hu[dst] = v.hu_at(v.linear_index(i, j, k));
        lab[dst] = v.label_at(v.linear_index(i, j, k));
      }
  const LabeledVolume crop({32, 32, 32}, v.spacing(), hu, lab);
  const TriangleMesh m = mesh_of(extract_label_points(crop, 1).points);
  std::size_t bad_int = 0, bad_ext = 0, bad_euc = 0, bad_src = 0;
  for (auto c : {MappingCriterion::internal, MappingCriterion::euclidean, MappingCriterion::external}) {
    const VertexTexture t = map_grey(m, crop, 1, c);
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
      if (c == MappingCriterion::internal) bad_int += t.hu[i] != 100;
      if (c == MappingCriterion::external) bad_ext += t.hu[i] != 0;
      if (c == MappingCriterion::euclidean) {
        bad_euc += t.hu[i] != 0 && t.hu[i] != 100;
        std::size_t best = 0;
        double bd = INFINITY;
        for (std::size_t x = 0; x < crop.voxel_count(); ++x) {
          const double d = squared_distance(m.vertices[i], crop.voxel_center(x));
          if (d < bd) bd = d, best = x;
        }
        const auto& s = t.source_voxel[i];
        bad_src += crop.linear_index(s[0], s[1], s[2]) != best;
      }
    }
  }
  const bool pass = bad_int + bad_ext + bad_euc + bad_src == 0;
  return {pass, fmt("%zu vertices on 32^3 crop: internal!=100 %zu, external!=0 %zu, euclidean off-set %zu, "
                    "source-voxel mismatches %zu",
                    m.vertices.size(), bad_int, bad_ext, bad_euc, bad_src)};
}

Outcome ac5() {
  const Phantom ph = make_sphere_phantom(10.0, {1, 1, 1}, 100, 0, 1);
  const TriangleMesh m = mesh_of(extract_label_points(ph.volume, 1).points);
  const Vec3 c = ph.volume.centroid(1)->mm_pos;
  double dmin = INFINITY;
  for (const Vec3& p : m.vertices) dmin = std::min(dmin, distance(p, c));
  const double diag = std::sqrt(3.0);
  const double oracle = std::floor(dmin / diag) * diag;
  const double r = max_inscribed_radius(m, c, diag);
  const RoiStats st = roi_stats(ph.volume, c, r);
  bool consistent = true;
  for (double rr = diag; rr <= r + 1e-12; rr += diag) {
    const RoiStats s = roi_stats(ph.volume, c, rr);
    consistent &= std::llround(s.hu_mean * static_cast<double>(s.voxel_count)) == s.hu_sum;
    consistent &= s.hu_mean == 100.0;
  }
  const bool pass = r == oracle && st.hu_mean == 100.0 && consistent;
  return {pass, fmt("min vertex distance %.4f, radius %.6f (oracle %.6f), %zu voxels, mean %.3f, sum %lld, "
                    "mean*count==sum at every step: %s",
                    dmin, r, oracle, st.voxel_count, st.hu_mean, static_cast<long long>(st.hu_sum),
                    consistent ? "yes" : "no")};
}

Outcome ac6() {
  double vol4 = 0.0, truth4 = 0.0;
  std::vector<double> vols;
  bool facing_exact = true;
  for (double gap : {2.0, 4.0, 8.0}) {
    const Phantom ph = make_disc_pair(gap == 4.0 ? DiscPairShape{15, 10, gap, std::int16_t{-50}}
                                                 : DiscPairShape{15, 10, gap, std::nullopt},
                                      {1, 1, 1}, 100, 0, {1, 2});
    const TriangleMesh a = mesh_of(extract_label_points(ph.volume, 1).points, 1);
    const TriangleMesh b = mesh_of(extract_label_points(ph.volume, 2).points, 2);
    const FacingPair f = facing_vertices(a, b);
    std::set<std::uint32_t> ea, eb;
    for (const Vec3& q : b.vertices) ea.insert(static_cast<std::uint32_t>(brute_nearest(a.vertices, q)));
    for (const Vec3& q : a.vertices) eb.insert(static_cast<std::uint32_t>(brute_nearest(b.vertices, q)));
    facing_exact &= std::set<std::uint32_t>(f.on_a.indices.begin(), f.on_a.indices.end()) == ea;
    facing_exact &= std::set<std::uint32_t>(f.on_b.indices.begin(), f.on_b.indices.end()) == eb;
    const InterspaceMesh is =
        build_interspace(a, b, f.on_a, f.on_b, ph.volume.centroid(1)->mm_pos, ph.volume.centroid(2)->mm_pos);
    vols.push_back(is.volume);
    if (gap == 4.0) {
      vol4 = is.volume;
      truth4 = ph.truth.at("gap_volume_mm3").get<double>();
    }
  }
  const bool monotone = vols[0] < vols[1] && vols[1] < vols[2];
  const bool pass = rel(vol4, truth4) <= 0.15 && monotone && facing_exact;
  return {pass, fmt("gap 4: %.2f vs %.2f mm3 (%+.1f%%); gaps 2/4/8: %.1f/%.1f/%.1f monotone=%d; facing sets exact=%d",
                    vol4, truth4, 100 * (vol4 - truth4) / truth4, vols[0], vols[1], vols[2], monotone,
                    facing_exact)};
}

Outcome ac7() {
  // Determinism through the CLI.
  const fs::path dir = work_dir("ac7");
  io::write_text(dir / "spec.json",
                 R"({"kind":"disc_pair","disc_radius_mm":15,"thickness_mm":10,"gap_mm":4,"labels":[1,2],"hu_gap":-50})");
  const bool made = run_cli("phantom --spec " + (dir / "spec.json").string() + " --out " + (dir / "vol").string()) == 0;
  const std::string in = (dir / "vol" / "volume.json").string();
  const bool ran = run_cli("run --input " + in + " --out " + (dir / "a").string()) == 0 &&
                   run_cli("run --input " + in + " --out " + (dir / "b").string() + " --workers 1") == 0;
  const std::string ja = slurp(dir / "a" / "report.json");
  const bool identical = made && ran && !ja.empty() && ja == slurp(dir / "b" / "report.json");

  // Rigid translation and uniform scaling of the compound phantom cloud.
  const Phantom ph = make_compound_vertebra(15.0, 3.0, 15.0, {1, 1, 1}, 1);
  const auto pts = extract_label_points(ph.volume, 1).points;
  const Vec3 c = ph.volume.centroid(1)->mm_pos;
  auto run = [&](const Vec3& shift, double s) {
    std::vector<Vec3> q = pts;
    for (Vec3& p : q) p = p * s + shift;
    const TriangleMesh m = mesh_of(q);
    const DistanceSamples d = distance_distribution(m, c * s + shift);
    const ThresholdResult r = find_thresholds(estimate_density(d, voxel_kde(s)));
    return std::tuple{mesh_metrics(m), r.thresholds, classify_vertices(d, r.thresholds)};
  };
  const auto [m0, t0, l0] = run({0, 0, 0}, 1.0);
  const auto [m1, t1, l1] = run({100, 100, 100}, 1.0);
  const auto [m2, t2, l2] = run({0, 0, 0}, 2.0);
  double worst_t = 0.0, worst_s = 0.0;
  for (auto [a, b, d] : {std::tuple{t0.t1, t1.t1, t2.t1}, std::tuple{t0.t2, t1.t2, t2.t2},
                         std::tuple{t0.t3, t1.t3, t2.t3}}) {
    worst_t = std::max(worst_t, rel(b, a));
    worst_s = std::max(worst_s, rel(d, 2.0 * a));
  }
  const double mesh_t = std::max(rel(m1.area, m0.area), rel(m1.volume, m0.volume));
  const bool labels_same = l0.regions == l2.regions && l0.regions == l1.regions;
  const bool pass = identical && mesh_t <= 1e-6 && worst_t <= 1e-6 && worst_s <= 1e-6 && labels_same;
  return {pass, fmt("report.json identical=%d; translation: mesh %.1e thresholds %.1e; scale x2: thresholds %.1e, "
                    "labeling unchanged=%d",
                    identical, mesh_t, worst_t, worst_s, labels_same)};
}

Outcome ac8() {
  const fs::path dir = work_dir("ac8");
  io::write_text(dir / "spec.json", R"({"kind":"sphere","radius_mm":10})");
  const bool made = run_cli("phantom --spec " + (dir / "spec.json").string() + " --out " + (dir / "vol").string()) == 0;
  const int code = run_cli("run --input " + (dir / "vol" / "volume.json").string() + " --out " + (dir / "out").string());
  bool warned = false, complete = false;
  if (fs::exists(dir / "out" / "report.json")) {
    const auto j = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
    for (const auto& w : j.at("warnings")) warned |= w.at("code") == "threshold_failure";
    complete = j.at("vertebrae").size() == 1 && fs::exists(dir / "out" / "vertebrae.csv") &&
               fs::exists(dir / "out" / "pairs.csv") && fs::exists(dir / "out" / "vertebra_1_regions.ply");
  }
  CompoundShape crushed;
  crushed.body_crush = 0.6;
  const Phantom fr = make_compound_vertebra(crushed, {1, 1, 1}, 100, 0, 1);
  PipelineConfig cfg;
  const SpineReport healthy = run_pipeline(make_compound_vertebra(15.0, 3.0, 15.0, {1, 1, 1}, 1).volume, cfg);
  const SpineReport broken = run_pipeline(fr.volume, cfg);
  auto flagged = [](const SpineReport& r) {
    return !r.vertebrae.empty() && std::count(r.vertebrae[0].flags.begin(), r.vertebrae[0].flags.end(), "degraded") > 0;
  };
  const bool pass = made && code == 0 && warned && complete && flagged(broken) && !flagged(healthy);
  std::string modes;
  if (!broken.vertebrae.empty() && broken.vertebrae[0].thresholds) {
    modes = std::to_string(broken.vertebrae[0].thresholds->modes.size());
  }
  return {pass, fmt("unimodal sphere: exit %d, threshold_failure warning=%d, complete report=%d; "
                    "crushed body (crush 0.6): degraded=%d with %s modes, healthy degraded=%d",
                    code, warned, complete, flagged(broken), modes.c_str(), flagged(healthy))};
}

void ac9() {
  const char* path = std::getenv("SPINEKIT_VERSE_VOLUME");
  if (!path || !*path) {
    std::printf("AC9 SKIP  VerSe smoke test: set SPINEKIT_VERSE_VOLUME to a converted volume.json\n");
    return;
  }
  report("AC9", "VerSe smoke test", [&]() -> Outcome {
    PipelineConfig cfg;
    cfg.input = path;
    const SpineReport r = run_pipeline(cfg);
    double cerv = 0, lumb = 0;
    int nc = 0, nl = 0;
    for (const auto& v : r.vertebrae) {
      if (v.label >= 1 && v.label <= 7) cerv += v.metrics.volume, ++nc;
      if (v.label >= 20 && v.label <= 25) lumb += v.metrics.volume, ++nl;
    }
    const bool trend = nc == 0 || nl == 0 || lumb / nl > cerv / nc;
    return {r.coverage_complete() && trend,
            fmt("%zu records, %zu warnings, coverage=%d, cervical mean %.0f mm3 (%d), lumbar mean %.0f mm3 (%d)",
                r.vertebrae.size(), r.warnings.size(), r.coverage_complete(), nc ? cerv / nc : 0.0, nc,
                nl ? lumb / nl : 0.0, nl)};
  });
}

}  // namespace

int main() {
  report("AC1", "sphere phantom surface", ac1);
  report("AC2", "kd-tree exactness", ac2);
  report("AC3", "compound vertebra thresholds", ac3);
  report("AC4", "mapping criteria", ac4);
  report("AC5", "ROI sphere", ac5);
  report("AC6", "intervertebral space", ac6);
  report("AC7", "determinism and invariance", ac7);
  report("AC8", "degraded input handling", ac8);
  ac9();
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
