#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spinekit/alpha_shape.hpp"
#include "spinekit/error.hpp"
#include "spinekit/interspace.hpp"
#include "spinekit/kde.hpp"
#include "spinekit/mesh.hpp"
#include "spinekit/parallel.hpp"
#include "spinekit/ply.hpp"
#include "spinekit/roi.hpp"
#include "spinekit/segmentation.hpp"
#include "spinekit/texture.hpp"
#include "spinekit/volume.hpp"

namespace spinekit {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr const char* kVertebraeCsvHeader =
    "label,area_mm2,volume_mm3,t1_mm,t2_mm,t3_mm,"
    "mean_hu_body_int,mean_hu_body_euc,mean_hu_body_ext,"
    "mean_hu_arch_int,mean_hu_arch_euc,mean_hu_arch_ext,"
    "mean_hu_proc_int,mean_hu_proc_euc,mean_hu_proc_ext,"
    "roi_radius_mm,roi_voxels,roi_hu_mean,roi_hu_sum,flags";

inline constexpr const char* kPairsCsvHeader =
    "label_lo,label_hi,centroid_dist_mm,interspace_volume_mm3,interspace_hu_mean,interspace_hu_sum,"
    "interspace_voxels,flags";

struct KdeOverrides {
  /// Bandwidth floor in mm; unset means one voxel (largest spacing).
  std::optional<double> min_bandwidth;
  double bandwidth_scale = 1.0;
};

struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path out_dir;
  AlphaMode alpha = AlphaMode::automatic();
  std::vector<MappingCriterion> criteria{MappingCriterion::internal, MappingCriterion::euclidean,
                                         MappingCriterion::external};
  KdeOverrides kde;
  /// Explicit (lower, upper) label pairs; empty derives consecutive pairs.
  std::vector<std::pair<int, int>> pairs;
  bool allow_nonadjacent_pairs = false;
  std::string subject;
  unsigned workers = 0;
};

struct Warning {
  std::string scope;  // volume, vertebra or pair
  std::vector<int> labels;
  std::string code;
  std::string message;
  /// The vertebra or pair has no record because of this warning.
  bool dropped = false;
};

struct VertebraRecord {
  int label = 0;
  std::size_t voxel_count = 0;
  TriangleMesh mesh;
  MeshMetrics metrics;
  std::optional<Vec3> centroid;
  std::optional<DistanceSamples> distances;
  std::optional<ThresholdResult> thresholds;
  std::optional<double> bandwidth;
  std::optional<RegionLabeling> regions;
  std::vector<std::optional<VertexTexture>> textures;  // aligned with config criteria
  std::vector<std::optional<RegionHuSummary>> region_hu;
  std::optional<RoiStats> roi;
  std::vector<std::string> flags;
};

struct PairRecord {
  int label_lo = 0;
  int label_hi = 0;
  InterspaceMesh interspace;
  InterspaceHu hu;
  std::size_t facing_lo = 0;
  std::size_t facing_hi = 0;
  std::vector<std::string> flags;
};

struct SpineReport {
  nlohmann::json config;
  std::string config_hash;
  Dims dims{};
  Vec3 spacing;
  std::int16_t hu_min = 0;
  std::int16_t hu_max = 0;
  std::size_t label_count = 0;
  std::vector<MappingCriterion> criteria;
  std::vector<VertebraRecord> vertebrae;
  std::vector<PairRecord> pairs;
  std::vector<Warning> warnings;

  /// Every labelled vertebra is either a record or a dropped warning.
  bool coverage_complete() const {
    std::size_t dropped = 0;
    for (const Warning& w : warnings) {
      if (w.dropped && w.scope == "vertebra") ++dropped;
    }
    return vertebrae.size() + dropped == label_count;
  }

  const VertebraRecord* vertebra(int label) const {
    for (const auto& v : vertebrae) {
      if (v.label == label) return &v;
    }
    return nullptr;
  }
};

namespace detail {

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::json config_json(const PipelineConfig& cfg) {
  nlohmann::json j;
  j["input"] = cfg.input.generic_string();
  if (cfg.alpha.is_auto()) {
    j["alpha"] = "auto";
  } else if (std::isinf(cfg.alpha.radius())) {
    j["alpha"] = "hull";
  } else {
    j["alpha"] = cfg.alpha.radius();
  }
  j["criteria"] = nlohmann::json::array();
  for (auto c : cfg.criteria) j["criteria"].push_back(to_string(c));
  j["kde"] = {{"min_bandwidth_mm", cfg.kde.min_bandwidth ? nlohmann::json(*cfg.kde.min_bandwidth) : "voxel"},
              {"bandwidth_scale", cfg.kde.bandwidth_scale}};
  j["pairs"] = nlohmann::json::array();
  for (auto [a, b] : cfg.pairs) j["pairs"].push_back({a, b});
  j["allow_nonadjacent_pairs"] = cfg.allow_nonadjacent_pairs;
  j["subject"] = cfg.subject;
  return j;
}

struct VertebraOutcome {
  std::optional<VertebraRecord> record;
  std::vector<Warning> warnings;
};

inline VertebraOutcome process_vertebra(const LabeledVolume& vol, int label, const PipelineConfig& cfg,
                                        const KdeSettings& kde) {
  VertebraOutcome out;
  auto warn = [&](const std::string& code, const std::string& msg, bool dropped = false) {
    out.warnings.push_back({"vertebra", {label}, code, msg, dropped});
  };
  VertebraRecord rec;
  rec.label = label;
  try {
    const PointCloud cloud = extract_label_points(vol, label);
    rec.voxel_count = cloud.points.size();
    rec.mesh = build_alpha_shape(cloud.points, cfg.alpha);
    rec.mesh.source_label = label;
    rec.metrics = mesh_metrics(rec.mesh);
  } catch (const Error& e) {
    warn(to_string(e.kind()), e.what(), true);
    return out;
  }
  if (rec.mesh.cavities_discarded) {
    rec.flags.push_back("cavities_discarded");
    warn("cavities_discarded", "interior cavity shells were removed from the surface");
  }

  // Textures need no centroid.
  rec.textures.resize(cfg.criteria.size());
  rec.region_hu.resize(cfg.criteria.size());
  for (std::size_t c = 0; c < cfg.criteria.size(); ++c) {
    try {
      rec.textures[c] = map_grey(rec.mesh, vol, label, cfg.criteria[c], 1);
    } catch (const Error& e) {
      rec.flags.push_back(std::string("mapping_") + to_string(cfg.criteria[c]));
      warn(to_string(e.kind()), e.what());
    }
  }

  const CentroidAnnotation* c = vol.centroid(label);
  if (!c) {
    rec.flags.push_back("missing_centroid");
    warn("missing_centroid", "no centroid annotation; segmentation, ROI and pairing skipped");
    out.record = std::move(rec);
    return out;
  }
  rec.centroid = c->mm_pos;
  rec.distances = distance_distribution(rec.mesh, *c);
  if (rec.distances->centroid_outside_bbox) {
    rec.flags.push_back("centroid_outside_bbox");
    warn("centroid_outside_bbox", "centroid lies outside the mesh bounding box");
  }
  try {
    const DensityCurve curve = estimate_density(*rec.distances, kde);
    rec.bandwidth = curve.bandwidth();
    rec.thresholds = find_thresholds(curve);
    if (rec.thresholds->degraded) {
      rec.flags.push_back("degraded");
      warn("degraded", "distance density has " + std::to_string(rec.thresholds->modes.size()) +
                           " modes; t3 is the last inflection");
    }
    rec.regions = classify_vertices(*rec.distances, rec.thresholds->thresholds);
  } catch (const Error& e) {
    rec.thresholds.reset();
    rec.flags.push_back(to_string(e.kind()));
    warn(to_string(e.kind()), e.what());
  }
  if (rec.regions) {
    for (std::size_t k = 0; k < cfg.criteria.size(); ++k) {
      if (rec.textures[k]) rec.region_hu[k] = region_mean_hu(*rec.textures[k], *rec.regions, rec.thresholds->thresholds);
    }
  }
  try {
    const double r = max_inscribed_radius(rec.mesh, *c, vol.voxel_diagonal());
    rec.roi = roi_stats(vol, *c, r);
  } catch (const Error& e) {
    rec.flags.push_back(to_string(e.kind()));
    warn(to_string(e.kind()), e.what());
  }
  out.record = std::move(rec);
  return out;
}

struct PairOutcome {
  std::optional<PairRecord> record;
  std::vector<Warning> warnings;
};

inline PairOutcome process_pair(const LabeledVolume& vol, const VertebraRecord& lo, const VertebraRecord& hi) {
  PairOutcome out;
  const std::vector<int> labels{lo.label, hi.label};
  auto warn = [&](const std::string& code, const std::string& msg, bool dropped = false) {
    out.warnings.push_back({"pair", labels, code, msg, dropped});
  };
  if (!lo.centroid || !hi.centroid) {
    warn("missing_centroid", "pair needs both body centroids", true);
    return out;
  }
  PairRecord rec;
  rec.label_lo = lo.label;
  rec.label_hi = hi.label;
  const FacingPair f = facing_vertices(lo.mesh, hi.mesh);
  auto body_only = [&](const VertebraRecord& v, const FacingSet& s) -> std::optional<FacingSet> {
    if (!v.thresholds) {
      rec.flags.push_back("unfiltered_" + std::to_string(v.label));
      warn("unfiltered_facing", "label " + std::to_string(v.label) +
                                    " has no thresholds; its facing vertices are used without body filtering");
      return s;
    }
    FacingSet kept = filter_body(s, *v.distances, v.thresholds->thresholds);
    if (kept.empty()) {
      warn("extraction", "no facing vertex of label " + std::to_string(v.label) + " lies within t1", true);
      return std::nullopt;
    }
    return kept;
  };
  const auto fa = body_only(lo, f.on_a);
  const auto fb = body_only(hi, f.on_b);
  if (!fa || !fb) return out;
  rec.facing_lo = fa->size();
  rec.facing_hi = fb->size();
  try {
    rec.interspace = build_interspace(lo.mesh, hi.mesh, *fa, *fb, *lo.centroid, *hi.centroid);
  } catch (const Error& e) {
    warn(to_string(e.kind()), e.what(), true);
    return out;
  }
  rec.hu = interspace_hu(vol, rec.interspace.mesh);
  if (rec.hu.excluded_vertebra_voxels > 0) rec.flags.push_back("excluded_vertebra_voxels");
  if (rec.hu.voxel_count == 0) {
    rec.flags.push_back("no_interior_voxels");
    warn("no_interior_voxels", "no background voxel centroid lies inside the interspace surface");
  }
  out.record = std::move(rec);
  return out;
}

}  // namespace detail

/// Full pipeline over an in-memory volume. Per-vertebra and per-pair
/// failures become warnings; only contract violations of the config throw.
inline SpineReport run_pipeline(const LabeledVolume& vol, const PipelineConfig& cfg) {
  if (cfg.criteria.empty()) throw Error(ErrorKind::contract, "at least one mapping criterion is required");
  SpineReport rep;
  rep.config = detail::config_json(cfg);
  rep.config_hash = detail::fnv1a_hex(rep.config.dump());
  rep.dims = vol.dims();
  rep.spacing = vol.spacing();
  rep.criteria = cfg.criteria;
  const auto [mn, mx] = std::minmax_element(vol.hu().begin(), vol.hu().end());
  rep.hu_min = *mn;
  rep.hu_max = *mx;

  const auto counts = vol.label_counts();
  rep.label_count = counts.size();
  const AnnotationIssues issues = annotation_issues(vol);
  for (int l : issues.centroids_without_voxels) {
    rep.warnings.push_back({"volume", {l}, "centroid_without_voxels", "centroid annotation for an absent label", false});
  }
  if (counts.empty()) {
    rep.warnings.push_back({"volume", {}, "no_vertebrae", "label field holds no vertebra voxels", false});
    return rep;
  }

  KdeSettings kde;
  kde.min_bandwidth = cfg.kde.min_bandwidth.value_or(std::max({vol.spacing().x, vol.spacing().y, vol.spacing().z}));
  kde.bandwidth_scale = cfg.kde.bandwidth_scale;

  std::vector<int> labels;
  for (const auto& [l, n] : counts) labels.push_back(l);
  std::vector<detail::VertebraOutcome> vo(labels.size());
  parallel_for(labels.size(), [&](std::size_t i) { vo[i] = detail::process_vertebra(vol, labels[i], cfg, kde); },
               cfg.workers);
  for (auto& o : vo) {
    if (o.record) rep.vertebrae.push_back(std::move(*o.record));
    for (auto& w : o.warnings) rep.warnings.push_back(std::move(w));
  }

  std::vector<std::pair<int, int>> pairs;
  if (!cfg.pairs.empty()) {
    for (auto [a, b] : cfg.pairs) pairs.emplace_back(std::min(a, b), std::max(a, b));
  } else {
    for (std::size_t i = 1; i < rep.vertebrae.size(); ++i) {
      const int a = rep.vertebrae[i - 1].label;
      const int b = rep.vertebrae[i].label;
      if (b - a != 1 && !cfg.allow_nonadjacent_pairs) {
        rep.warnings.push_back({"pair", {a, b}, "nonadjacent_labels",
                                "labels are not consecutive integers; pair skipped", true});
        continue;
      }
      pairs.emplace_back(a, b);
    }
  }
  std::vector<detail::PairOutcome> po(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const VertebraRecord* lo = rep.vertebra(pairs[i].first);
    const VertebraRecord* hi = rep.vertebra(pairs[i].second);
    if (!lo || !hi || lo == hi) {
      po[i].warnings.push_back({"pair", {pairs[i].first, pairs[i].second}, "missing_vertebra",
                                "pair refers to a vertebra without a record", true});
      return;
    }
    try {
      po[i] = detail::process_pair(vol, *lo, *hi);
    } catch (const Error& e) {
      po[i].warnings.push_back({"pair", {lo->label, hi->label}, to_string(e.kind()), e.what(), true});
    }
  }, cfg.workers);
  for (auto& o : po) {
    if (o.record) rep.pairs.push_back(std::move(*o.record));
    for (auto& w : o.warnings) rep.warnings.push_back(std::move(w));
  }
  return rep;
}

inline SpineReport run_pipeline(const PipelineConfig& cfg) { return run_pipeline(load_volume(cfg.input), cfg); }

namespace detail {

inline std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_real(*v) : std::string(); }

inline std::string join_flags(const std::vector<std::string>& flags) {
  std::string s;
  for (const auto& f : flags) {
    if (!s.empty()) s += ';';
    s += f;
  }
  return s;
}

inline nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

inline nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

inline std::optional<double> criterion_mean(const SpineReport& r, const VertebraRecord& v, MappingCriterion c,
                                            Region region) {
  for (std::size_t k = 0; k < r.criteria.size(); ++k) {
    if (r.criteria[k] == c && v.region_hu[k]) return v.region_hu[k]->of(region);
  }
  return std::nullopt;
}

inline Rgb region_color(Region r) {
  switch (r) {
    case Region::body: return {255, 0, 0};
    case Region::arch: return {0, 0, 255};
    case Region::process: return {0, 255, 0};
  }
  return {0, 0, 0};
}

}  // namespace detail

inline std::string vertebrae_csv(const SpineReport& r) {
  std::string out = std::string(kVertebraeCsvHeader) + "\n";
  constexpr MappingCriterion kCrit[3] = {MappingCriterion::internal, MappingCriterion::euclidean,
                                         MappingCriterion::external};
  for (const auto& v : r.vertebrae) {
    std::vector<std::string> cells{std::to_string(v.label), detail::fmt_real(v.metrics.area),
                                   detail::fmt_real(v.metrics.volume)};
    for (int k = 0; k < 3; ++k) {
      if (!v.thresholds) {
        cells.emplace_back();
        continue;
      }
      const auto& t = v.thresholds->thresholds;
      cells.push_back(detail::fmt_real(k == 0 ? t.t1 : k == 1 ? t.t2 : t.t3));
    }
    for (Region region : {Region::body, Region::arch, Region::process}) {
      for (MappingCriterion c : kCrit) cells.push_back(detail::fmt_opt(detail::criterion_mean(r, v, c, region)));
    }
    if (v.roi) {
      cells.push_back(detail::fmt_real(v.roi->radius));
      cells.push_back(std::to_string(v.roi->voxel_count));
      cells.push_back(detail::fmt_real(v.roi->hu_mean));
      cells.push_back(std::to_string(v.roi->hu_sum));
    } else {
      cells.insert(cells.end(), 4, std::string());
    }
    cells.push_back(detail::join_flags(v.flags));
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += "\n";
  }
  return out;
}

inline std::string pairs_csv(const SpineReport& r) {
  std::string out = std::string(kPairsCsvHeader) + "\n";
  for (const auto& p : r.pairs) {
    out += std::to_string(p.label_lo) + "," + std::to_string(p.label_hi) + "," +
           detail::fmt_real(p.interspace.centroid_distance) + "," + detail::fmt_real(p.interspace.volume) + "," +
           detail::fmt_opt(p.hu.hu_mean) + "," + std::to_string(p.hu.hu_sum) + "," +
           std::to_string(p.hu.voxel_count) + "," + detail::join_flags(p.flags) + "\n";
  }
  return out;
}

inline nlohmann::json report_json(const SpineReport& r) {
  nlohmann::json j;
  j["tool"] = {{"name", "spinekit"}, {"version", kVersion}};
  j["config"] = r.config;
  j["config_hash"] = r.config_hash;
  j["volume"] = {{"dims", {r.dims[0], r.dims[1], r.dims[2]}},
                 {"spacing_mm", detail::vec_json(r.spacing)},
                 {"labels", r.label_count}};
  j["texture_window_hu"] = {r.hu_min, r.hu_max};
  j["notes"] = {
      {"process_region_threshold", "t3"},
      {"classification", "d < t1 body, t1 <= d < t2 arch, d >= t2 process"},
      {"hu_convention", "air is -1000 HU"},
      {"voxel_centroid", "(index + 0.5) * spacing, origin at the volume corner"},
  };
  nlohmann::json verts = nlohmann::json::array();
  for (const auto& v : r.vertebrae) {
    nlohmann::json e;
    e["label"] = v.label;
    e["voxels"] = v.voxel_count;
    e["mesh"] = {{"vertices", v.mesh.vertices.size()},
                 {"triangles", v.mesh.triangles.size()},
                 {"alpha_mm", v.mesh.alpha_used},
                 {"area_mm2", v.metrics.area},
                 {"volume_mm3", v.metrics.volume}};
    e["centroid_mm"] = v.centroid ? detail::vec_json(*v.centroid) : nlohmann::json();
    if (v.thresholds) {
      const auto& t = *v.thresholds;
      e["thresholds"] = {{"t1_mm", t.thresholds.t1},
                         {"t2_mm", t.thresholds.t2},
                         {"t3_mm", t.thresholds.t3},
                         {"degraded", t.degraded},
                         {"modes_mm", t.modes},
                         {"inflections_mm", t.inflections},
                         {"bandwidth_mm", detail::opt_json(v.bandwidth)}};
    } else {
      e["thresholds"] = nullptr;
    }
    if (v.regions) {
      const auto c = v.regions->counts();
      e["region_vertices"] = {{"body", c[0]}, {"arch", c[1]}, {"process", c[2]}};
    } else {
      e["region_vertices"] = nullptr;
    }
    nlohmann::json hu = nlohmann::json::object();
    for (std::size_t k = 0; k < r.criteria.size(); ++k) {
      const auto& s = v.region_hu[k];
      hu[to_string(r.criteria[k])] =
          s ? nlohmann::json{{"body", detail::opt_json(s->mean[0])},
                             {"arch", detail::opt_json(s->mean[1])},
                             {"process", detail::opt_json(s->mean[2])}}
            : nlohmann::json();
    }
    e["mean_hu"] = hu;
    e["roi"] = v.roi ? nlohmann::json{{"radius_mm", v.roi->radius},
                                      {"voxels", v.roi->voxel_count},
                                      {"hu_mean", v.roi->hu_mean},
                                      {"hu_sum", v.roi->hu_sum}}
                     : nlohmann::json();
    e["flags"] = v.flags;
    verts.push_back(std::move(e));
  }
  j["vertebrae"] = std::move(verts);
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"label_lo", p.label_lo},
                     {"label_hi", p.label_hi},
                     {"centroid_distance_mm", p.interspace.centroid_distance},
                     {"volume_mm3", p.interspace.volume},
                     {"area_mm2", p.interspace.area},
                     {"alpha_mm", p.interspace.mesh.alpha_used},
                     {"facing_vertices", {p.facing_lo, p.facing_hi}},
                     {"hu_mean", detail::opt_json(p.hu.hu_mean)},
                     {"hu_sum", p.hu.hu_sum},
                     {"voxels", p.hu.voxel_count},
                     {"excluded_vertebra_voxels", p.hu.excluded_vertebra_voxels},
                     {"flags", p.flags}});
  }
  j["pairs"] = std::move(pairs);
  nlohmann::json warns = nlohmann::json::array();
  for (const auto& w : r.warnings) {
    warns.push_back({{"scope", w.scope},
                     {"labels", w.labels},
                     {"code", w.code},
                     {"message", w.message},
                     {"dropped", w.dropped}});
  }
  j["warnings"] = std::move(warns);
  return j;
}

/// Writes region and texture PLYs per vertebra, an interspace PLY per pair,
/// vertebrae.csv, pairs.csv and report.json. Returns the written paths.
inline std::vector<std::filesystem::path> emit_outputs(const SpineReport& r, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::filesystem::path& p, const std::string& body) {
    try {
      io::write_text(p, body);
    } catch (const Error& e) {
      std::string manifest;
      for (const auto& w : written) manifest += "\n  " + w.string();
      throw Error(ErrorKind::io, std::string(e.what()) + "; files written before the failure:" +
                                     (manifest.empty() ? std::string(" none") : manifest));
    }
    written.push_back(p);
  };
  try {
    std::filesystem::create_directories(dir);
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error(ErrorKind::io, e.what());
  }
  const double lo = r.hu_min;
  const double span = static_cast<double>(r.hu_max) - lo;
  for (const auto& v : r.vertebrae) {
    const std::string stem = "vertebra_" + std::to_string(v.label);
    std::vector<Rgb> colors(v.mesh.vertices.size(), Rgb{160, 160, 160});  // unsegmented
    if (v.regions) {
      for (std::size_t i = 0; i < colors.size(); ++i) colors[i] = detail::region_color(v.regions->regions[i]);
    }
    put(dir / (stem + "_regions.ply"), encode_ply(v.mesh, &colors));
    for (std::size_t k = 0; k < r.criteria.size(); ++k) {
      if (!v.textures[k]) continue;
      std::vector<Rgb> grey(v.mesh.vertices.size());
      for (std::size_t i = 0; i < grey.size(); ++i) {
        const double g = span > 0.0 ? 255.0 * (v.textures[k]->hu[i] - lo) / span : 0.0;
        const auto u = static_cast<std::uint8_t>(std::lround(std::clamp(g, 0.0, 255.0)));
        grey[i] = {u, u, u};
      }
      put(dir / (stem + "_" + to_string(r.criteria[k]) + ".ply"), encode_ply(v.mesh, &grey));
    }
  }
  for (const auto& p : r.pairs) {
    put(dir / ("interspace_" + std::to_string(p.label_lo) + "_" + std::to_string(p.label_hi) + ".ply"),
        encode_ply(p.interspace.mesh));
  }
  put(dir / "vertebrae.csv", vertebrae_csv(r));
  put(dir / "pairs.csv", pairs_csv(r));
  put(dir / "report.json", report_json(r).dump(2) + "\n");
  return written;
}

}  // namespace spinekit
