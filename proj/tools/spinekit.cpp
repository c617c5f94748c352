#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinekit/spinekit.hpp"

namespace {

spinekit::AlphaMode parse_alpha(const std::string& s) {
  if (s == "auto") return spinekit::AlphaMode::automatic();
  if (s == "hull" || s == "inf") return spinekit::AlphaMode::convex_hull();
  std::size_t used = 0;
  double r = 0.0;
  try {
    r = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(r > 0.0)) throw spinekit::Error(spinekit::ErrorKind::parse, "bad --alpha '" + s + "'");
  return spinekit::AlphaMode::fixed(r);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "3-4,4-5" -> {(3,4), (4,5)}
std::vector<std::pair<int, int>> parse_pairs(const std::string& s) {
  std::vector<std::pair<int, int>> out;
  for (const auto& item : split(s, ',')) {
    const auto parts = split(item, '-');
    if (parts.size() != 2) throw spinekit::Error(spinekit::ErrorKind::parse, "bad pair '" + item + "'");
    out.emplace_back(std::stoi(parts[0]), std::stoi(parts[1]));
  }
  return out;
}

int run(const std::string& input, const std::string& out, const std::string& alpha, const std::string& criteria,
        const std::string& pairs, bool nonadjacent, const std::string& subject, double min_bw, double bw_scale,
        unsigned workers) {
  spinekit::PipelineConfig cfg;
  cfg.input = input;
  cfg.out_dir = out;
  cfg.alpha = parse_alpha(alpha);
  cfg.criteria.clear();
  for (const auto& c : split(criteria, ',')) cfg.criteria.push_back(spinekit::parse_criterion(c));
  if (!pairs.empty()) cfg.pairs = parse_pairs(pairs);
  cfg.allow_nonadjacent_pairs = nonadjacent;
  cfg.subject = subject;
  if (min_bw >= 0.0) cfg.kde.min_bandwidth = min_bw;
  cfg.kde.bandwidth_scale = bw_scale;
  cfg.workers = workers;
  const spinekit::SpineReport rep = spinekit::run_pipeline(cfg);
  const auto files = spinekit::emit_outputs(rep, cfg.out_dir);
  for (const auto& w : rep.warnings) {
    std::cerr << "warning [" << w.scope;
    for (int l : w.labels) std::cerr << " " << l;
    std::cerr << "] " << w.code << ": " << w.message << (w.dropped ? " (dropped)" : "") << "\n";
  }
  std::cout << rep.vertebrae.size() << " vertebrae, " << rep.pairs.size() << " pairs, " << rep.warnings.size()
            << " warnings; " << files.size() << " files in " << cfg.out_dir.string() << "\n";
  return EXIT_SUCCESS;
}

int phantom(const std::string& spec_path, const std::string& out) {
  const auto spec = spinekit::parse_phantom_spec(spinekit::io::read_json(spec_path));
  const spinekit::Phantom ph = spinekit::make_phantom(spec);
  const auto desc = spinekit::write_volume(ph.volume, out);
  spinekit::io::write_text(std::filesystem::path(out) / "truth.json", ph.truth.dump(2) + "\n");
  std::cout << desc.string() << "\n";
  return EXIT_SUCCESS;
}

// VerSe-style [{"label":L,"X":..,"Y":..,"Z":..}, ...] to {"label","voxel"}.
int convert_centroids(const std::string& in, const std::string& out, const std::string& order) {
  if (order != "xyz" && order != "zyx") {
    throw spinekit::Error(spinekit::ErrorKind::parse, "axis order must be xyz or zyx");
  }
  const nlohmann::json src = spinekit::io::read_json(in);
  nlohmann::json dst = nlohmann::json::array();
  for (const auto& e : src) {
    if (!e.contains("label")) continue;  // direction header entries
    double a = e.at("X").get<double>(), b = e.at("Y").get<double>(), c = e.at("Z").get<double>();
    if (order == "zyx") std::swap(a, c);
    dst.push_back({{"label", e.at("label").get<int>()}, {"voxel", {a, b, c}}});
  }
  spinekit::io::write_text(out, dst.dump(2) + "\n");
  return EXIT_SUCCESS;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinekit: vertebra surface, segmentation and intervertebral space analysis of labelled CT"};
  app.set_version_flag("--version", spinekit::kVersion);
  app.require_subcommand(1);

  std::string input, out, alpha = "auto", criteria = "internal,euclidean,external", pairs, subject;
  bool nonadjacent = false;
  double min_bw = -1.0, bw_scale = 1.0;
  unsigned workers = 0;
  auto* run_cmd = app.add_subcommand("run", "run the full pipeline on a labelled volume");
  run_cmd->add_option("--input", input, "volume.json descriptor")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out, "output directory")->required();
  run_cmd->add_option("--alpha", alpha, "auto, hull or a radius in mm");
  run_cmd->add_option("--criteria", criteria, "comma-separated subset of internal,euclidean,external");
  run_cmd->add_option("--pairs", pairs, "explicit pairs, e.g. 20-21,21-22");
  run_cmd->add_flag("--allow-nonadjacent", nonadjacent, "pair consecutive present labels even across gaps");
  run_cmd->add_option("--subject", subject, "free-text subject tag");
  run_cmd->add_option("--min-bandwidth", min_bw, "KDE bandwidth floor in mm (default: one voxel)");
  run_cmd->add_option("--bandwidth-scale", bw_scale, "factor applied to the Silverman bandwidth");
  run_cmd->add_option("--workers", workers, "worker threads (0 = all cores)");

  std::string spec_path, ph_out;
  auto* ph_cmd = app.add_subcommand("phantom", "write a synthetic phantom volume and its ground truth");
  ph_cmd->add_option("--spec", spec_path, "phantom spec JSON")->required()->check(CLI::ExistingFile);
  ph_cmd->add_option("--out", ph_out, "output directory")->required();

  std::string cc_in, cc_out, order = "xyz";
  auto* cc_cmd = app.add_subcommand("convert-centroids", "convert VerSe centroid JSON to spinekit format");
  cc_cmd->add_option("--input", cc_in, "VerSe centroid JSON")->required()->check(CLI::ExistingFile);
  cc_cmd->add_option("--out", cc_out, "output centroids.json")->required();
  cc_cmd->add_option("--axis-order", order, "axis order of X/Y/Z in the source: xyz or zyx")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) {
      return run(input, out, alpha, criteria, pairs, nonadjacent, subject, min_bw, bw_scale, workers);
    }
    if (*ph_cmd) return phantom(spec_path, ph_out);
    if (*cc_cmd) return convert_centroids(cc_in, cc_out, order);
  } catch (const spinekit::Error& e) {
    std::cerr << "spinekit: " << spinekit::to_string(e.kind()) << " error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "spinekit: " << e.what() << "\n";
    return 2;
  }
  return EXIT_FAILURE;
}
