#include "rummi/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rummi/clustering.hpp"
#include "rummi/corrector.hpp"
#include "rummi/evaluation.hpp"
#include "rummi/io.hpp"
#include "rummi/rules.hpp"

namespace rummi::cli {

namespace {

using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse:
    case ErrorCode::UnsatisfiableParams:
      return kParseError;
    case ErrorCode::CrossReference:
    case ErrorCode::IdMismatch:
      return kCrossReference;
    default:
      return kDomainFailure;
  }
}

json names(std::span<const TileIdentity> ids) {
  json out = json::array();
  for (const auto id : ids) out.push_back(to_string(id));
  return out;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::Parse, "cannot write '" + path + "'");
  file << text;
}

ClusterConfig cluster_config(double gap_factor, double angle_tol_deg) {
  ClusterConfig cfg;
  cfg.gap_factor = gap_factor;
  cfg.angle_tol = angle_tol_deg * std::numbers::pi / 180.0;
  return cfg;
}

int cmd_validate(const std::string& path, std::ostream& out) {
  const auto file = io::parse_sets_file(io::read_file(path));
  bool all_valid = true;
  for (std::size_t i = 0; i < file.sets.size(); ++i) {
    const auto kind = is_valid_set(file.sets[i]);
    all_valid = all_valid && kind.has_value();
    out << "set " << i << ": " << (kind ? to_string(*kind) : std::string_view("invalid")) << '\n';
  }
  return all_valid ? kOk : kDomainFailure;
}

int cmd_cluster(const std::string& path, const ClusterConfig& cfg, const std::string& out_path, std::ostream& out) {
  const auto file = io::parse_detection_file(io::read_file(path));
  json doc{{"schema_version", io::kSchemaVersion}, {"images", json::array()}};
  for (const auto& image : file.images) {
    json clusters = json::array();
    for (const auto& c : cluster_tiles(io::to_boxes(image), cfg)) {
      clusters.push_back({{"members", c.members}, {"axis", {c.axis.x(), c.axis.y()}}, {"spacing", c.spacing}});
    }
    doc["images"].push_back({{"image_id", image.image_id}, {"clusters", std::move(clusters)}});
  }
  emit(doc.dump(2) + "\n", out_path, out);
  return kOk;
}

int cmd_correct(const std::string& det_path, const std::string& conf_path, const ClusterConfig& cfg,
                const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto detections = io::parse_detection_file(io::read_file(det_path));
  const auto confidences = io::parse_confidence_file(io::read_file(conf_path));
  io::cross_check(detections, confidences);

  std::map<std::string, const io::ConfidenceImage*> conf_by_id;
  for (const auto& image : confidences.images) conf_by_id[image.image_id] = &image;

  std::size_t corrected = 0, changed = 0, uncorrectable = 0;
  json doc{{"schema_version", io::kSchemaVersion}, {"images", json::array()}};
  for (const auto& image : detections.images) {
    json sets = json::array();
    for (const auto& cluster : cluster_tiles(io::to_boxes(image), cfg)) {
      const auto k = cluster.members.size();
      if (k < static_cast<std::size_t>(kMinSetSize) || k > static_cast<std::size_t>(kMaxSetSize)) {
        ++uncorrectable;
        sets.push_back({{"status", "uncorrectable"},
                        {"members", cluster.members},
                        {"reason", "cluster has " + std::to_string(k) + " tiles; sets need 3 to 13"}});
        continue;
      }
      const auto m = io::matrix_for(*conf_by_id.at(image.image_id), cluster.members);
      const auto t0 = std::chrono::steady_clock::now();
      const auto result = correct_set(m);
      const auto t1 = std::chrono::steady_clock::now();
      ++corrected;
      changed += result.assignment.identities != result.raw_argmax;
      sets.push_back({{"status", "corrected"},
                      {"members", cluster.members},
                      {"kind", std::string(to_string(result.assignment.kind))},
                      {"identities", names(result.assignment.identities)},
                      {"score", result.assignment.score},
                      {"raw_argmax", names(result.raw_argmax)},
                      {"raw_valid", result.raw_valid},
                      {"score_gap", result.score_gap},
                      {"wall_time_s", std::chrono::duration<double>(t1 - t0).count()}});
    }
    doc["images"].push_back({{"image_id", image.image_id}, {"sets", std::move(sets)}});
  }
  emit(doc.dump(2) + "\n", out_path, out);
  err << "images: " << detections.images.size() << ", sets corrected: " << corrected
      << ", changed by correction: " << changed << ", uncorrectable clusters: " << uncorrectable << '\n';
  return kOk;
}

int cmd_simulate(const SweepConfig& cfg, const std::string& out_path, const std::string& per_seed_path,
                 std::ostream& out, std::ostream& err) {
  const auto report = sweep(cfg);
  emit(io::sweep_csv(report), out_path, out);
  if (!per_seed_path.empty()) emit(io::sweep_jsonl(report), per_seed_path, out);

  err << "quality  raw_image  corrected_image  gain\n";
  char line[128];
  for (std::size_t i = 0; i + 1 < report.rows.size(); i += 2) {
    const auto& raw = report.rows[i];
    const auto& cor = report.rows[i + 1];
    std::snprintf(line, sizeof line, "%7.3f  %9.4f  %15.4f  %+.4f%s\n", raw.quality, raw.image_mean, cor.image_mean,
                  cor.image_mean - raw.image_mean, cor.image_mean >= raw.image_mean ? "" : "  (raw ahead)");
    err << line;
  }
  return kOk;
}

int cmd_bench(int tiles, int samples, std::uint64_t seed, std::ostream& out) {
  const auto stats = measure_latency(tiles, samples, seed);
  char line[256];
  std::snprintf(line, sizeof line, "tiles=%d samples=%d median_ms=%.4f p99_ms=%.4f max_ms=%.4f\n", stats.tiles,
                stats.samples, stats.median_ms, stats.p99_ms, stats.max_ms);
  out << line;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rummikub set correction: validate, cluster, correct and simulate"};
  app.name("rummi");
  app.require_subcommand(1);

  double gap_factor = ClusterConfig{}.gap_factor;
  double angle_tol_deg = 25.0;
  std::string out_path;

  std::string sets_path;
  auto* validate = app.add_subcommand("validate", "Check that every set in a file is a valid group or run");
  validate->add_option("sets", sets_path, "JSON file with a 'sets' array")->required();

  std::string det_path, conf_path;
  auto* cluster = app.add_subcommand("cluster", "Group detection boxes into ordered sets");
  cluster->add_option("detections", det_path, "Detection JSON file")->required();

  auto* correct = app.add_subcommand("correct", "Cluster detections and correct each set");
  correct->add_option("detections", det_path, "Detection JSON file")->required();
  correct->add_option("confidences", conf_path, "Confidence JSON file")->required();

  for (auto* sub : {cluster, correct}) {
    sub->add_option("--gap-factor", gap_factor, "Max center distance in mean tile widths")
        ->check(CLI::PositiveNumber);
    sub->add_option("--angle-tol", angle_tol_deg, "Max deviation from the tile axis, degrees")
        ->check(CLI::Range(0.0, 90.0));
    sub->add_option("--out", out_path, "Write JSON here instead of stdout");
  }

  SweepConfig sweep_cfg;
  std::string per_seed_path;
  auto* simulate = app.add_subcommand("simulate", "Raw vs corrected accuracy sweep over classifier quality");
  simulate->add_option("--grid", sweep_cfg.qualities, "Comma-separated quality levels in [0, 1]")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--seeds", sweep_cfg.n_seeds, "Seeds per level")->check(CLI::PositiveNumber);
  simulate->add_option("--images", sweep_cfg.images_per_seed, "Images per seed")->check(CLI::PositiveNumber);
  simulate->add_option("--master-seed", sweep_cfg.master_seed, "Seed of the whole sweep");
  simulate->add_option("--concentration", sweep_cfg.concentration, "Dirichlet concentration of the noise")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--min-sets", sweep_cfg.gen.min_sets, "Fewest sets per image");
  simulate->add_option("--max-sets", sweep_cfg.gen.max_sets, "Most sets per image");
  simulate->add_option("--min-size", sweep_cfg.gen.min_set_size, "Smallest set size");
  simulate->add_option("--max-size", sweep_cfg.gen.max_set_size, "Largest set size");
  simulate->add_option("--joker-prob", sweep_cfg.gen.joker_probability, "Per-tile joker probability");
  simulate->add_option("--jitter", sweep_cfg.gen.jitter, "Center jitter as a fraction of tile width");
  simulate->add_option("--gap-factor", sweep_cfg.cluster.gap_factor, "Clustering distance factor")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", out_path, "Write CSV here instead of stdout");
  simulate->add_option("--per-seed", per_seed_path, "Also write per-seed JSON lines here");

  int bench_tiles = kMaxSetSize;
  int bench_samples = 1000;
  std::uint64_t bench_seed = 0;
  auto* bench = app.add_subcommand("bench", "Latency of set correction on random matrices");
  bench->add_option("--tiles", bench_tiles, "Tiles per set")->check(CLI::Range(kMinSetSize, kMaxSetSize));
  bench->add_option("--samples", bench_samples, "Number of sets")->check(CLI::PositiveNumber);
  bench->add_option("--master-seed", bench_seed, "Seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  }

  try {
    if (*validate) return cmd_validate(sets_path, out);
    if (*cluster) return cmd_cluster(det_path, cluster_config(gap_factor, angle_tol_deg), out_path, out);
    if (*correct) {
      return cmd_correct(det_path, conf_path, cluster_config(gap_factor, angle_tol_deg), out_path, out, err);
    }
    if (*simulate) {
      sweep_cfg.cluster.angle_tol = ClusterConfig{}.angle_tol;
      return cmd_simulate(sweep_cfg, out_path, per_seed_path, out, err);
    }
    if (*bench) return cmd_bench(bench_tiles, bench_samples, bench_seed, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  }
  return kParseError;
}

}  // namespace rummi::cli
