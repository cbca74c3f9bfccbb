#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rummi/clustering.hpp"
#include "rummi/core.hpp"
#include "rummi/corrector.hpp"

namespace rummi {

/// Synthetic board layout parameters.
struct GenParams {
  int min_sets = 1;
  int max_sets = 4;
  int min_set_size = 3;
  int max_set_size = 13;
  /// Per-tile chance of being swapped for a joker, subject to max_jokers per board.
  double joker_probability = 2.0 / 106.0;  // two jokers in a 106-tile game
  int max_jokers = kMaxJokers;

  double tile_width = 60.0;
  double tile_height = 80.0;
  /// Center-to-center distance along a set, in tile widths.
  double tile_pitch = 1.1;
  /// Max center displacement, as a fraction of tile width.
  double jitter = 0.05;
  double angle_jitter_deg = 2.0;
  /// Minimum free space between the bounding circles of two sets, in tile widths.
  double separation = 4.0;
};

/// Throws Error(UnsatisfiableParams) for out-of-range parameters.
void validate_params(const GenParams& params);

struct GroundTruthState {
  std::vector<IdentityList> sets;
  /// Tile ids of each set, aligned with `sets`.
  std::vector<std::vector<std::string>> set_members;
  /// One box per tile, grouped by set in set order.
  std::vector<DetectionBox> layout;
  std::uint64_t seed = 0;

  std::size_t tile_count() const { return layout.size(); }
};

/// Deterministic in `seed`.
GroundTruthState generate_state(const GenParams& params, std::uint64_t seed);

struct NoiseParams {
  /// 0 = truth-independent scores, 1 = one-hot truth.
  double quality = 1.0;
  /// Dirichlet concentration of the random component.
  double concentration = 1.0;
  std::uint64_t seed = 0;
};

/// Simulated classifier output, one matrix per ground-truth set with rows in
/// set order. Per tile: color and number channels are q * one_hot + (1 - q) *
/// Dirichlet(concentration) draws. The joker channel is q * [tile is joker] +
/// (1 - q) * u, where u is the joker share of a symmetric 53-class Dirichlet.
/// A joker's color and number channels mix towards uniform instead of one-hot.
std::vector<ConfidenceMatrixd> corrupt(const GroundTruthState& truth, const NoiseParams& noise);

struct Metrics {
  std::size_t tiles_correct = 0;
  std::size_t tiles_total = 0;
  std::size_t sets_correct = 0;
  std::size_t sets_total = 0;
  std::size_t images_correct = 0;
  std::size_t images_total = 0;

  double tile_accuracy() const { return ratio(tiles_correct, tiles_total); }
  double set_accuracy() const { return ratio(sets_correct, sets_total); }
  double image_accuracy() const { return ratio(images_correct, images_total); }

  Metrics& operator+=(const Metrics& other);

private:
  static double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  }
};

using Predictions = std::map<std::string, TileIdentity>;

/// Metrics for a single image. A set counts as correct only when all its
/// tiles are correct and some cluster holds exactly its members.
/// Throws Error(IdMismatch) when predictions do not cover exactly the truth tiles.
Metrics evaluate(const GroundTruthState& truth, const Predictions& predictions,
                 std::span<const Cluster> clusters);

/// Per-tile argmax over each tile's confidence row.
Predictions predict_raw(const GroundTruthState& truth, std::span<const ConfidenceMatrixd> confidences);

/// Clusters are corrected as sets; clusters outside [3, 13] tiles keep the
/// per-tile argmax.
Predictions predict_corrected(const GroundTruthState& truth, std::span<const ConfidenceMatrixd> confidences,
                              std::span<const Cluster> clusters, const CorrectorConfig& cfg = {});

enum class Pipeline { Raw, Corrected };
std::string_view to_string(Pipeline p);

inline GenParams no_jokers() {
  GenParams p;
  p.joker_probability = 0.0;
  return p;
}

struct SweepConfig {
  std::vector<double> qualities = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int n_seeds = 10;
  int images_per_seed = 20;
  /// Fitted so that q = 0.1 lands near the low-data end of the classifier
  /// curves (raw image accuracy ~5%, corrected ~55%).
  double concentration = 11.0;
  std::uint64_t master_seed = 0;
  /// No jokers: the simulated classifiers, like real color and number networks,
  /// have no joker output.
  GenParams gen = no_jokers();
  ClusterConfig cluster;
  CorrectorConfig corrector;
  /// 0 = hardware concurrency.
  unsigned threads = 0;
};

/// Metrics of one (quality, seed, pipeline) batch.
struct SweepCell {
  double quality = 0.0;
  int seed = 0;
  Pipeline pipeline = Pipeline::Raw;
  Metrics metrics;
};

struct SweepRow {
  double quality = 0.0;
  Pipeline pipeline = Pipeline::Raw;
  int n_seeds = 0;
  double tile_mean = 0.0, tile_std = 0.0;
  double set_mean = 0.0, set_std = 0.0;
  double image_mean = 0.0, image_std = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<SweepCell> cells;
};

/// Raw vs corrected pipelines over quality levels x seeds. Cells run in
/// parallel and are reduced in (quality, seed) order, so the report does not
/// depend on the thread count. Standard deviations are sample (n - 1).
SweepReport sweep(const SweepConfig& cfg);

struct LatencyStats {
  int tiles = 0;
  int samples = 0;
  double median_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
};

/// Wall-clock latency of correct_set on random matrices (uniform scores on
/// every channel) of the given size.
LatencyStats measure_latency(int tiles, int samples, std::uint64_t seed);

/// Thread count from RUMMI_THREADS, else hardware concurrency.
unsigned default_thread_count();

}  // namespace rummi
