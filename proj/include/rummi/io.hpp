#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rummi/clustering.hpp"
#include "rummi/core.hpp"
#include "rummi/evaluation.hpp"

namespace rummi::io {

inline constexpr std::string_view kSchemaVersion = "1";

struct BoxRecord {
  std::string id;
  double cx = 0.0;
  double cy = 0.0;
  double w = 1.0;
  double h = 1.0;
  double angle_deg = 0.0;

  friend bool operator==(const BoxRecord&, const BoxRecord&) = default;
};

struct DetectionImage {
  std::string image_id;
  std::vector<BoxRecord> boxes;

  friend bool operator==(const DetectionImage&, const DetectionImage&) = default;
};

struct DetectionFile {
  std::string schema_version{kSchemaVersion};
  std::vector<DetectionImage> images;

  friend bool operator==(const DetectionFile&, const DetectionFile&) = default;
};

struct TileScores {
  std::array<double, kColorCount> color{};
  std::array<double, kNumberCount> number{};
  double joker = 0.0;

  friend bool operator==(const TileScores&, const TileScores&) = default;
};

struct ConfidenceImage {
  std::string image_id;
  std::map<std::string, TileScores> tiles;

  friend bool operator==(const ConfidenceImage&, const ConfidenceImage&) = default;
};

struct ConfidenceFile {
  std::string schema_version{kSchemaVersion};
  std::vector<ConfidenceImage> images;

  friend bool operator==(const ConfidenceFile&, const ConfidenceFile&) = default;
};

/// Input of `validate`: {"schema_version": "1", "sets": [["red-7", "joker", ...], ...]}.
struct SetsFile {
  std::string schema_version{kSchemaVersion};
  std::vector<IdentityList> sets;
};

// Parsers throw Error(Parse) on malformed JSON or schema violations.
DetectionFile parse_detection_file(std::string_view text);
ConfidenceFile parse_confidence_file(std::string_view text);
SetsFile parse_sets_file(std::string_view text);

std::string dump(const DetectionFile& file);
std::string dump(const ConfidenceFile& file);
std::string dump(const SetsFile& file);

/// Wire degrees to internal radians.
std::vector<DetectionBox> to_boxes(const DetectionImage& image);

/// Throws Error(CrossReference) unless both files list the same images and
/// every detected tile has confidences (and vice versa).
void cross_check(const DetectionFile& detections, const ConfidenceFile& confidences);

/// Rows in the order of `ids`. Throws Error(CrossReference) for unknown ids.
ConfidenceMatrixd matrix_for(const ConfidenceImage& image, std::span<const std::string> ids);

/// One row per (quality, pipeline): quality,pipeline,n_seeds, then mean and
/// std of tile, set and image accuracy.
std::string sweep_csv(const SweepReport& report);
/// One JSON object per (quality, seed, pipeline) cell with raw counts.
std::string sweep_jsonl(const SweepReport& report);

std::string read_file(const std::string& path);

}  // namespace rummi::io
