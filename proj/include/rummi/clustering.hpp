#pragma once

#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rummi {

/// Oriented tile rectangle in pixel coordinates. `angle` (radians, in
/// (-pi/2, pi/2]) is the direction of the box's width axis, which is the axis
/// along which neighbouring tiles of a set sit.
struct DetectionBox {
  std::string id;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double width = 1.0;
  double height = 1.0;
  double angle = 0.0;
};

/// Maps any angle onto (-pi/2, pi/2], the range of an undirected axis.
double normalize_axis_angle(double radians);

/// Throws Error(Parse) for non-finite geometry or non-positive size.
void validate_box(const DetectionBox& box);

struct ClusterConfig {
  /// Max center distance, in units of the pair's mean width.
  double gap_factor = 1.8;
  /// Max angle between the center-to-center line and each box's axis.
  double angle_tol = 25.0 * std::numbers::pi / 180.0;
};

struct Cluster {
  /// Ordered by projection onto `axis`, ascending.
  std::vector<std::string> members;
  Eigen::Vector2d axis = Eigen::Vector2d::UnitX();
  /// Median consecutive center gap over median member width.
  double spacing = 0.0;
};

/// Single-linkage grouping of boxes into sets. Two boxes are adjacent when
/// they are close relative to their widths and the line through their centers
/// runs along both boxes' axes. Each component is ordered along the principal
/// axis of its centers. Output is sorted by smallest member id and does not
/// depend on the input order.
std::vector<Cluster> cluster_tiles(std::span<const DetectionBox> boxes, const ClusterConfig& cfg = {});

/// Geometric adjacency test used by cluster_tiles.
bool boxes_adjacent(const DetectionBox& a, const DetectionBox& b, const ClusterConfig& cfg);

struct ClusterScore {
  /// Fraction of truth sets recovered exactly as unordered id sets.
  double exact_match = 0.0;
  double rand_index = 0.0;
};

/// Throws Error(IdMismatch) when the two partitions cover different ids.
ClusterScore cluster_metrics(std::span<const Cluster> predicted,
                             std::span<const std::vector<std::string>> truth);

}  // namespace rummi
