#include "rummi/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>

#include "rummi/core.hpp"

namespace rummi {

namespace {

class DisjointSets {
public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void merge(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

Eigen::Vector2d axis_of(double angle) { return {std::cos(angle), std::sin(angle)}; }

// `members` holds box indices sorted by id.
Cluster build_cluster(std::span<const DetectionBox> boxes, const std::vector<std::size_t>& members) {
  Cluster out;
  if (members.size() == 1) {
    const auto& box = boxes[members.front()];
    out.members = {box.id};
    out.axis = axis_of(box.angle);
    return out;
  }

  Eigen::Matrix2Xd centers(2, static_cast<Eigen::Index>(members.size()));
  for (std::size_t i = 0; i < members.size(); ++i) centers.col(static_cast<Eigen::Index>(i)) = boxes[members[i]].center;
  const Eigen::Vector2d mean = centers.rowwise().mean();
  const Eigen::Matrix2Xd centered = centers.colwise() - mean;
  const Eigen::Matrix2d scatter = centered * centered.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(scatter);
  Eigen::Vector2d axis = solver.eigenvectors().col(1).normalized();

  const Eigen::VectorXd proj = axis.transpose() * centered;
  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto by_projection = [&](std::size_t a, std::size_t b) {
    if (proj(a) != proj(b)) return proj(a) < proj(b);
    return boxes[members[a]].id < boxes[members[b]].id;
  };
  std::sort(order.begin(), order.end(), by_projection);

  // Orient the axis so that the end member with the smaller id comes first.
  // The two ends are far apart on the axis, so this is stable under rotation.
  if (boxes[members[order.back()]].id < boxes[members[order.front()]].id) {
    axis = -axis;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (proj(a) != proj(b)) return proj(a) > proj(b);
      return boxes[members[a]].id < boxes[members[b]].id;
    });
  }
  out.axis = axis;

  std::vector<double> gaps;
  std::vector<double> widths;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& box = boxes[members[order[i]]];
    out.members.push_back(box.id);
    widths.push_back(box.width);
    if (i > 0) gaps.push_back((box.center - boxes[members[order[i - 1]]].center).norm());
  }
  out.spacing = median(gaps) / median(widths);
  return out;
}

}  // namespace

double normalize_axis_angle(double radians) {
  constexpr double pi = std::numbers::pi;
  double a = std::fmod(radians, pi);
  if (a <= -pi / 2) a += pi;
  if (a > pi / 2) a -= pi;
  return a;
}

void validate_box(const DetectionBox& box) {
  if (!box.center.allFinite() || !std::isfinite(box.width) || !std::isfinite(box.height) ||
      !std::isfinite(box.angle)) {
    throw Error(ErrorCode::Parse, "box '" + box.id + "' has non-finite geometry");
  }
  if (box.width <= 0.0 || box.height <= 0.0) {
    throw Error(ErrorCode::Parse, "box '" + box.id + "' has non-positive size");
  }
}

bool boxes_adjacent(const DetectionBox& a, const DetectionBox& b, const ClusterConfig& cfg) {
  const Eigen::Vector2d d = b.center - a.center;
  const double dist = d.norm();
  if (dist > cfg.gap_factor * 0.5 * (a.width + b.width)) return false;
  if (dist == 0.0) return true;
  const double min_cos = std::cos(cfg.angle_tol);
  // Undirected axes: compare |cos|.
  return std::abs(d.dot(axis_of(a.angle))) >= min_cos * dist &&
         std::abs(d.dot(axis_of(b.angle))) >= min_cos * dist;
}

std::vector<Cluster> cluster_tiles(std::span<const DetectionBox> boxes, const ClusterConfig& cfg) {
  for (const auto& box : boxes) validate_box(box);

  // Work in id order so every floating-point reduction sees the same sequence
  // regardless of input order.
  std::vector<std::size_t> by_id(boxes.size());
  std::iota(by_id.begin(), by_id.end(), std::size_t{0});
  std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) { return boxes[a].id < boxes[b].id; });

  DisjointSets components(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      if (boxes_adjacent(boxes[i], boxes[j], cfg)) components.merge(i, j);
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  std::vector<std::size_t> roots;
  for (const auto idx : by_id) {
    auto& group = groups[components.find(idx)];
    if (group.empty()) roots.push_back(components.find(idx));
    group.push_back(idx);
  }

  std::vector<Cluster> out;
  out.reserve(roots.size());
  for (const auto root : roots) out.push_back(build_cluster(boxes, groups[root]));
  return out;
}

ClusterScore cluster_metrics(std::span<const Cluster> predicted,
                             std::span<const std::vector<std::string>> truth) {
  std::map<std::string, std::size_t> predicted_label;
  for (std::size_t c = 0; c < predicted.size(); ++c) {
    for (const auto& id : predicted[c].members) {
      if (!predicted_label.emplace(id, c).second) {
        throw Error(ErrorCode::IdMismatch, "id '" + id + "' appears in two predicted clusters");
      }
    }
  }
  std::map<std::string, std::size_t> truth_label;
  for (std::size_t s = 0; s < truth.size(); ++s) {
    for (const auto& id : truth[s]) {
      if (!truth_label.emplace(id, s).second) {
        throw Error(ErrorCode::IdMismatch, "id '" + id + "' appears in two truth sets");
      }
    }
  }
  if (predicted_label.size() != truth_label.size() ||
      !std::equal(predicted_label.begin(), predicted_label.end(), truth_label.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw Error(ErrorCode::IdMismatch, "predicted and truth partitions cover different ids");
  }

  ClusterScore score;
  std::size_t exact = 0;
  for (const auto& set : truth) {
    const std::set<std::string> want(set.begin(), set.end());
    exact += std::any_of(predicted.begin(), predicted.end(), [&](const Cluster& c) {
      return std::set<std::string>(c.members.begin(), c.members.end()) == want;
    });
  }
  score.exact_match = truth.empty() ? 1.0 : static_cast<double>(exact) / static_cast<double>(truth.size());

  std::vector<std::pair<std::size_t, std::size_t>> labels;
  labels.reserve(truth_label.size());
  for (const auto& [id, t] : truth_label) labels.emplace_back(predicted_label.at(id), t);
  std::size_t agree = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      ++pairs;
      agree += (labels[i].first == labels[j].first) == (labels[i].second == labels[j].second);
    }
  }
  score.rand_index = pairs == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(pairs);
  return score;
}

}  // namespace rummi
