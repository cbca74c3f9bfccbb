#include "rummi/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rummi::io {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::Parse, what); }

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    schema_error(std::string("malformed JSON: ") + e.what());
  }
}

void check_version(const json& doc) {
  if (!doc.is_object()) schema_error("top level must be an object");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_string()) {
    schema_error("missing schema_version");
  }
  if (doc["schema_version"].get<std::string>() != kSchemaVersion) {
    schema_error("unsupported schema_version '" + doc["schema_version"].get<std::string>() + "'");
  }
}

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(where + ": missing '" + key + "'");
  return obj[key];
}

double number_at(const json& obj, const char* key, const std::string& where) {
  const auto& v = member(obj, key, where);
  if (!v.is_number()) schema_error(where + ": '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(where + ": '" + key + "' must be finite");
  return d;
}

std::string string_at(const json& obj, const char* key, const std::string& where) {
  const auto& v = member(obj, key, where);
  if (!v.is_string()) schema_error(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

const json& array_at(const json& obj, const char* key, const std::string& where) {
  const auto& v = member(obj, key, where);
  if (!v.is_array()) schema_error(where + ": '" + key + "' must be an array");
  return v;
}

double score_value(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d) || d < 0.0) schema_error(where + " must be finite and >= 0");
  return d;
}

TileScores parse_scores(const json& tile, const std::string& where) {
  if (!tile.is_object()) schema_error(where + " must be an object");
  TileScores s;

  const auto& colors = member(tile, "color", where);
  if (!colors.is_object()) schema_error(where + ": 'color' must be an object");
  std::array<bool, kColorCount> seen{};
  for (const auto& [name, value] : colors.items()) {
    const auto color = parse_color(name);
    if (!color) schema_error(where + ": unknown color '" + name + "'");
    if (seen[rank(*color)]) schema_error(where + ": color '" + name + "' given twice");
    seen[rank(*color)] = true;
    s.color[rank(*color)] = score_value(value, where + ".color." + name);
  }
  for (const Color c : kAllColors) {
    if (!seen[rank(c)]) schema_error(where + ": missing color '" + std::string(to_string(c)) + "'");
  }

  const auto& numbers = member(tile, "number", where);
  if (!numbers.is_object()) schema_error(where + ": 'number' must be an object");
  if (numbers.size() != kNumberCount) schema_error(where + ": 'number' needs keys \"1\"..\"13\"");
  for (int n = 1; n <= kNumberCount; ++n) {
    const auto key = std::to_string(n);
    if (!numbers.contains(key)) schema_error(where + ": missing number '" + key + "'");
    s.number[n - 1] = score_value(numbers[key], where + ".number." + key);
  }

  if (tile.contains("joker")) s.joker = score_value(tile["joker"], where + ".joker");
  return s;
}

}  // namespace

DetectionFile parse_detection_file(std::string_view text) {
  const json doc = parse_json(text);
  check_version(doc);
  DetectionFile file;
  for (const auto& img : array_at(doc, "images", "detections")) {
    DetectionImage image;
    image.image_id = string_at(img, "image_id", "image");
    const std::string where = "image '" + image.image_id + "'";
    std::set<std::string> ids;
    for (const auto& b : array_at(img, "boxes", where)) {
      BoxRecord box;
      box.id = string_at(b, "id", where);
      const std::string at = where + " box '" + box.id + "'";
      if (!ids.insert(box.id).second) schema_error(at + ": duplicate id");
      box.cx = number_at(b, "cx", at);
      box.cy = number_at(b, "cy", at);
      box.w = number_at(b, "w", at);
      box.h = number_at(b, "h", at);
      box.angle_deg = b.contains("angle_deg") ? number_at(b, "angle_deg", at) : 0.0;
      if (box.w <= 0.0 || box.h <= 0.0) schema_error(at + ": w and h must be > 0");
      image.boxes.push_back(std::move(box));
    }
    file.images.push_back(std::move(image));
  }
  return file;
}

ConfidenceFile parse_confidence_file(std::string_view text) {
  const json doc = parse_json(text);
  check_version(doc);
  ConfidenceFile file;
  for (const auto& img : array_at(doc, "images", "confidences")) {
    ConfidenceImage image;
    image.image_id = string_at(img, "image_id", "image");
    const std::string where = "image '" + image.image_id + "'";
    const auto& tiles = member(img, "tiles", where);
    if (!tiles.is_object()) schema_error(where + ": 'tiles' must be an object keyed by tile id");
    for (const auto& [id, tile] : tiles.items()) {
      image.tiles.emplace(id, parse_scores(tile, where + " tile '" + id + "'"));
    }
    file.images.push_back(std::move(image));
  }
  return file;
}

SetsFile parse_sets_file(std::string_view text) {
  const json doc = parse_json(text);
  check_version(doc);
  SetsFile file;
  for (const auto& set : array_at(doc, "sets", "sets file")) {
    if (!set.is_array()) schema_error("each set must be an array of tile names");
    IdentityList ids;
    for (const auto& tile : set) {
      if (!tile.is_string()) schema_error("tile names must be strings like \"red-7\" or \"joker\"");
      const auto id = parse_identity(tile.get<std::string>());
      if (!id) schema_error("unknown tile '" + tile.get<std::string>() + "'");
      ids.push_back(*id);
    }
    file.sets.push_back(std::move(ids));
  }
  return file;
}

std::string dump(const DetectionFile& file) {
  json doc{{"schema_version", file.schema_version}, {"images", json::array()}};
  for (const auto& image : file.images) {
    json boxes = json::array();
    for (const auto& b : image.boxes) {
      boxes.push_back({{"id", b.id}, {"cx", b.cx}, {"cy", b.cy}, {"w", b.w}, {"h", b.h}, {"angle_deg", b.angle_deg}});
    }
    doc["images"].push_back({{"image_id", image.image_id}, {"boxes", std::move(boxes)}});
  }
  return doc.dump(2);
}

std::string dump(const ConfidenceFile& file) {
  json doc{{"schema_version", file.schema_version}, {"images", json::array()}};
  for (const auto& image : file.images) {
    json tiles = json::object();
    for (const auto& [id, s] : image.tiles) {
      json color = json::object();
      for (const Color c : kAllColors) color[std::string(to_string(c))] = s.color[rank(c)];
      json number = json::object();
      for (int n = 1; n <= kNumberCount; ++n) number[std::to_string(n)] = s.number[n - 1];
      tiles[id] = {{"color", std::move(color)}, {"number", std::move(number)}, {"joker", s.joker}};
    }
    doc["images"].push_back({{"image_id", image.image_id}, {"tiles", std::move(tiles)}});
  }
  return doc.dump(2);
}

std::string dump(const SetsFile& file) {
  json doc{{"schema_version", file.schema_version}, {"sets", json::array()}};
  for (const auto& set : file.sets) {
    json names = json::array();
    for (const auto id : set) names.push_back(to_string(id));
    doc["sets"].push_back(std::move(names));
  }
  return doc.dump(2);
}

std::vector<DetectionBox> to_boxes(const DetectionImage& image) {
  std::vector<DetectionBox> out;
  out.reserve(image.boxes.size());
  for (const auto& b : image.boxes) {
    DetectionBox box;
    box.id = b.id;
    box.center = {b.cx, b.cy};
    box.width = b.w;
    box.height = b.h;
    box.angle = normalize_axis_angle(b.angle_deg * std::numbers::pi / 180.0);
    out.push_back(std::move(box));
  }
  return out;
}

void cross_check(const DetectionFile& detections, const ConfidenceFile& confidences) {
  std::map<std::string, const ConfidenceImage*> by_id;
  for (const auto& image : confidences.images) {
    if (!by_id.emplace(image.image_id, &image).second) {
      throw Error(ErrorCode::CrossReference, "image '" + image.image_id + "' listed twice in confidences");
    }
  }
  std::set<std::string> seen;
  for (const auto& image : detections.images) {
    if (!seen.insert(image.image_id).second) {
      throw Error(ErrorCode::CrossReference, "image '" + image.image_id + "' listed twice in detections");
    }
    const auto it = by_id.find(image.image_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::CrossReference, "image '" + image.image_id + "' has no confidences");
    }
    const auto& tiles = it->second->tiles;
    for (const auto& box : image.boxes) {
      if (!tiles.contains(box.id)) {
        throw Error(ErrorCode::CrossReference,
                    "tile '" + box.id + "' of image '" + image.image_id + "' has no confidences");
      }
    }
    if (tiles.size() != image.boxes.size()) {
      throw Error(ErrorCode::CrossReference, "image '" + image.image_id + "' has confidences for undetected tiles");
    }
  }
  if (seen.size() != by_id.size()) {
    throw Error(ErrorCode::CrossReference, "confidences list images that have no detections");
  }
}

ConfidenceMatrixd matrix_for(const ConfidenceImage& image, std::span<const std::string> ids) {
  auto m = ConfidenceMatrixd::Zero(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = image.tiles.find(ids[i]);
    if (it == image.tiles.end()) {
      throw Error(ErrorCode::CrossReference, "no confidences for tile '" + ids[i] + "'");
    }
    const auto row = static_cast<Eigen::Index>(i);
    const auto& s = it->second;
    for (int c = 0; c < kColorCount; ++c) m.color(row, c) = s.color[c];
    for (int n = 0; n < kNumberCount; ++n) m.number(row, n) = s.number[n];
    m.joker(row) = s.joker;
  }
  return m;
}

std::string sweep_csv(const SweepReport& report) {
  std::string out = "quality,pipeline,n_seeds,tile_mean,tile_std,set_mean,set_std,image_mean,image_std\n";
  char line[256];
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%.4f,%s,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.quality,
                  std::string(to_string(r.pipeline)).c_str(), r.n_seeds, r.tile_mean, r.tile_std, r.set_mean,
                  r.set_std, r.image_mean, r.image_std);
    out += line;
  }
  return out;
}

std::string sweep_jsonl(const SweepReport& report) {
  std::string out;
  for (const auto& c : report.cells) {
    const json row{{"quality", c.quality},
                   {"seed", c.seed},
                   {"pipeline", std::string(to_string(c.pipeline))},
                   {"tiles_correct", c.metrics.tiles_correct},
                   {"tiles_total", c.metrics.tiles_total},
                   {"sets_correct", c.metrics.sets_correct},
                   {"sets_total", c.metrics.sets_total},
                   {"images_correct", c.metrics.images_correct},
                   {"images_total", c.metrics.images_total}};
    out += row.dump();
    out += '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace rummi::io
