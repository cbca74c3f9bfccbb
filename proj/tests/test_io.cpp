#include <doctest.h>

#include <numbers>

#include <random>

#include "rummi/io.hpp"
#include "test_support.hpp"

using namespace rummi;

#ifndef RUMMI_TEST_DATA
#define RUMMI_TEST_DATA "tests/data"
#endif

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Infeasible;
}

io::DetectionFile random_detections(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-5000.0, 5000.0);
  std::uniform_real_distribution<double> size(0.1, 300.0);
  std::uniform_real_distribution<double> angle(-90.0, 90.0);
  io::DetectionFile file;
  const int images = std::uniform_int_distribution<int>(0, 4)(rng);
  for (int i = 0; i < images; ++i) {
    io::DetectionImage image;
    image.image_id = "img-" + std::to_string(i);
    const int boxes = std::uniform_int_distribution<int>(0, 20)(rng);
    for (int b = 0; b < boxes; ++b) {
      image.boxes.push_back({"tile " + std::to_string(b), coord(rng), coord(rng), size(rng), size(rng), angle(rng)});
    }
    file.images.push_back(std::move(image));
  }
  return file;
}

io::ConfidenceFile random_confidences(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> score(0.0, 1.0);
  io::ConfidenceFile file;
  const int images = std::uniform_int_distribution<int>(0, 4)(rng);
  for (int i = 0; i < images; ++i) {
    io::ConfidenceImage image;
    image.image_id = "img-" + std::to_string(i);
    const int tiles = std::uniform_int_distribution<int>(0, 15)(rng);
    for (int t = 0; t < tiles; ++t) {
      io::TileScores s;
      for (auto& v : s.color) v = score(rng) * 1e3;
      for (auto& v : s.number) v = score(rng) / 7.0;
      s.joker = t % 3 == 0 ? 0.0 : score(rng);
      image.tiles["t" + std::to_string(t)] = s;
    }
    file.images.push_back(std::move(image));
  }
  return file;
}

}  // namespace

TEST_CASE("detection and confidence files round-trip") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto det = random_detections(rng);
    CHECK(io::parse_detection_file(io::dump(det)) == det);
    const auto conf = random_confidences(rng);
    CHECK(io::parse_confidence_file(io::dump(conf)) == conf);
  }
}

TEST_CASE("worked example files parse") {
  const auto det = io::parse_detection_file(io::read_file(RUMMI_TEST_DATA "/color_example_detections.json"));
  const auto conf = io::parse_confidence_file(io::read_file(RUMMI_TEST_DATA "/color_example_confidences.json"));
  io::cross_check(det, conf);
  REQUIRE(det.images.size() == 1);
  CHECK(det.images[0].boxes.size() == 3);
  const auto& tile3 = conf.images[0].tiles.at("tile3");
  CHECK(tile3.color[rank(Color::Yellow)] == 0.3);  // given as "orange"
  CHECK(tile3.joker == 0.0);

  const std::vector<std::string> ids{"tile1", "tile2", "tile3"};
  const auto m = io::matrix_for(conf.images[0], ids);
  CHECK(m.color(0, rank(Color::Red)) == 0.8);
  CHECK(m.color(1, rank(Color::Blue)) == 0.7);
}

TEST_CASE("angles go from degrees on the wire to radians") {
  io::DetectionImage image;
  image.boxes.push_back({"a", 1, 2, 3, 4, 90.0});
  image.boxes.push_back({"b", 1, 2, 3, 4, 135.0});
  const auto boxes = io::to_boxes(image);
  CHECK(boxes[0].angle == doctest::Approx(std::numbers::pi / 2));
  CHECK(boxes[1].angle == doctest::Approx(-std::numbers::pi / 4));
  CHECK(boxes[0].center == Eigen::Vector2d(1, 2));
}

TEST_CASE("schema violations are parse errors") {
  CHECK(code_of([] { io::parse_detection_file("{not json"); }) == ErrorCode::Parse);
  CHECK(code_of([] { io::parse_detection_file(R"({"schema_version":"2","images":[]})"); }) == ErrorCode::Parse);
  CHECK(code_of([] { io::parse_detection_file(R"({"images":[]})"); }) == ErrorCode::Parse);
  CHECK(code_of([] {
          io::parse_detection_file(
              R"({"schema_version":"1","images":[{"image_id":"i","boxes":[{"id":"a","cx":0,"cy":0,"w":0,"h":1}]}]})");
        }) == ErrorCode::Parse);
  CHECK(code_of([] {
          io::parse_detection_file(R"({"schema_version":"1","images":[{"image_id":"i","boxes":[
            {"id":"a","cx":0,"cy":0,"w":1,"h":1},{"id":"a","cx":5,"cy":0,"w":1,"h":1}]}]})");
        }) == ErrorCode::Parse);

  const std::string numbers = R"("number":{"1":0,"2":0,"3":0,"4":0,"5":0,"6":0,"7":0,"8":0,"9":0,"10":0,"11":0,"12":0,"13":0})";
  auto conf = [&](const std::string& color, const std::string& extra = "") {
    return R"({"schema_version":"1","images":[{"image_id":"i","tiles":{"a":{"color":)" + color + "," + numbers +
           extra + "}}}]}";
  };
  CHECK_NOTHROW(io::parse_confidence_file(conf(R"({"red":1,"blue":0,"black":0,"yellow":0})")));
  CHECK(code_of([&] { io::parse_confidence_file(conf(R"({"red":1,"blue":0,"black":0})")); }) == ErrorCode::Parse);
  CHECK(code_of([&] { io::parse_confidence_file(conf(R"({"red":-1,"blue":0,"black":0,"yellow":0})")); }) ==
        ErrorCode::Parse);
  CHECK(code_of([&] {
          io::parse_confidence_file(conf(R"({"red":1,"blue":0,"black":0,"yellow":0,"orange":0})"));
        }) == ErrorCode::Parse);
  CHECK(code_of([&] { io::parse_confidence_file(conf(R"({"red":1,"blue":0,"black":0,"pink":0})")); }) ==
        ErrorCode::Parse);
  CHECK(code_of([&] {
          io::parse_confidence_file(conf(R"({"red":1,"blue":0,"black":0,"yellow":0})", R"(,"joker":"x")"));
        }) == ErrorCode::Parse);

  CHECK(code_of([] { io::parse_sets_file(R"({"schema_version":"1","sets":[["red-14"]]})"); }) == ErrorCode::Parse);
}

TEST_CASE("cross-reference checks") {
  io::DetectionFile det;
  det.images.push_back({"i", {{"a", 0, 0, 1, 1, 0}, {"b", 1, 0, 1, 1, 0}}});
  io::ConfidenceFile conf;
  conf.images.push_back({"i", {{"a", {}}, {"b", {}}}});
  CHECK_NOTHROW(io::cross_check(det, conf));

  auto missing_tile = conf;
  missing_tile.images[0].tiles.erase("b");
  CHECK(code_of([&] { io::cross_check(det, missing_tile); }) == ErrorCode::CrossReference);

  auto extra_tile = conf;
  extra_tile.images[0].tiles["c"] = {};
  CHECK(code_of([&] { io::cross_check(det, extra_tile); }) == ErrorCode::CrossReference);

  auto other_image = conf;
  other_image.images[0].image_id = "j";
  CHECK(code_of([&] { io::cross_check(det, other_image); }) == ErrorCode::CrossReference);

  const std::vector<std::string> ids{"a", "zzz"};
  CHECK(code_of([&] { io::matrix_for(conf.images[0], ids); }) == ErrorCode::CrossReference);
}

TEST_CASE("sweep CSV layout") {
  SweepReport report;
  SweepRow row;
  row.quality = 0.5;
  row.pipeline = Pipeline::Corrected;
  row.n_seeds = 3;
  row.image_mean = 0.25;
  report.rows.push_back(row);
  CHECK(io::sweep_csv(report) ==
        "quality,pipeline,n_seeds,tile_mean,tile_std,set_mean,set_std,image_mean,image_std\n"
        "0.5000,corrected,3,0.000000,0.000000,0.000000,0.000000,0.250000,0.000000\n");
}
