#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "risa/core/error.hpp"
#include "risa/core/image.hpp"
#include "risa/core/manifest.hpp"
#include "risa/core/types.hpp"
#include "support/fixtures.hpp"

using namespace risa;
using namespace risa::testing;

TEST_CASE("image tensor invariants") {
  CHECK(ImageTensor::filled(4, 0.3).side() == 4);
  CHECK(error_kind([] { ImageTensor(Tensor({3, 4, 5})); }) == ErrorKind::Shape);
  CHECK(error_kind([] { ImageTensor(Tensor({1, 4, 4})); }) == ErrorKind::Shape);
  CHECK(error_kind([] { ImageTensor(Tensor({3, 2, 2}, 1.5)); }) == ErrorKind::Domain);
  CHECK(error_kind([] { ImageTensor(Tensor({3, 2, 2}, std::nan(""))); }) == ErrorKind::Domain);
  const auto c = ImageTensor::clamped(Tensor({3, 2, 2}, std::vector<double>(12, -0.5)));
  for (double v : c.values()) CHECK(v == 0.0);
}

TEST_CASE("quality label and samples") {
  CHECK(QualityLabel(0.25).value() == 0.25);
  CHECK(error_kind([] { QualityLabel(1.01); }) == ErrorKind::Domain);
  CHECK(error_kind([] { QualityLabel(-0.01); }) == ErrorKind::Domain);
  CHECK(parse_stage(to_string(Stage::Stable)) == Stage::Stable);
  CHECK(error_kind([] { parse_stage("late"); }) == ErrorKind::Parse);

  TrainingSample s;
  s.generated = ImageTensor::filled(4, 0.1);
  s.reference = ImageTensor::filled(4, 0.2);
  s.label = QualityLabel(15.0 / 16.0);
  CHECK_NOTHROW(validate_sample(s, 16));
  s.label = QualityLabel(1.0);
  CHECK(error_kind([&] { validate_sample(s, 16); }) == ErrorKind::Integrity);
  s.stage = Stage::Real;
  CHECK_NOTHROW(validate_sample(s, 16));
  s.label = QualityLabel(0.5);
  CHECK(error_kind([&] { validate_sample(s, 16); }) == ErrorKind::Integrity);
}

TEST_CASE("manifest lines round trip") {
  ManifestRecord r;
  r.image_path = "gen/a.png";
  r.role = Role::Generated;
  r.iteration_tag = 10000;
  r.epsilon = 0.3;
  r.label = QualityLabel(0.5);
  r.pair_id = "p17";
  r.split = Split::Val;
  r.stage = Stage::Stable;
  const auto line = to_manifest_line(r);
  CHECK(parse_manifest_line(line) == r);

  ManifestRecord minimal;
  minimal.image_path = "ref.png";
  minimal.role = Role::Reference;
  minimal.pair_id = "p17";
  CHECK(to_manifest_line(minimal).find("epsilon") == std::string::npos);
  CHECK(parse_manifest_line(to_manifest_line(minimal)) == minimal);
}

TEST_CASE("manifest parse errors") {
  CHECK(error_kind([] { parse_manifest_line("{\"image_path\": \"a\", \"role\": \"generated\", \"colour\": 1}"); }) ==
        ErrorKind::Parse);
  CHECK(error_kind([] { parse_manifest_line("{\"image_path\": \"a\", \"role\": \"painter\"}"); }) == ErrorKind::Parse);
  CHECK(error_kind([] { parse_manifest_line("{\"image_path\": \"a\", \"role\": \"generated\", \"epsilon\": 1.0}"); }) ==
        ErrorKind::Parse);
  CHECK(error_kind([] { parse_manifest_line("{\"image_path\": \"a\", \"role\": \"generated\", \"iteration_tag\": -3}"); }) ==
        ErrorKind::Parse);
  CHECK(error_kind([] { parse_manifest_line("not json"); }) == ErrorKind::Parse);

  std::istringstream in(
      "{\"image_path\": \"r.png\", \"role\": \"reference\", \"pair_id\": \"p\"}\n"
      "\n"
      "{\"image_path\": \"g.png\", \"role\": \"generated\", \"pair_id\": \"p\", \"label\": 2}\n");
  try {
    read_manifest(in);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("manifest integrity") {
  std::vector<ManifestRecord> records(2);
  records[0] = {"r.png", Role::Reference, {}, {}, {}, "p", Split::Train, {}};
  records[1] = {"g.png", Role::Generated, 1000, {}, {}, "p", Split::Train, {}};
  CHECK_NOTHROW(validate_manifest(records));
  auto orphan = records;
  orphan[1].pair_id = "q";
  CHECK(error_kind([&] { validate_manifest(orphan); }) == ErrorKind::Integrity);
  auto doubled = records;
  doubled.push_back(records[0]);
  CHECK(error_kind([&] { validate_manifest(doubled); }) == ErrorKind::Integrity);
  auto eps_on_ref = records;
  eps_on_ref[0].epsilon = 0.5;
  CHECK(error_kind([&] { validate_manifest(eps_on_ref); }) == ErrorKind::Integrity);

  std::stringstream io;
  write_manifest(records, io);
  CHECK(read_manifest(io) == records);
}

TEST_CASE("image files") {
  const auto dir = std::filesystem::temp_directory_path() / "risa_core_images";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(1);
  const auto img = random_image(16, rng);

  save_image(img, dir / "a.png");
  const auto back = load_image(dir / "a.png", 16);
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(std::abs(back.values()[i] - img.values()[i]) <= 0.5 / 65535.0 + 1e-12);
  }
  CHECK(load_image(dir / "a.png", 8).side() == 8);

  // 8-bit file with a known RGB pixel: stored BGR on disk.
  cv::Mat bgr(4, 4, CV_8UC3, cv::Scalar(0, 128, 255));
  cv::imwrite((dir / "b.png").string(), bgr);
  const auto rgb = load_image(dir / "b.png", 4);
  CHECK(rgb.at(0, 0, 0) == 1.0);
  CHECK(rgb.at(1, 0, 0) == doctest::Approx(128.0 / 255.0));
  CHECK(rgb.at(2, 0, 0) == 0.0);

  CHECK(error_kind([&] { load_image(dir / "missing.png", 16); }) == ErrorKind::Decode);
  {
    std::ofstream junk(dir / "junk.png");
    junk << "not an image";
  }
  CHECK(error_kind([&] { load_image(dir / "junk.png", 16); }) == ErrorKind::Decode);
  std::filesystem::remove_all(dir);
}

TEST_CASE("error kinds carry through") {
  try {
    fail(ErrorKind::Numeric, "boom");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numeric);
    CHECK(std::string(e.what()).find("boom") != std::string::npos);
  }
}
