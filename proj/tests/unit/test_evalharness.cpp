#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include "risa/core/error.hpp"
#include "risa/evalharness/consistency.hpp"
#include "risa/evalharness/metrics.hpp"
#include "risa/evalharness/report.hpp"
#include "support/fixtures.hpp"

using namespace risa;
using namespace risa::testing;

namespace {

std::vector<PreferenceTriplet> synthetic_triplets(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<PreferenceTriplet> out;
  for (std::size_t i = 0; i < n; ++i) {
    PreferenceTriplet t{"r" + std::to_string(i), "a" + std::to_string(i), "b" + std::to_string(i),
                        (rng() & 1) ? Choice::A : Choice::B};
    out.push_back(t);
  }
  return out;
}

// Scores the human-preferred candidate higher.
Scorer oracle_for(const std::vector<PreferenceTriplet>& triplets) {
  auto preferred = std::make_shared<std::map<std::string, bool>>();
  for (const auto& t : triplets) {
    (*preferred)[t.candidate_a] = t.human_choice == Choice::A;
    (*preferred)[t.candidate_b] = t.human_choice == Choice::B;
  }
  return [preferred](const std::string&, const std::string& c) { return preferred->at(c) ? 0.8 : 0.3; };
}

}  // namespace

TEST_CASE("judge follows strict score order") {
  const PreferenceTriplet t{"r", "a", "b", Choice::A};
  const Scorer s = [](const std::string&, const std::string& c) { return c == "a" ? 0.8 : 0.3; };
  CHECK(judge(s, t) == Verdict::A);
  const PreferenceTriplet swapped{"r", "b", "a", Choice::B};
  CHECK(judge(s, swapped) == Verdict::B);
  const Scorer flat = [](const std::string&, const std::string&) { return 0.4; };
  CHECK(judge(flat, t) == Verdict::Tie);
}

TEST_CASE("consistency anchors") {
  const auto triplets = synthetic_triplets(100, 1);
  const auto oracle = consistency(oracle_for(triplets), triplets, "oracle");
  CHECK(oracle.mean_consistency == 1.0);
  CHECK(oracle.std == 0.0);
  CHECK(oracle.fold_values.size() == 3);
  CHECK(oracle.n_triplets == 100);

  const Scorer constant = [](const std::string&, const std::string&) { return 0.5; };
  const auto flat = consistency(constant, triplets, "constant");
  CHECK(flat.mean_consistency == 0.5);
  CHECK(flat.std == 0.0);
}

TEST_CASE("random scorer lands near chance") {
  const auto triplets = synthetic_triplets(30000, 2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Scorer random = [&](const std::string&, const std::string&) { return u(rng); };
  const auto r = consistency(random, triplets, "random");
  CHECK(r.mean_consistency == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("folds are contiguous with the remainder in the last fold") {
  auto triplets = synthetic_triplets(10, 4);
  // Scorer right on the first 3 triplets only.
  std::map<std::string, double> scores;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const bool right = i < 3;
    const bool a_wins = (triplets[i].human_choice == Choice::A) == right;
    scores[triplets[i].candidate_a] = a_wins ? 1.0 : 0.0;
    scores[triplets[i].candidate_b] = a_wins ? 0.0 : 1.0;
  }
  const Scorer s = [&](const std::string&, const std::string& c) { return scores.at(c); };
  const auto r = consistency(s, triplets, "x");
  REQUIRE(r.fold_values.size() == 3);
  CHECK(r.fold_values[0] == 1.0);
  CHECK(r.fold_values[1] == 0.0);
  CHECK(r.fold_values[2] == 0.0);  // 4 triplets
  CHECK(r.mean_consistency == doctest::Approx(1.0 / 3.0));
  CHECK(r.std == doctest::Approx(std::sqrt(2.0) / 3.0));
  double sum = 0.0;
  for (double v : r.fold_values) sum += v;
  CHECK(r.mean_consistency == doctest::Approx(sum / 3.0));

  ConsistencyOptions shuffled;
  shuffled.shuffle_seed = 9;
  const auto a = consistency(s, triplets, "x", shuffled);
  const auto b = consistency(s, triplets, "x", shuffled);
  CHECK(a.fold_values == b.fold_values);
}

TEST_CASE("consistency invariances") {
  const auto triplets = synthetic_triplets(60, 5);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<std::string, double> scores;
  for (const auto& t : triplets) {
    scores[t.candidate_a] = u(rng);
    scores[t.candidate_b] = u(rng);
  }
  const Scorer s = [&](const std::string&, const std::string& c) { return scores.at(c); };
  const auto base = consistency(s, triplets, "s");

  auto swapped = triplets;
  for (auto& t : swapped) {
    std::swap(t.candidate_a, t.candidate_b);
    t.human_choice = t.human_choice == Choice::A ? Choice::B : Choice::A;
  }
  CHECK(consistency(s, swapped, "s").fold_values == base.fold_values);

  const Scorer monotone = [&](const std::string& r, const std::string& c) {
    return std::exp(3.0 * s(r, c)) - 7.0;
  };
  CHECK(consistency(monotone, triplets, "s").fold_values == base.fold_values);
}

TEST_CASE("too few triplets") {
  const Scorer s = [](const std::string&, const std::string&) { return 0.0; };
  CHECK_THROWS_AS(consistency(s, synthetic_triplets(2, 1), "s"), Error);
  try {
    consistency(s, synthetic_triplets(2, 1), "s");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientData);
  }
}

TEST_CASE("preference file parsing") {
  std::istringstream ok(
      "{\"reference\": \"r.png\", \"candidate_a\": \"a.png\", \"candidate_b\": \"b.png\", \"human_choice\": \"b\"}\n"
      "\n"
      "{\"reference\": \"/x/r.png\", \"candidate_a\": \"a.png\", \"candidate_b\": \"c.png\", \"human_choice\": \"a\"}\n");
  const auto t = read_preferences(ok, "/data");
  REQUIRE(t.size() == 2);
  CHECK(t[0].reference == "/data/r.png");
  CHECK(t[0].human_choice == Choice::B);
  CHECK(t[1].reference == "/x/r.png");

  std::istringstream same("{\"reference\": \"r\", \"candidate_a\": \"a\", \"candidate_b\": \"a\", \"human_choice\": \"a\"}\n");
  CHECK_THROWS_AS(read_preferences(same), Error);
  std::istringstream missing("{\"reference\": \"r\", \"candidate_a\": \"a\", \"candidate_b\": \"b\"}\n");
  CHECK_THROWS_AS(read_preferences(missing), Error);
  std::istringstream bad_choice("{\"reference\": \"r\", \"candidate_a\": \"a\", \"candidate_b\": \"b\", \"human_choice\": \"tie\"}\n");
  CHECK_THROWS_AS(read_preferences(bad_choice), Error);
  std::istringstream garbage("{\"reference\": \n");
  try {
    read_preferences(garbage);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("psnr") {
  std::mt19937_64 rng(1);
  const auto a = random_image(16, rng);
  const auto b = random_image(16, rng);
  CHECK(psnr(a, a) == kPsnrCap);
  CHECK(psnr(a, b) == psnr(b, a));
  // MSE of one 8-bit level squared: 20 log10(255).
  const auto grey = ImageTensor::filled(16, 100.0 / 255.0);
  const auto next = ImageTensor::filled(16, 101.0 / 255.0);
  CHECK(psnr(grey, next) == doctest::Approx(48.1308).epsilon(1e-5));
  CHECK(psnr(grey, next) == doctest::Approx(20.0 * std::log10(255.0)).epsilon(1e-9));
  CHECK_THROWS_AS(psnr(a, random_image(8, rng)), Error);
}

TEST_CASE("ssim fixed points") {
  std::mt19937_64 rng(2);
  const auto a = random_image(24, rng);
  const auto b = random_image(24, rng);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ssim(a, b) == ssim(b, a));
  CHECK(ssim(a, b) <= 1.0);
  CHECK(ssim(a, b) >= -1.0);
  CHECK_THROWS_AS(ssim(ImageTensor::filled(8, 0.5), ImageTensor::filled(8, 0.5)), Error);
}

TEST_CASE("ssim agrees with scikit-image") {
  // skimage.metrics.structural_similarity(gaussian_weights=True, sigma=1.5,
  // use_sample_covariance=False, data_range=1.0, channel_axis=2) on the same
  // LCG images.
  const auto flat = ImageTensor::filled(32, 0.5);
  const auto noisy = lcg_image(32, 42, 0.5, 0.1);
  CHECK(std::abs(ssim(flat, noisy) - 0.5294659116435284) < 1e-6);
  const auto c = lcg_image(32, 7, 0.3, 0.6);
  const auto d = lcg_image(32, 9, 0.6, 0.5);
  CHECK(std::abs(ssim(c, d) - 0.00639431831336306) < 1e-6);
}

TEST_CASE("ms-ssim") {
  const auto a = lcg_image(176, 3, 0.4, 0.5);
  const auto other = lcg_image(176, 5, 0.5, 0.6);
  Tensor mix({3, 176, 176});
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.5 * a.values()[i] + 0.5 * other.values()[i];
  const ImageTensor b(std::move(mix));
  CHECK(ms_ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ms_ssim(a, b) == ms_ssim(b, a));
  // Single-scale value from scikit-image; multi-scale value from
  // tf.image.ssim_multiscale, which works in float32.
  CHECK(std::abs(ssim(a, b) - 0.6184432735651827) < 1e-6);
  CHECK(std::abs(ms_ssim(a, b) - 0.7629582285881042) < 1e-5);
  CHECK_THROWS_AS(ms_ssim(ImageTensor::filled(160, 0.5), ImageTensor::filled(160, 0.5)), Error);
}

TEST_CASE("spearman") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  CHECK(spearman(x, std::vector<double>{2, 4, 6, 8, 10}) == doctest::Approx(1.0));
  CHECK(spearman(x, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
  // Ties take average ranks: scipy.stats.spearmanr gives 0.9746794344808963.
  CHECK(spearman(x, std::vector<double>{1, 2, 2, 3, 4}) == doctest::Approx(0.9746794344808963));
  CHECK_THROWS_AS(spearman(x, std::vector<double>{1, 2}), Error);
}

TEST_CASE("report table and chart") {
  ConsistencyReport a{"risa", 0.7, 0.02, {0.68, 0.7, 0.72}, 90};
  ConsistencyReport b{"psnr", 0.55, 0.01, {0.54, 0.55, 0.56}, 90};
  std::ostringstream csv;
  write_report_csv({a, b}, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("metric,mean,std,n,fold1,fold2,fold3\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);

  std::istringstream in(text);
  const auto back = read_report_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].metric_name == "risa");
  CHECK(back[1].n_triplets == 90);
  CHECK(back[0].fold_values.size() == 3);

  const auto dir = std::filesystem::temp_directory_path() / "risa_report_test";
  std::filesystem::create_directories(dir);
  report({a, b}, dir / "one");
  report({a, b}, dir / "two");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  CHECK(slurp(dir / "one.csv") == slurp(dir / "two.csv"));
  CHECK(slurp(dir / "one.png") == slurp(dir / "two.png"));
  CHECK(std::filesystem::file_size(dir / "one.png") > 0);
  CHECK_THROWS_AS(report({}, dir / "empty"), Error);
  CHECK_THROWS_AS(report({a}, "/nonexistent-dir/x/report"), Error);
  std::filesystem::remove_all(dir);
}
