#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "risa/cli/commands.hpp"
#include "risa/cli/run_config.hpp"
#include "risa/evalharness/report.hpp"
#include "support/fixtures.hpp"

using namespace risa;
using namespace risa::cli;
using namespace risa::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string config_error(const json& doc, const Overrides& o = {}) {
  try {
    resolve_run_config(doc, o);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

json tiny_run_document() {
  return json::parse(R"({
    "image_side": 8,
    "encoder": {"depth": 6, "base_channels": 4, "max_channels": 8, "downsamples": 2, "code_dim": 4},
    "bank": {"num_classifiers": 4, "hidden_dims": [6]},
    "train": {"batch_size": 4, "epochs": 2, "learning_rate": 0.001},
    "data": {"boundary_override": 2, "synthetic": {"base_images": 3, "heldout_images": 2, "levels": 3}}
  })");
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("exit codes") {
  CHECK(exit_code(ErrorKind::Config) == 1);
  CHECK(exit_code(ErrorKind::Parse) == 2);
  CHECK(exit_code(ErrorKind::Integrity) == 2);
  CHECK(exit_code(ErrorKind::Decode) == 2);
  CHECK(exit_code(ErrorKind::Numeric) == 3);
}

TEST_CASE("profile defaults") {
  const auto desk = profile_defaults(Profile::Desk);
  const auto paper = profile_defaults(Profile::Paper);
  CHECK(desk.bank.num_classifiers == 16);
  CHECK(paper.bank.num_classifiers == 16);
  CHECK(paper.image_side == 256);
  CHECK(paper.train.batch_size == 4);
  CHECK(paper.train.epochs == 100);
  CHECK(paper.train.learning_rate == 1e-4);
  CHECK(paper.train.weight_decay == 1e-4);
  CHECK(paper.train.adam_beta1 == 0.0);
  CHECK(paper.train.adam_beta2 == 0.99);
  CHECK(paper.epsilons.size() == 9);
  CHECK_NOTHROW(validate(desk));
  CHECK_NOTHROW(validate(paper));
}

TEST_CASE("config resolution") {
  const auto c = resolve_run_config(json::parse(R"({"seed": 9, "train": {"epochs": 3}})"), {});
  CHECK(c.train.epochs == 3);
  CHECK(c.train.seed == 9);
  CHECK(c.augmentation.seed == 9);

  Overrides o;
  o.seed = 4;
  o.boundary_override = 5;
  const auto d = resolve_run_config(json::parse(R"({"seed": 9})"), o);
  CHECK(d.train.seed == 4);
  CHECK(d.boundary_override == 5u);

  CHECK(config_error(json::parse(R"({"train": {"learning_rat": 1}})")).find("train.learning_rat") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"colour": 1})")).find("colour") != std::string::npos);
  CHECK(config_error(json::parse(R"({"data": {"synthetic": {"levelz": 3}}})"))
            .find("data.synthetic.levelz") != std::string::npos);
  CHECK(config_error(json::parse(R"({"train": {"epochs": "many"}})")).find("train.epochs") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"image_side": 30})")).find("image_side") != std::string::npos);

  // the paper profile pins K, batch, epochs and the epsilon grid
  CHECK_NOTHROW(resolve_run_config(json::parse(R"({"profile": "paper"})"), {}));
  CHECK(config_error(json::parse(R"({"profile": "paper", "bank": {"num_classifiers": 8}})"))
            .find("num_classifiers") != std::string::npos);
  CHECK(config_error(json::parse(R"({"profile": "paper", "train": {"epochs": 5}})"))
            .find("epochs") != std::string::npos);
  Overrides paper;
  paper.profile = Profile::Paper;
  CHECK(config_error(json::parse(R"({"interpolation": {"epsilons": [0.5]}})"), paper)
            .find("epsilons") != std::string::npos);

  const auto round = resolve_run_config(to_json(c), {});
  CHECK(to_json(round) == to_json(c));
}

TEST_CASE("output directory") {
  RunConfig c;
  c.output_dir = "runs/x";
  CHECK(output_directory(c, std::nullopt) == fs::path("runs/x"));
  CHECK(output_directory(c, fs::path("/tmp/root")) == fs::path("/tmp/root/runs/x"));
  c.output_dir = "/abs/x";
  CHECK(output_directory(c, fs::path("/tmp/root")) == fs::path("/abs/x"));
}

TEST_CASE("prepare needs a boundary source") {
  TempDir dir("risa_cli_noboundary");
  auto doc = tiny_run_document();
  doc["data"].erase("boundary_override");
  const auto config = resolve_run_config(doc, {});
  std::ostringstream out;
  CHECK(error_kind([&] { cmd_prepare(config, {dir.path}, out); }) == ErrorKind::Config);
}

TEST_CASE("prepare, train, score and eval on a tiny ladder") {
  TempDir dir("risa_cli_pipeline");
  const RunLayout layout{dir.path};
  const auto config = resolve_run_config(tiny_run_document(), {});
  std::ostringstream out;

  const auto prepared = cmd_prepare(config, layout, out);
  CHECK(prepared.boundary_index == 2);
  CHECK(out.str().find("label,count") != std::string::npos);
  CHECK(fs::exists(layout.resolved_config()));
  const auto first_manifest = read_text(layout.prepared_manifest());
  cmd_prepare(config, layout, out);
  CHECK(read_text(layout.prepared_manifest()) == first_manifest);

  const auto ckpt = cmd_train(config, layout, std::nullopt, out);
  CHECK(fs::exists(ckpt));
  const auto log = read_text(layout.train_log());
  CHECK(log.rfind("step,sup,pos,neg,supre,total\n", 0) == 0);
  CHECK(load_checkpoint(ckpt).epoch == 2);

  // resume into a longer run: the log grows, the epoch counter continues
  auto longer = config;
  longer.train.epochs = 3;
  cmd_train(longer, layout, ckpt, out);
  CHECK(load_checkpoint(layout.checkpoint()).epoch == 3);
  CHECK(read_text(layout.train_log()).size() > log.size());

  const auto ref = layout.ladder_dir() / "heldout/clean/0.png";
  const auto gen = layout.ladder_dir() / "heldout/ckpt1/0.png";
  std::ostringstream s1, s2;
  const double ab = cmd_score(layout.checkpoint(), ref, gen, s1);
  const double ba = cmd_score(layout.checkpoint(), gen, ref, s2);
  CHECK(ab == ba);
  CHECK(ab > 0.0);
  CHECK(ab < 1.0);
  CHECK(error_kind([&] { cmd_score(layout.checkpoint(), ref, dir.path / "nope.png", s1); }) ==
        ErrorKind::Decode);

  // preferences: the less corrupted checkpoint always wins
  {
    std::ofstream prefs(dir.path / "prefs.jsonl");
    for (int b = 0; b < 2; ++b) {
      for (int lo = 1; lo <= 2; ++lo) {
        const auto base = "ladder/heldout/";
        prefs << json{{"reference", base + std::string("clean/") + std::to_string(b) + ".png"},
                      {"candidate_a", base + std::string("ckpt") + std::to_string(lo) + "/" + std::to_string(b) + ".png"},
                      {"candidate_b", base + std::string("ckpt3/") + std::to_string(b) + ".png"},
                      {"human_choice", "b"}}
                     .dump()
              << '\n';
      }
    }
  }
  EvalRequest request;
  request.checkpoint = layout.checkpoint();
  request.preferences = dir.path / "prefs.jsonl";
  request.baselines = {"psnr"};
  request.report_stem = dir.path / "eval" / "report";
  std::ostringstream eval_out, eval_err;
  const auto result = cmd_eval(request, eval_out, eval_err);
  CHECK_FALSE(result.failure.has_value());
  REQUIRE(result.reports.size() == 2);
  CHECK(result.reports[1].metric_name == "psnr");
  CHECK(result.reports[1].mean_consistency == 1.0);
  CHECK(fs::exists(dir.path / "eval" / "report.csv"));
  CHECK(fs::exists(dir.path / "eval" / "report.png"));
  {
    std::ifstream csv(dir.path / "eval" / "report.csv");
    CHECK(read_report_csv(csv).size() == 2);
  }

  // ssim needs larger images: it fails alone and the others still run
  request.checkpoint.reset();
  request.image_side = 8;
  request.baselines = {"ssim", "psnr"};
  request.report_stem.clear();
  const auto partial = cmd_eval(request, eval_out, eval_err);
  REQUIRE(partial.failure.has_value());
  CHECK(partial.failure->kind() == ErrorKind::Config);
  CHECK(partial.reports.size() == 1);

  std::ostringstream merged;
  const auto reports = cmd_report({dir.path / "eval" / "report.csv"}, dir.path / "merged", merged);
  CHECK(reports.size() == 2);
  CHECK(fs::exists(dir.path / "merged.png"));

  {
    std::ofstream few(dir.path / "few.jsonl");
    few << R"({"reference": "a.png", "candidate_a": "b.png", "candidate_b": "c.png", "human_choice": "a"})" << '\n';
  }
  request.preferences = dir.path / "few.jsonl";
  request.baselines = {"psnr"};
  CHECK(error_kind([&] { cmd_eval(request, eval_out, eval_err); }) == ErrorKind::InsufficientData);
}
