#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "risa/cli/commands.hpp"
#include "risa/cli/run_config.hpp"
#include "risa/core/error.hpp"

namespace fs = std::filesystem;
using namespace risa;

namespace {

constexpr const char* kOutputRootEnv = "RISA_OUTPUT_ROOT";

std::optional<fs::path> output_root() {
  const char* v = std::getenv(kOutputRootEnv);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return fs::path(v);
}

struct RunFlags {
  std::string config;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> boundary_override;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--config", flags.config, "JSON run config")->check(CLI::ExistingFile);
  cmd->add_option("--profile", flags.profile, "desk or paper (wins over the config file)");
  cmd->add_option("--seed", flags.seed, "seed for data synthesis, augmentation and training");
  cmd->add_option("--boundary-override", flags.boundary_override,
                  "stage boundary checkpoint index; skips elbow detection");
}

cli::RunConfig run_config(const RunFlags& flags) {
  cli::Overrides o;
  if (!flags.profile.empty()) o.profile = cli::parse_profile(flags.profile);
  o.seed = flags.seed;
  o.boundary_override = flags.boundary_override;
  return cli::load_run_config(flags.config, o);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text) {
    if (c == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else if (c != ' ') {
      item += c;
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"risa: weakly supervised quality scoring for reference-guided synthesis"};
  app.require_subcommand(1);

  RunFlags prepare_flags;
  auto* prepare = app.add_subcommand("prepare", "build the labeled training manifest");
  add_run_flags(prepare, prepare_flags);

  RunFlags train_flags;
  std::string resume;
  auto* train = app.add_subcommand("train", "train a scorer on the prepared manifest");
  add_run_flags(train, train_flags);
  train->add_option("--resume", resume, "checkpoint to continue from")->check(CLI::ExistingFile);

  std::string score_ckpt, score_ref, score_gen;
  auto* score = app.add_subcommand("score", "score a generated image against its reference");
  score->add_option("checkpoint", score_ckpt)->required();
  score->add_option("reference", score_ref)->required();
  score->add_option("generated", score_gen)->required();

  RunFlags eval_flags;
  std::string eval_ckpt, preferences, baselines, eval_out;
  std::optional<std::uint64_t> shuffle_seed;
  auto* eval = app.add_subcommand("eval", "pairwise human-consistency of the scorer and baselines");
  add_run_flags(eval, eval_flags);
  eval->add_option("--checkpoint", eval_ckpt, "trained scorer");
  eval->add_option("--preferences", preferences, "JSON-lines preference triplets")->required();
  eval->add_option("--baselines", baselines, "comma list of psnr, ssim, ms_ssim");
  eval->add_option("--shuffle-seed", shuffle_seed, "shuffle triplets before the 3-fold split");
  eval->add_option("--out", eval_out, "report stem (default <output_dir>/eval/report)");

  std::vector<std::string> report_inputs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "merge report CSVs into one table and chart");
  report->add_option("inputs", report_inputs, "report CSV files")->required();
  report->add_option("--out", report_out, "output stem")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*prepare) {
      const auto config = run_config(prepare_flags);
      cli::cmd_prepare(config, {cli::output_directory(config, output_root())}, std::cout);
    } else if (*train) {
      const auto config = run_config(train_flags);
      std::optional<fs::path> from;
      if (!resume.empty()) from = resume;
      cli::cmd_train(config, {cli::output_directory(config, output_root())}, from, std::cout);
    } else if (*score) {
      cli::cmd_score(score_ckpt, score_ref, score_gen, std::cout);
    } else if (*eval) {
      const auto config = run_config(eval_flags);
      cli::EvalRequest request;
      if (!eval_ckpt.empty()) request.checkpoint = eval_ckpt;
      request.preferences = preferences;
      request.baselines = split_list(baselines);
      request.shuffle_seed = shuffle_seed;
      request.image_side = config.image_side;
      request.report_stem = eval_out.empty()
                                ? cli::output_directory(config, output_root()) / "eval" / "report"
                                : fs::path(eval_out);
      const auto result = cli::cmd_eval(request, std::cout, std::cerr);
      if (result.failure) return cli::exit_code(result.failure->kind());
    } else if (*report) {
      std::vector<fs::path> inputs(report_inputs.begin(), report_inputs.end());
      cli::cmd_report(inputs, report_out, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
