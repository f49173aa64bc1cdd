#include "risa/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "risa/core/manifest.hpp"
#include "risa/dataprep/labels.hpp"
#include "risa/dataprep/ladder.hpp"
#include "risa/dataprep/training_set.hpp"
#include "risa/evalharness/metrics.hpp"
#include "risa/evalharness/report.hpp"
#include "risa/trainer/trainer.hpp"

namespace risa::cli {

namespace {

namespace fs = std::filesystem;

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::vector<ManifestRecord> resolve_paths(std::vector<ManifestRecord> records, const fs::path& base) {
  for (auto& r : records) {
    const fs::path p(r.image_path);
    if (p.is_relative() && !base.empty()) r.image_path = (base / p).string();
  }
  return records;
}

void write_config(const RunConfig& config, const RunLayout& layout) {
  fs::create_directories(layout.root);
  std::ofstream out(layout.resolved_config());
  if (!out) fail(ErrorKind::Io, "cannot write " + layout.resolved_config().string());
  out << to_json(config).dump(2) << '\n';
}

// Image cache keyed by path so each file is decoded once per command.
class CachedLoader {
 public:
  explicit CachedLoader(std::size_t side) : side_(side) {}
  const ImageTensor& operator()(const std::string& path) {
    auto it = cache_.find(path);
    if (it == cache_.end()) it = cache_.emplace(path, load_image(path, side_)).first;
    return it->second;
  }

 private:
  std::size_t side_;
  std::map<std::string, ImageTensor> cache_;
};

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return 1;
    case ErrorKind::Numeric:
      return 3;
    default:
      return 2;
  }
}

fs::path RunLayout::epoch_checkpoint(std::size_t epoch) const {
  char name[64];
  std::snprintf(name, sizeof name, "checkpoint_epoch%03zu.risa", epoch);
  return root / name;
}

PrepareResult cmd_prepare(const RunConfig& config, const RunLayout& layout, std::ostream& out) {
  if (!config.boundary_override && config.fid_curve.empty()) {
    fail(ErrorKind::Config, "no stage boundary: set paths.fid_curve or --boundary-override");
  }
  write_config(config, layout);

  std::vector<ManifestRecord> records;
  if (config.manifest.empty()) {
    const auto& s = config.synthetic;
    const auto corpus = synthesize_texture_corpus(s.base_images + s.heldout_images,
                                                  config.image_side, config.seed);
    const std::vector<ImageTensor> train_images(corpus.begin(), corpus.begin() + s.base_images);
    const std::vector<ImageTensor> heldout_images(corpus.begin() + s.base_images, corpus.end());
    const auto train_ladder = degradation_ladder_provider(train_images, s.levels, config.seed);
    records = train_ladder.write(layout.ladder_dir());
    if (!heldout_images.empty()) {
      LadderOptions heldout;
      heldout.prefix = "heldout";
      heldout.split = Split::Test;
      const auto test_ladder = degradation_ladder_provider(heldout_images, s.levels, config.seed + 1, heldout);
      const auto test_records = test_ladder.write(layout.ladder_dir());
      records.insert(records.end(), test_records.begin(), test_records.end());
    }
    write_manifest(records, layout.ladder_manifest());
    out << "synthetic ladder: " << s.base_images << " train + " << s.heldout_images
        << " held-out images, " << s.levels << " levels -> " << layout.ladder_manifest().string() << '\n';
  } else {
    records = resolve_paths(load_manifest(config.manifest), config.manifest.parent_path());
  }
  validate_manifest(records);

  StageBoundary boundary;
  if (config.boundary_override) {
    boundary = detect_stage_boundary({}, config.boundary_override);
  } else {
    std::vector<std::int64_t> iterations;
    for (const auto& r : records) {
      if (r.role == Role::Generated && r.split == Split::Train && r.iteration_tag && !r.epsilon) {
        iterations.push_back(*r.iteration_tag);
      }
    }
    boundary = boundary_for_checkpoints(read_fid_curve(config.fid_curve), tag_checkpoints(iterations));
  }

  TrainingSetConfig tc;
  tc.num_classifiers = config.bank.num_classifiers;
  tc.boundary = boundary;
  tc.epsilons = config.epsilons;
  tc.augmentation = config.augmentation;
  tc.samples_per_level = config.samples_per_level;
  tc.split = Split::Train;
  const auto samples = build_training_set(records, tc, file_loader(config.image_side));

  auto labeled = export_labeled_manifest(samples, records, layout.prepared_images());
  for (const auto& r : records) {
    if (r.split != Split::Train) labeled.push_back(r);
  }
  write_manifest(labeled, layout.prepared_manifest());

  PrepareResult result{layout.prepared_manifest(), boundary.boundary_index, level_counts(samples)};
  out << "stage boundary: checkpoint " << boundary.boundary_index << '\n';
  out << "samples: " << samples.size() << " in " << result.level_counts.size() << " levels\n";
  out << "label,count\n";
  for (const auto& [label, count] : result.level_counts) {
    out << format("%.4f", label) << ',' << count << '\n';
  }
  out << "manifest: " << result.manifest.string() << '\n';
  return result;
}

fs::path cmd_train(const RunConfig& config, const RunLayout& layout,
                   const std::optional<fs::path>& resume, std::ostream& out) {
  if (!fs::exists(layout.prepared_manifest())) {
    fail(ErrorKind::Io, "no prepared manifest at " + layout.prepared_manifest().string() +
                            "; run prepare first");
  }
  write_config(config, layout);
  const auto records = load_manifest(layout.prepared_manifest());
  const auto dataset = samples_from_labeled_manifest(records, config.bank.num_classifiers,
                                                     config.augmentation, file_loader(config.image_side));

  TrainOptions options;
  options.encoder_config = config.encoder;
  options.bank_config = config.bank;
  options.augmentation = config.augmentation;
  options.image_side = config.image_side;
  if (resume) {
    options.resume = load_checkpoint(*resume);
    if (options.resume->image_side != config.image_side) {
      fail(ErrorKind::Config, "resume checkpoint was trained at side " +
                                  std::to_string(options.resume->image_side));
    }
    out << "resuming from epoch " << options.resume->epoch << '\n';
  }

  const bool append = resume && fs::exists(layout.train_log());
  std::ofstream log(layout.train_log(), append ? std::ios::app : std::ios::trunc);
  if (!log) fail(ErrorKind::Io, "cannot write " + layout.train_log().string());
  if (!append) write_log_header(log);

  std::size_t epoch = 0;
  double epoch_sum = 0.0;
  std::size_t epoch_steps = 0;
  const auto flush_epoch = [&] {
    if (epoch_steps == 0) return;
    out << "epoch " << epoch << " mean total " << format("%.6f", epoch_sum / epoch_steps) << '\n';
    out.flush();
  };
  options.on_step = [&](const LogRow& row) {
    write_log_row(log, row);
    if (row.epoch != epoch) {
      flush_epoch();
      epoch = row.epoch;
      epoch_sum = 0.0;
      epoch_steps = 0;
    }
    epoch_sum += row.loss.total;
    ++epoch_steps;
  };
  options.on_checkpoint = [&](const Checkpoint& ckpt) {
    log.flush();
    save_checkpoint(ckpt, layout.epoch_checkpoint(ckpt.epoch));
  };

  const auto result = train(dataset, config.train, config.loss, options);
  flush_epoch();
  save_checkpoint(result.checkpoint, layout.checkpoint());
  out << "checkpoint: " << layout.checkpoint().string() << '\n';
  return layout.checkpoint();
}

double cmd_score(const fs::path& checkpoint, const fs::path& reference, const fs::path& generated,
                 std::ostream& out) {
  const auto ckpt = load_checkpoint(checkpoint);
  const auto ref = load_image(reference, ckpt.image_side);
  const auto gen = load_image(generated, ckpt.image_side);
  const double s = score(ckpt.model, ref, gen);
  out << format("%.17g", s) << '\n';
  return s;
}

EvalResult cmd_eval(const EvalRequest& request, std::ostream& out, std::ostream& err) {
  const auto triplets = load_preferences(request.preferences);
  if (triplets.size() < 3) {
    fail(ErrorKind::InsufficientData, "consistency needs at least 3 triplets, got " +
                                          std::to_string(triplets.size()));
  }
  ConsistencyOptions options;
  options.shuffle_seed = request.shuffle_seed;

  std::optional<Checkpoint> ckpt;
  if (request.checkpoint) ckpt = load_checkpoint(*request.checkpoint);
  CachedLoader images(ckpt ? ckpt->image_side : request.image_side);

  EvalResult result;
  const auto run = [&](const std::string& name, const Scorer& scorer) {
    try {
      result.reports.push_back(consistency(scorer, triplets, name, options));
    } catch (const Error& e) {
      err << name << ": " << e.what() << '\n';
      if (!result.failure) result.failure = e;
    }
  };
  if (ckpt) {
    run("risa", [&](const std::string& r, const std::string& c) {
      return score(ckpt->model, images(r), images(c));
    });
  }
  for (const auto& name : request.baselines) {
    if (name == "psnr") {
      run(name, [&](const std::string& r, const std::string& c) { return psnr(images(r), images(c)); });
    } else if (name == "ssim") {
      run(name, [&](const std::string& r, const std::string& c) { return ssim(images(r), images(c)); });
    } else if (name == "ms_ssim" || name == "msssim") {
      run("ms_ssim", [&](const std::string& r, const std::string& c) {
        return ms_ssim(images(r), images(c));
      });
    } else {
      fail(ErrorKind::Config, "unknown baseline '" + name + "' (expected psnr, ssim or ms_ssim)");
    }
  }
  if (result.reports.empty() && !result.failure) {
    fail(ErrorKind::Config, "nothing to evaluate: give a checkpoint or --baselines");
  }
  print_table(result.reports, out);
  if (!request.report_stem.empty() && !result.reports.empty()) {
    if (request.report_stem.has_parent_path()) fs::create_directories(request.report_stem.parent_path());
    report(result.reports, request.report_stem);
    out << "report: " << request.report_stem.string() << ".csv\n";
  }
  return result;
}

std::vector<ConsistencyReport> cmd_report(const std::vector<fs::path>& inputs, const fs::path& stem,
                                          std::ostream& out) {
  std::vector<ConsistencyReport> all;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open report " + path.string());
    const auto reports = read_report_csv(in);
    all.insert(all.end(), reports.begin(), reports.end());
  }
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  report(all, stem);
  print_table(all, out);
  return all;
}

void print_table(const std::vector<ConsistencyReport>& reports, std::ostream& out) {
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %9s %8s %6s\n", "metric", "mean(%)", "std(%)", "n");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-10s %9.2f %8.2f %6zu\n", r.metric_name.c_str(),
                  100.0 * r.mean_consistency, 100.0 * r.std, r.n_triplets);
    out << line;
  }
}

}  // namespace risa::cli
