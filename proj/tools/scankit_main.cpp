// Copyright 2026 The scankit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ==============================================================================

// scankit: command-line front end.
//
//   scankit convert   --in raw.jsonl --out canonical.jsonl
//   scankit evaluate  --gen g.jsonl --gt t.jsonl --out report.json
//   scankit baseline  --gt t.jsonl --kind human|random|both --out report.json
//   scankit train     --scanpaths t.jsonl --images DIR --out model.ckpt
//   scankit generate  --image x.png --n 100 --seed 7 --out g.jsonl
//   scankit analyze   --scanpaths g.jsonl --out-dir DIR
//   scankit thumbnail --image x.png --out-dir DIR
//
// Every option can also come from a TOML/INI file (--config) or from an
// environment variable SCANKIT_<OPTION>. Precedence: flags, config file,
// environment, defaults. Failures print one line
//   scankit: error: <code>: <message>
// to stderr and exit nonzero.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scankit/behavior.hpp"
#include "scankit/checkpoint.hpp"
#include "scankit/gan.hpp"
#include "scankit/io.hpp"
#include "scankit/metrics.hpp"
#include "scankit/png_io.hpp"
#include "scankit/thumbnail.hpp"

namespace fs = std::filesystem;
using namespace scankit;

namespace {

/// Failure with a stable machine-readable code.
class CliError : public std::runtime_error {
 public:
  CliError(std::string code, const std::string& msg) : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

void progress(const std::string& msg) { std::cerr << "progress: " << msg << std::endl; }
void warn(const std::string& msg) { std::cerr << "warning: " << msg << std::endl; }

std::string env_name(const std::string& flag) {
  std::string out = "SCANKIT_";
  for (char c : flag) out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

/// Adds an option bound to `var` with its env var and default shown in help.
template <class T>
CLI::Option* opt(CLI::App* app, const std::string& name, T& var, const std::string& help) {
  return app->add_option("--" + name, var, help)->envname(env_name(name))->capture_default_str();
}

CLI::Option* flag(CLI::App* app, const std::string& name, bool& var, const std::string& help) {
  return app->add_flag("--" + name, var, help)->envname(env_name(name));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CliError("io", "cannot open '" + path + "' for writing");
  return os;
}

/// Writes to `path`, or stdout for "-".
template <class Fn>
void with_output(const std::string& path, Fn fn) {
  if (path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream os = open_out(path);
  fn(os);
  if (!os) throw CliError("io", "write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Shared option groups

struct IngestOptions {
  double hz = 1.0;
  std::size_t length = kCanonicalScanpathLength;
  std::string short_policy = "reject";
  bool degrees = false;

  void add(CLI::App* app) {
    opt(app, "hz", hz, "Target sampling rate of the scanpath lattice (Hz)");
    opt(app, "length", length, "Target samples per scanpath");
    opt(app, "short", short_policy, "Records shorter than --length: reject or truncate")
        ->check(CLI::IsMember({"reject", "truncate"}));
    flag(app, "degrees", degrees, "Angles in input files are degrees instead of radians");
  }

  IngestConfig config() const {
    IngestConfig c;
    c.target_hz = hz;
    c.target_length = length;
    c.short_policy = short_policy == "truncate" ? ShortRecordPolicy::kTruncate : ShortRecordPolicy::kReject;
    c.degrees = degrees;
    return c;
  }
};

IngestResult load_scanpaths(const std::string& path, const IngestOptions& o) {
  IngestResult r;
  try {
    r = ingest_file(path, o.config());
  } catch (const ParseError& e) {
    throw CliError("parse", path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw CliError("io", e.what());
  }
  for (const auto& w : r.warnings) warn(path + ": " + w);
  return r;
}

struct MetricOptions {
  MetricConfig cfg;

  void add(CLI::App* app) {
    opt(app, "grid-lat", cfg.grid.n_lat, "Latitude bins of the string alphabet (LEV, SMT)");
    opt(app, "grid-lon", cfg.grid.n_lon, "Longitude bins of the string alphabet (LEV, SMT)");
    opt(app, "scanmatch-max", cfg.scanmatch.max_score, "ScanMatch substitution score for identical bins");
    opt(app, "scanmatch-gap", cfg.scanmatch.gap_penalty, "ScanMatch gap penalty");
    opt(app, "radius", cfg.recurrence.radius, "Recurrence radius (radians)");
    opt(app, "min-line", cfg.recurrence.min_line, "Minimum line length for DET and LAM");
    opt(app, "tde-window", cfg.tde_window, "TDE window length");
    opt(app, "tde-stride", cfg.tde_stride, "TDE stride over the first scanpath");
  }

  MetricConfig config() const {
    cfg.grid.validate();
    cfg.recurrence.validate();
    if (cfg.tde_window == 0 || cfg.tde_stride == 0) throw CliError("config", "TDE window and stride must be positive");
    return cfg;
  }
};

void write_reports(const std::string& path, const std::string& format, const std::vector<MetricReport>& reps) {
  with_output(path, [&](std::ostream& os) {
    if (format == "text")
      write_reports_text(os, reps);
    else
      write_reports_json(os, reps);
  });
}

EquirectImage load_image(const std::string& path) {
  EquirectImage img;
  try {
    img = read_png(path);
  } catch (const ImageError& e) {
    throw CliError("io", e.what());
  }
  if (img.width() != 2 * img.height()) {
    warn(path + ": " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
         " is not 2:1; resampling to equirectangular aspect");
    img = enforce_equirect_aspect(img);
  }
  return img;
}

ScanGan load_or_init_model(const std::string& model, std::uint64_t init_seed) {
  if (model.empty()) {
    warn("no --model given; using the seeded initialization (seed " + std::to_string(init_seed) + ")");
    return ScanGan::create(ModelConfig{}, init_seed);
  }
  try {
    return load_checkpoint(model).model;
  } catch (const CheckpointError& e) {
    throw CliError("checkpoint", e.what());
  }
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

// ---------------------------------------------------------------------------
// Subcommands

struct ConvertCmd {
  std::string in, out = "-";
  IngestOptions ingest;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("convert", "Ingest raw gaze rows and write the canonical 1 Hz JSON-lines file");
    opt(app, "in", in, "Raw JSON-lines gaze file")->required();
    opt(app, "out", out, "Output file ('-' for stdout)");
    ingest.add(app);
    app->callback([this] { run(); });
  }

  void run() {
    const IngestResult r = load_scanpaths(in, ingest);
    std::size_t n = 0;
    for (const auto& [id, img] : r.images) n += img.set.size();
    with_output(out, [&](std::ostream& os) { write_ingested(os, r); });
    progress("converted " + std::to_string(n) + " scanpaths over " + std::to_string(r.images.size()) + " images");
  }
};

struct EvaluateCmd {
  std::string gen, gt, out = "-", format = "json";
  IngestOptions ingest;
  MetricOptions metrics;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("evaluate", "Pairwise metrics of generated scanpaths against ground truth, per image");
    opt(app, "gen", gen, "Generated scanpaths (JSON lines)")->required();
    opt(app, "gt", gt, "Ground-truth scanpaths (JSON lines)")->required();
    opt(app, "out", out, "Report file ('-' for stdout)");
    opt(app, "format", format, "Report format")->check(CLI::IsMember({"json", "text"}));
    ingest.add(app);
    metrics.add(app);
    app->callback([this] { run(); });
  }

  void run() {
    const MetricConfig cfg = metrics.config();
    const auto g = load_scanpaths(gen, ingest).sets();
    const auto t = load_scanpaths(gt, ingest).sets();
    std::vector<MetricReport> reps;
    for (const auto& [id, truth] : t) {
      const auto it = g.find(id);
      if (it == g.end()) {
        warn("no generated scanpaths for image '" + id + "'");
        continue;
      }
      progress("evaluating image '" + id + "'");
      reps.push_back(report_pairwise(it->second, truth, cfg));
    }
    for (const auto& [id, set] : g)
      if (!t.count(id)) warn("no ground truth for generated image '" + id + "'");
    if (reps.empty()) throw CliError("invalid", "generated and ground-truth files share no image ids");
    write_reports(out, format, reps);
  }
};

struct BaselineCmd {
  std::string gt, out = "-", format = "json", kind = "both";
  std::size_t n = 0;
  std::uint64_t seed = 0;
  IngestOptions ingest;
  MetricOptions metrics;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("baseline", "Human and random baselines for a ground-truth set, per image");
    opt(app, "gt", gt, "Ground-truth scanpaths (JSON lines)")->required();
    opt(app, "kind", kind, "Which baseline")->check(CLI::IsMember({"human", "random", "both"}));
    opt(app, "n", n, "Random scanpaths per image (0 = as many as the ground truth)");
    opt(app, "seed", seed, "Seed of the random baseline");
    opt(app, "out", out, "Report file ('-' for stdout)");
    opt(app, "format", format, "Report format")->check(CLI::IsMember({"json", "text"}));
    ingest.add(app);
    metrics.add(app);
    app->callback([this] { run(); });
  }

  void run() {
    const MetricConfig cfg = metrics.config();
    std::vector<MetricReport> reps;
    std::size_t index = 0;
    for (const auto& [id, truth] : load_scanpaths(gt, ingest).sets()) {
      progress("baselines for image '" + id + "'");
      if (kind != "random") {
        if (truth.size() < 2)
          warn("image '" + id + "' has fewer than two scanpaths; no human baseline");
        else
          reps.push_back(report_human_baseline(truth, cfg));
      }
      if (kind != "human") {
        // Each image draws from its own stream so adding images leaves others unchanged.
        MetricReport r = report_random_baseline(truth, n ? n : truth.size(), derive_seed(seed, index), cfg);
        r.seed = seed;
        reps.push_back(r);
      }
      ++index;
    }
    if (reps.empty()) throw CliError("invalid", "no baselines could be computed");
    write_reports(out, format, reps);
  }
};

struct TrainCmd {
  std::string scanpaths, images, val_scanpaths, out, resume, log;
  TrainConfig cfg;
  IngestOptions ingest;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("train", "Train the generator and discriminator; writes the best checkpoint");
    opt(app, "scanpaths", scanpaths, "Training scanpaths (JSON lines)");
    opt(app, "images", images, "Directory holding <image_id>.png panoramas");
    opt(app, "val-scanpaths", val_scanpaths, "Validation scanpaths (default: the training set)");
    opt(app, "out", out, "Output checkpoint (lowest validation soft-DTW)")->required();
    opt(app, "resume", resume, "Resume from a checkpoint written by a previous run");
    opt(app, "log", log, "Per-epoch JSON-lines log (default: <out>.log.jsonl)");
    opt(app, "epochs", cfg.epochs, "Epochs");
    opt(app, "max-steps", cfg.max_steps, "Cap on mini-batch steps (0 = none)");
    opt(app, "seed", cfg.seed, "Seed for initialization, shuffling, latents and augmentation");
    opt(app, "lr-g", cfg.lr_g, "Generator learning rate");
    opt(app, "lr-d", cfg.lr_d, "Discriminator learning rate");
    opt(app, "beta1", cfg.beta1, "Adam beta1");
    opt(app, "beta2", cfg.beta2, "Adam beta2");
    opt(app, "batch", cfg.batch, "Mini-batch size");
    opt(app, "gen-cycles", cfg.gen_cycles_per_disc, "Generator updates per discriminator update");
    opt(app, "lambda-dtw", cfg.lambda_dtw, "Weight of the soft-DTW term in the generator loss");
    opt(app, "gamma", cfg.gamma, "Soft-DTW smoothing");
    opt(app, "augment", cfg.augment_variants, "Longitude-shifted copies per image (0 = off)");
    flag(app, "non-saturating", cfg.non_saturating, "Use the -log D(fake) generator loss");
    opt(app, "val-samples", cfg.val_samples, "Generated scanpaths per validation image");
    opt(app, "image-height", cfg.model.image_height, "Model input height");
    opt(app, "image-width", cfg.model.image_width, "Model input width");
    opt(app, "latent-dim", cfg.model.latent_dim, "Latent size");
    opt(app, "feature-dim", cfg.model.feature_dim, "Image feature size");
    ingest.add(app);
    app->callback([this] { run(); });
  }

  std::vector<TrainingExample> load_examples(const std::string& path) const {
    std::vector<TrainingExample> out;
    for (const auto& [id, set] : load_scanpaths(path, ingest).sets()) {
      const fs::path png = fs::path(images) / (id + ".png");
      out.push_back({load_image(png.string()), set});
    }
    return out;
  }

  void run() {
    int start_epoch = 0;
    std::optional<ScanGan> resumed;
    if (!resume.empty()) {
      try {
        Checkpoint ck = load_checkpoint(resume);
        if (ck.model.config != cfg.model) warn("model config taken from the resumed checkpoint");
        cfg.model = ck.model.config;
        start_epoch = ck.epoch;
        resumed = std::move(ck.model);
      } catch (const CheckpointError& e) {
        throw CliError("checkpoint", e.what());
      }
      progress("resuming at epoch " + std::to_string(start_epoch));
    }
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw CliError("config", e.what());
    }
    std::vector<TrainingExample> data, val;
    if (cfg.epochs > start_epoch) {
      if (scanpaths.empty() || images.empty()) throw CliError("config", "--scanpaths and --images are required to train");
      data = load_examples(scanpaths);
      if (!val_scanpaths.empty()) val = load_examples(val_scanpaths);
    }
    const std::string log_path = log.empty() ? out + ".log.jsonl" : log;
    std::ofstream log_os = open_out(log_path);
    const std::string resume_path = out + ".resume";

    TrainHooks hooks;
    hooks.should_stop = [] { return g_interrupted.load(); };
    const auto t0 = std::chrono::steady_clock::now();
    hooks.on_epoch = [&](const EpochLog& e) {
      EpochLog stamped = e;
      stamped.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log_os << to_json_line(stamped) << std::endl;
      progress("epoch " + std::to_string(e.epoch) + " steps " + std::to_string(e.steps) +
               " val_soft_dtw " + format_double(e.val_soft_dtw));
    };
    TrainResult r;
    try {
      r = train(data, cfg, val, hooks, std::move(resumed), start_epoch);
    } catch (const TrainingDiverged& e) {
      const std::string dump = out + ".diverged.json";
      std::ofstream(dump) << e.state() << "\n";
      throw CliError("training", std::string(e.what()) + " (state dumped to " + dump + ")");
    } catch (const std::invalid_argument& e) {
      throw CliError("invalid", e.what());
    }
    save_checkpoint(out, r.best_model, &cfg, r.best_epoch);
    save_checkpoint(resume_path, r.final_model, &cfg, r.epochs_completed);
    progress("best epoch " + std::to_string(r.best_epoch) + " written to " + out + "; resumable state in " + resume_path);
    if (r.interrupted)
      throw CliError("interrupted", "stopped after epoch " + std::to_string(r.epochs_completed) + "; resume with --resume " +
                                        resume_path);
  }
};

struct GenerateCmd {
  std::string image, model, out = "-", image_id;
  std::size_t n = 100;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool degrees = false;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("generate", "Sample scanpaths for a panorama");
    opt(app, "image", image, "Equirectangular PNG")->required();
    opt(app, "model", model, "Checkpoint (default: seeded initialization)");
    opt(app, "n", n, "Scanpaths to generate");
    opt(app, "seed", seed, "Latent seed; sample k uses stream k");
    opt(app, "threads", threads, "Worker threads (output does not depend on it)");
    opt(app, "image-id", image_id, "image_id written to every row (default: file stem)");
    opt(app, "out", out, "Output JSON lines ('-' for stdout)");
    flag(app, "degrees", degrees, "Write angles in degrees");
    app->callback([this] { run(); });
  }

  void run() {
    const EquirectImage img = load_image(image);
    const ScanGan m = load_or_init_model(model, seed);
    const auto t0 = std::chrono::steady_clock::now();
    const ScanpathSet s = generate(img, n, m, seed, threads, image_id.empty() ? stem(image) : image_id);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    with_output(out, [&](std::ostream& os) { write_scanpaths(os, s, degrees); });
    progress("generated " + std::to_string(n) + " scanpaths in " + format_double(secs) + " s");
  }
};

struct AnalyzeCmd {
  std::string scanpaths, out_dir = ".", image_id;
  int height = 64, width = 128;
  double sigma = 5.0, kappa = kDefaultKappa, bin_deg = 40.0;
  std::vector<double> kde_times{0.0, 10.0, 20.0};
  unsigned threads = 1;
  IngestOptions ingest;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("analyze", "Aggregate map, KDE, exploration time and ROC for each image");
    opt(app, "scanpaths", scanpaths, "Scanpaths (JSON lines)")->required();
    opt(app, "out-dir", out_dir, "Directory for the outputs");
    opt(app, "image-id", image_id, "Only this image (default: all)");
    opt(app, "height", height, "Map height");
    opt(app, "width", width, "Map width");
    opt(app, "sigma", sigma, "Aggregate-map blur (degrees)");
    opt(app, "kappa", kappa, "vMF concentration of the KDE");
    opt(app, "bin-deg", bin_deg, "Start-region bin width (degrees)");
    opt(app, "kde-times", kde_times, "Timestamps (s) for KDE maps")->delimiter(',');
    opt(app, "threads", threads, "Worker threads for the ROC");
    ingest.add(app);
    app->callback([this] { run(); });
  }

  void run() {
    fs::create_directories(out_dir);
    const auto sets = load_scanpaths(scanpaths, ingest).sets();
    bool any = false;
    for (const auto& [id, set] : sets) {
      if (!image_id.empty() && id != image_id) continue;
      any = true;
      if (g_interrupted) throw CliError("interrupted", "stopped before image '" + id + "'");
      progress("analyzing image '" + id + "'");
      const fs::path base = fs::path(out_dir) / id;
      const AggregateMap agg = aggregate_map(set, height, width, sigma);
      write_png(base.string() + "_aggregate.png", heatmap_image(agg));
      write_matrix_csv(base.string() + "_aggregate.csv", agg);

      for (double t : kde_times) {
        const DensityMap d = kde_timestamp(set, t, kappa, height, width);
        const ModeAndSpread ms = kde_mode_and_spread(d);
        const std::string name = base.string() + "_kde_t" + format_double(t);
        write_png(name + ".png", heatmap_image(d.density));
        progress("kde t=" + format_double(t) + " mode lat " + format_double(rad_to_deg(ms.mode.lat)) + " lon " +
                 format_double(rad_to_deg(ms.mode.lon)) + " spread " + format_double(rad_to_deg(ms.spread)) + " deg");
      }

      const ExplorationCurve ex = exploration_time(set);
      with_output(base.string() + "_exploration.csv", [&](std::ostream& os) {
        os << "offset_deg,mean_time_s,coverage\n";
        for (std::size_t k = 0; k < ex.offsets_deg.size(); ++k)
          os << format_double(ex.offsets_deg[k]) << "," << (std::isnan(ex.mean_time[k]) ? "" : format_double(ex.mean_time[k]))
             << "," << format_double(ex.coverage[k]) << "\n";
      });

      with_output(base.string() + "_regions.csv", [&](std::ostream& os) {
        os << "lon_begin_deg,lon_end_deg,scanpaths\n";
        for (const auto& g : start_region_partition(set, bin_deg))
          os << format_double(g.lon_begin_deg) << "," << format_double(g.lon_end_deg) << "," << g.scanpaths.size() << "\n";
      });

      if (set.size() >= 2) {
        RocConfig rc{height, width, sigma, {}, threads};
        const RocCurve roc = roc_congruency(set, rc);
        with_output(base.string() + "_roc.csv", [&](std::ostream& os) {
          os << "salient_percent,hit_rate_percent\n";
          for (std::size_t k = 0; k < roc.salient_percent.size(); ++k)
            os << format_double(roc.salient_percent[k]) << "," << format_double(roc.hit_rate[k]) << "\n";
        });
      } else {
        warn("image '" + id + "' has fewer than two scanpaths; no ROC");
      }
    }
    if (!any) throw CliError("invalid", image_id.empty() ? "no scanpaths in input" : "image '" + image_id + "' not found");
  }
};

struct ThumbnailCmd {
  std::string image, model, out_dir = ".";
  ThumbnailConfig cfg;
  int view_width = 320, view_height = 180, upsample = 1;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("thumbnail", "Viewport trajectory and rendered frames for a panorama");
    opt(app, "image", image, "Equirectangular PNG")->required();
    opt(app, "model", model, "Checkpoint (default: seeded initialization)");
    opt(app, "out-dir", out_dir, "Directory for trajectory.jsonl and frame PNGs");
    opt(app, "n", cfg.n, "Generated scanpaths feeding the KDE");
    opt(app, "seed", cfg.seed, "Latent seed");
    opt(app, "kappa", cfg.kappa, "vMF concentration of the KDE");
    opt(app, "fov-a", cfg.fov_a, "fov degrees per degree of spread");
    opt(app, "fov-b", cfg.fov_b, "fov offset (degrees)");
    opt(app, "fov-min", cfg.fov_min, "Smallest fov (degrees)");
    opt(app, "fov-max", cfg.fov_max, "Largest fov (degrees)");
    opt(app, "max-pan", cfg.max_pan_deg_per_s, "Pan-rate limit (degrees per second)");
    opt(app, "fov-window", cfg.fov_window, "Moving-average window of the fov (frames)");
    opt(app, "threads", cfg.threads, "Generation threads");
    opt(app, "view-width", view_width, "Frame width");
    opt(app, "view-height", view_height, "Frame height");
    opt(app, "upsample", upsample, "Interpolated frames per second of trajectory");
    app->callback([this] { run(); });
  }

  void run() {
    const EquirectImage img = load_image(image);
    const ScanGan m = load_or_init_model(model, cfg.seed);
    std::vector<TrajectoryFrame> frames;
    try {
      frames = upsample_trajectory(thumbnail_trajectory(img, m, cfg), upsample);
    } catch (const std::invalid_argument& e) {
      throw CliError("config", e.what());
    }
    fs::create_directories(out_dir);
    with_output((fs::path(out_dir) / "trajectory.jsonl").string(), [&](std::ostream& os) {
      for (const auto& f : frames)
        os << "{\"t\":" << format_double(f.t) << ",\"lat\":" << format_double(f.center.lat)
           << ",\"lon\":" << format_double(f.center.lon) << ",\"fov_deg\":" << format_double(f.fov_deg) << "}\n";
    });
    for (std::size_t k = 0; k < frames.size(); ++k) {
      if (g_interrupted) throw CliError("interrupted", "stopped after " + std::to_string(k) + " frames");
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04zu.png", k);
      write_png((fs::path(out_dir) / name).string(), render_viewport(img, frames[k], view_height, view_width));
    }
    progress("wrote " + std::to_string(frames.size()) + " frames to " + out_dir);
  }
};

/// Every option of the selected subcommand with its final value.
void log_resolved_config(const CLI::App& app) {
  for (const CLI::App* sub : app.get_subcommands()) {
    std::istringstream lines(sub->config_to_str(true, false));
    std::string line;
    std::cerr << "config: [" << sub->get_name() << "]" << std::endl;
    while (std::getline(lines, line))
      if (!line.empty()) std::cerr << "config: " << line << std::endl;
  }
}

int fail(const std::string& code, const std::string& msg) {
  std::string flat = msg;
  for (char& c : flat)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << "scankit: error: " << code << ": " << flat << std::endl;
  return code == "usage" ? 2 : code == "interrupted" ? 130 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical scanpath toolkit: ingest, evaluate, train, generate, analyze, thumbnail"};
  app.name("scankit");
  app.set_config("--config", "", "TOML/INI file with option values; [subcommand] sections apply to that subcommand");
  app.allow_config_extras(false);
  app.require_subcommand(1);

  ConvertCmd convert;
  EvaluateCmd evaluate;
  BaselineCmd baseline;
  TrainCmd train_cmd;
  GenerateCmd generate_cmd;
  AnalyzeCmd analyze;
  ThumbnailCmd thumbnail;
  convert.add(app);
  evaluate.add(app);
  baseline.add(app);
  train_cmd.add(app);
  generate_cmd.add(app);
  analyze.add(app);
  thumbnail.add(app);

  // Callbacks run after parsing; log the resolved configuration first.
  app.parse_complete_callback([&] { log_resolved_config(app); });

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  } catch (const CliError& e) {
    return fail(e.code(), e.what());
  } catch (const CheckpointError& e) {
    return fail("checkpoint", e.what());
  } catch (const ImageError& e) {
    return fail("io", e.what());
  } catch (const ParseError& e) {
    return fail("parse", e.what());
  } catch (const std::invalid_argument& e) {
    return fail("invalid", e.what());
  } catch (const std::out_of_range& e) {
    return fail("invalid", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
