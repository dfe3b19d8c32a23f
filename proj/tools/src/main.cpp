#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "commands.hpp"

namespace {

using namespace minr;
using namespace minr::cli;

constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kNumeric = 4;

std::vector<std::size_t> parse_ids(const std::string& text) {
  // Same grammar as --share: comma-separated non-negative integers.
  return text.empty() ? std::vector<std::size_t>{} : parse_share(text == "none" ? "" : text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-image implicit neural representations"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  // fit
  FitOptions fit;
  std::string fit_mode = "minr", fit_share, frames_dir;
  bool no_projection = false, projection = false;
  fs::path fit_out;
  std::size_t threads = 0;
  auto* fit_cmd = app.add_subcommand("fit", "Train a representation of one or more images");
  fit_cmd->add_option("--mode", fit_mode, "separate, minr, row, column, grid or id")
      ->check(CLI::IsMember({"separate", "minr", "row", "column", "grid", "id"}));
  auto* images_opt = fit_cmd->add_option("--images", fit.images, "PNG inputs, image ids follow this order");
  auto* frames_opt = fit_cmd->add_option("--frames-dir", frames_dir, "Directory of PNG frames (lexicographic order)");
  images_opt->excludes(frames_opt);
  fit_cmd->add_option("--width", fit.width, "Hidden width")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--layers", fit.layers, "Number of intermediate W x W layers");
  auto* share_opt = fit_cmd->add_option("--share", fit_share, "Shared intermediate positions, e.g. 1,2,3 or none");
  auto* proj_flag = fit_cmd->add_flag("--projection", projection, "Per-image projection layer (default)");
  auto* noproj_flag = fit_cmd->add_flag("--no-projection", no_projection, "Drop the projection layer");
  proj_flag->excludes(noproj_flag);
  fit_cmd->add_option("--activation", fit.activation, "sine, gauss, wire, finer")
      ->check(CLI::IsMember({"sine", "gauss", "wire", "finer"}));
  fit_cmd->add_option("--omega0", fit.omega0, "Frequency for sine/finer/wire")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--gauss-s", fit.gauss_s, "Gaussian width")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--wire-s0", fit.wire_s0, "Wavelet envelope scale")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--steps", fit.steps, "Optimization steps");
  fit_cmd->add_option("--lr", fit.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit.seed, "Run seed");
  fit_cmd->add_option("--batch", fit.batch, "Coordinates per image per step above which batches are sampled")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--downsample", fit.downsample, "Block-mean downsample inputs by 2 or 4 before training")
      ->check(CLI::IsMember({1, 2, 4}));
  fit_cmd->add_option("--eval-every", fit.eval_every, "Record PSNR every k steps (0: end only)");
  fit_cmd->add_option("--threads", threads, "Worker threads (default: $MINR_THREADS or all cores)");
  fit_cmd->add_option("--out", fit_out, "Output directory")->required();

  // reconstruct / superres
  ReconstructOptions rec;
  std::string rec_ids;
  auto add_render_options = [&](CLI::App* cmd) {
    cmd->add_option("--ckpt", rec.ckpt, "Checkpoint written by fit")->required()->check(CLI::ExistingFile);
    cmd->add_option("--manifest", rec.manifest, "Manifest of the run (default: beside the checkpoint)");
    cmd->add_option("--ids", rec_ids, "Comma-separated image ids (default: all)");
    cmd->add_option("--reference", rec.references, "Reference PNG per id for PSNR/SSIM");
    cmd->add_flag("--full-load", rec.full_load, "Load the whole checkpoint instead of one image's layers");
    cmd->add_option("--out", rec.out, "Output directory")->required();
  };
  auto* rec_cmd = app.add_subcommand("reconstruct", "Render images on their native grids");
  add_render_options(rec_cmd);
  std::size_t scale = 2;
  auto* sr_cmd = app.add_subcommand("superres", "Render images at an integer upscaling factor");
  add_render_options(sr_cmd);
  sr_cmd->add_option("--scale", scale, "1, 2 or 4");

  // params
  ParamsOptions params;
  std::string params_mode = "minr", params_share;
  bool params_noproj = false, params_proj = false;
  auto* params_cmd = app.add_subcommand("params", "Count parameters of a checkpoint or configuration");
  params_cmd->add_option("--ckpt", params.ckpt, "Checkpoint to count")->check(CLI::ExistingFile);
  params_cmd->add_option("--mode", params_mode)->check(CLI::IsMember({"separate", "minr", "row", "column", "grid", "id"}));
  params_cmd->add_option("--width", params.width)->check(CLI::PositiveNumber);
  params_cmd->add_option("--layers", params.layers);
  params_cmd->add_option("--n-images", params.n_images);
  auto* params_share_opt = params_cmd->add_option("--share", params_share);
  params_cmd->add_flag("--projection", params_proj)->excludes(params_cmd->add_flag("--no-projection", params_noproj));
  params_cmd->add_option("--sweep", params.sweep, "Print separate vs MINR counts for 1..N images as CSV");

  // analyze
  AnalyzeOptions analyze;
  auto* an_cmd = app.add_subcommand("analyze", "Layer-wise weight histograms and distribution distances");
  an_cmd->add_option("--ckpt", analyze.ckpts, "Checkpoints to compare")->required()->check(CLI::ExistingFile);
  an_cmd->add_option("--image-id", analyze.image_id, "Per-image network view inside each checkpoint");
  an_cmd->add_option("--bins", analyze.bins, "Histogram bins (>= 3)");
  an_cmd->add_option("--out", analyze.out, "Output directory")->required();

  // rerun
  fs::path rerun_manifest, rerun_out;
  auto* rerun_cmd = app.add_subcommand("rerun", "Repeat a fit from its manifest");
  rerun_cmd->add_option("--manifest", rerun_manifest)->required()->check(CLI::ExistingFile);
  rerun_cmd->add_option("--out", rerun_out)->required();
  rerun_cmd->add_option("--threads", threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*fit_cmd) {
      fit.mode = parse_mode(fit_mode);
      if (!frames_dir.empty()) fit.images = list_frames(frames_dir);
      if (*share_opt) fit.share = parse_share(fit_share);
      fit.projection = !no_projection;
      if (fit.mode != FitMode::Minr && (*share_opt || *proj_flag || *noproj_flag))
        throw ConfigError("fit: --share/--projection/--no-projection apply to --mode minr only");
      run_fit(fit, fit_out, threads);
    } else if (*rec_cmd) {
      rec.ids = parse_ids(rec_ids);
      run_reconstruct(rec);
    } else if (*sr_cmd) {
      rec.ids = parse_ids(rec_ids);
      rec.scale = scale;
      run_superres(rec);
    } else if (*params_cmd) {
      params.mode = parse_mode(params_mode);
      if (*params_share_opt) params.share = parse_share(params_share);
      params.projection = !params_noproj;
      run_params(params);
    } else if (*an_cmd) {
      run_analyze(analyze);
    } else if (*rerun_cmd) {
      run_rerun(rerun_manifest, rerun_out, threads);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kNumeric;
  } catch (const Error& e) {
    // DataError, FormatError, ShapeError: the inputs do not fit the request.
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  }
  return 0;
}
