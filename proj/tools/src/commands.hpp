#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "manifest.hpp"

namespace minr::cli {

namespace fs = std::filesystem;

void run_fit(const FitOptions& options, const fs::path& out, std::size_t threads);

struct ReconstructOptions {
  fs::path ckpt;
  std::optional<fs::path> manifest;  // default: manifest.json beside the checkpoint
  std::vector<std::size_t> ids;      // default: all images
  std::vector<fs::path> references;  // one per id when given
  fs::path out;
  bool full_load = false;
  std::size_t scale = 1;
};

void run_reconstruct(const ReconstructOptions& options);
void run_superres(const ReconstructOptions& options);

struct ParamsOptions {
  std::optional<fs::path> ckpt;
  FitMode mode = FitMode::Minr;
  std::size_t width = 256;
  std::size_t layers = 3;
  std::size_t n_images = 1;
  std::optional<std::vector<std::size_t>> share;
  bool projection = true;
  std::size_t sweep = 0;
};

void run_params(const ParamsOptions& options);

struct AnalyzeOptions {
  std::vector<fs::path> ckpts;
  std::size_t image_id = 0;
  std::size_t bins = 101;
  fs::path out;
};

void run_analyze(const AnalyzeOptions& options);

void run_rerun(const fs::path& manifest, const fs::path& out, std::size_t threads);

}  // namespace minr::cli
