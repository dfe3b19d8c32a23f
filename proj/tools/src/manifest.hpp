#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "minr/minr.hpp"

namespace minr::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum class FitMode { Separate, Minr, Row, Column, Grid, Id };

std::string mode_name(FitMode mode);
FitMode parse_mode(const std::string& name);
bool is_baseline(FitMode mode);
BaselineMode baseline_mode(FitMode mode);

// Every knob of a fit, with defaults materialized.
struct FitOptions {
  FitMode mode = FitMode::Minr;
  std::vector<std::filesystem::path> images;
  std::size_t width = 256;
  std::size_t layers = 3;
  std::optional<std::vector<std::size_t>> share;  // minr only; unset = all positions
  bool projection = true;
  std::string activation = "sine";
  double omega0 = 0.0;  // 0: activation default
  double gauss_s = 0.0;
  double wire_s0 = 0.0;
  std::size_t steps = 5000;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  std::size_t batch = kDefaultBatch;
  std::size_t downsample = 1;
  std::size_t eval_every = 0;

  NetworkShape shape() const;
  MinrConfig minr_config(std::size_t n_images) const;
  TrainConfig train_config() const;
};

std::vector<std::size_t> parse_share(const std::string& text);
std::string format_share(const std::vector<std::size_t>& share);

struct InputRecord {
  std::string path;
  std::string sha256;
  std::size_t height = 0;  // as trained (after any downsampling)
  std::size_t width = 0;
};

struct Layout {
  std::size_t mosaic_height = 0;
  std::size_t mosaic_width = 0;
  std::vector<Placement> placements;
};

struct Manifest {
  std::string command = "fit";
  FitOptions options;
  std::vector<InputRecord> inputs;
  std::optional<Layout> layout;
  std::vector<std::string> outputs;  // file names inside the output directory
};

std::string sha256_file(const std::filesystem::path& path);

nlohmann::json to_json(const FitOptions& options);
FitOptions fit_options_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& j);

Manifest read_manifest(const std::filesystem::path& path);

}  // namespace minr::cli
