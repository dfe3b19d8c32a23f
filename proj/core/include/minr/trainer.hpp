#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minr/image.hpp"
#include "minr/model.hpp"

namespace minr {

inline constexpr std::size_t kFullBatch = std::numeric_limits<std::size_t>::max();
// Images up to this many pixels train on every coordinate each step; larger
// ones sample this many coordinates per step.
inline constexpr std::size_t kDefaultBatch = 128 * 128;

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t steps = 5000;
  std::size_t coord_batch = kDefaultBatch;  // kFullBatch for all coordinates
  std::uint64_t seed = 0;
  std::size_t threads = 0;     // 0: see worker_threads()
  std::size_t eval_every = 0;  // 0: evaluate only at the end

  void validate() const;
};

template <typename T>
struct AdamState {
  std::vector<Tensor2D<T>> m;
  std::vector<Tensor2D<T>> v;
  std::uint64_t t = 0;
};

// One bias-corrected Adam update over params[i] with grads[i]. The state is
// zero-initialized on first use and must keep the same parameter list.
template <typename T>
void adam_step(std::span<Tensor2D<T>* const> params, std::span<const Tensor2D<T>* const> grads, AdamState<T>& state,
               const TrainConfig& config);

struct EvalPoint {
  std::size_t step = 0;
  std::vector<double> psnr;
};

struct TrainReport {
  std::string method;
  std::vector<double> loss_curve;  // one entry per step, pre-update loss
  std::vector<double> psnr;        // per image, at the end
  std::vector<std::optional<double>> ssim;  // empty when the image is below the SSIM window
  std::vector<EvalPoint> evaluations;
  std::size_t param_count = 0;
  double elapsed_seconds = 0.0;

  double mean_psnr() const;
};

template <typename T>
struct SeparateResult {
  std::vector<SirenModel<T>> models;
  TrainReport report;
};

template <typename T>
struct MinrResult {
  MinrModel<T> model;
  TrainReport report;
};

enum class BaselineMode { Row, Column, Grid, Id };

std::string baseline_name(BaselineMode mode);

template <typename T>
struct BaselineResult {
  SirenModel<T> model;
  BaselineMode mode = BaselineMode::Row;
  std::vector<Placement> placements;  // Row/Column/Grid: image regions in the mosaic
  std::size_t mosaic_height = 0;
  std::size_t mosaic_width = 0;
  TrainReport report;
};

// Coordinates and targets of one image for one step.
template <typename T>
struct ImageBatch {
  Tensor2D<T> coords;
  Tensor2D<T> targets;
};

// One SIREN per image, image i seeded with image_seed(seed, i).
template <typename T>
SeparateResult<T> train_separate(const MultiImageDataset& dataset, const NetworkShape& shape,
                                 const TrainConfig& config);

// Joint training. Each step every image contributes its MSE over its batch;
// the reported loss is the mean over images. Shared layers receive the mean
// of the per-image gradients, reduced in image-id order; image-specific
// layers receive the gradient of their own image's loss. One Adam step then
// updates everything.
template <typename T>
MinrResult<T> train_minr(const MultiImageDataset& dataset, const MinrConfig& minr_config,
                         const TrainConfig& config);

template <typename T>
BaselineResult<T> train_concat_baseline(const MultiImageDataset& dataset, BaselineMode mode,
                                        const NetworkShape& shape, const TrainConfig& config);

// Clears every accumulator of `model`, then leaves in it the gradients of one
// MINR step over `batches` (one per image). Returns the per-image losses.
template <typename T>
std::vector<double> compute_minr_gradients(MinrModel<T>& model, std::span<const ImageBatch<T>> batches,
                                           std::size_t threads = 1);

// Reconstructions on each image's native grid.
template <typename T>
std::vector<ImageBuffer> reconstruct_minr(const MinrModel<T>& model, const MultiImageDataset& dataset);

// Renders on the height x width training grid, or on upscaled_grid when
// scale > 1 (output is scale*height x scale*width).
template <typename T>
ImageBuffer render_siren(const SirenModel<T>& model, std::size_t height, std::size_t width, std::size_t scale = 1);

template <typename T>
std::vector<ImageBuffer> reconstruct_baseline(const BaselineResult<T>& result, const MultiImageDataset& dataset);

}  // namespace minr
