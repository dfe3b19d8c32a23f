#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "minr/tensor.hpp"

namespace minr {

// RGB pixels in [-1, 1], row-major, channel-interleaved.
struct ImageBuffer {
  std::size_t height = 0;
  std::size_t width = 0;
  static constexpr std::size_t channels = 3;
  std::vector<float> data;

  ImageBuffer() = default;
  ImageBuffer(std::size_t h, std::size_t w, float fill = -1.0f) : height(h), width(w), data(h * w * channels, fill) {}

  std::size_t pixels() const { return height * width; }
  float& at(std::size_t y, std::size_t x, std::size_t c) { return data[(y * width + x) * channels + c]; }
  float at(std::size_t y, std::size_t x, std::size_t c) const { return data[(y * width + x) * channels + c]; }

  bool operator==(const ImageBuffer&) const = default;
};

struct MultiImageDataset {
  std::vector<ImageBuffer> images;
  std::size_t size() const { return images.size(); }
};

struct CoordinateGrid {
  Tensor2Df coords;  // d_in x (height*width), y row first, then x
  std::size_t height = 0;
  std::size_t width = 0;
};

ImageBuffer load_image(const std::filesystem::path& path);
void save_image(const ImageBuffer& image, const std::filesystem::path& path);

// PNG files of a directory in lexicographic order, as a video clip.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);
MultiImageDataset load_dataset(const std::vector<std::filesystem::path>& paths);

// Axis value for index i of n: -1 + 2i/(n-1), or 0 when n == 1.
double axis_coordinate(std::size_t i, std::size_t n);
CoordinateGrid make_grid(std::size_t height, std::size_t width);

// Grid of (scale*height) x (scale*width) points placed at the centres of the
// fine pixels, expressed in the coarse image's axis coordinates: fine index j
// sits at coarse index (j + 0.5) / scale - 0.5. scale 1 equals make_grid.
CoordinateGrid upscaled_grid(std::size_t height, std::size_t width, std::size_t scale);

// 3 x pixels target matrix, one column per pixel in grid order.
template <typename T>
Tensor2D<T> image_targets(const ImageBuffer& image);

// Inverse of image_targets, clamping to [-1, 1].
template <typename T>
ImageBuffer tensor_to_image(const Tensor2D<T>& values, std::size_t height, std::size_t width);

enum class ConcatMode { Row, Column, Grid };

struct Placement {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};

struct Mosaic {
  ImageBuffer image;
  std::vector<Placement> placements;  // one per input image, id order
};

Mosaic make_mosaic(const MultiImageDataset& dataset, ConcatMode mode);
ImageBuffer concatenate(const MultiImageDataset& dataset, ConcatMode mode);
ImageBuffer crop(const ImageBuffer& image, const Placement& region);

struct IdCoordinates {
  CoordinateGrid grid;  // d_in = 3: (y, x, id); height/width unused
  Tensor2Df targets;
  std::vector<std::size_t> offsets;  // first column of each image
};

double id_coordinate(std::size_t image_id, std::size_t n_images);
IdCoordinates id_coords(const MultiImageDataset& dataset);

// Block mean over factor x factor tiles, factor in {2, 4}.
ImageBuffer downsample(const ImageBuffer& image, std::size_t factor);

// Bilinear upsampling with pixel-centre alignment and edge clamping.
ImageBuffer upsample_bilinear(const ImageBuffer& image, std::size_t factor);

}  // namespace minr
