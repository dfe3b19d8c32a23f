#include "minr/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <string>

namespace minr {

ImageBuffer load_image(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw DataError("cannot read PNG '" + path.string() + "': " + img.message);
  if (img.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&img);
    throw DataError("unsupported bit depth in '" + path.string() + "' (8-bit PNG required)");
  }
  if (img.format & PNG_FORMAT_FLAG_ALPHA) {
    png_image_free(&img);
    throw DataError("unsupported alpha channel in '" + path.string() + "' (RGB or grayscale required)");
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<png_byte> raw(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, raw.data(), 0, nullptr))
    throw DataError("cannot decode PNG '" + path.string() + "': " + img.message);

  ImageBuffer out(img.height, img.width);
  for (std::size_t i = 0; i < raw.size(); ++i) out.data[i] = float(2.0 * raw[i] / 255.0 - 1.0);
  return out;
}

void save_image(const ImageBuffer& image, const std::filesystem::path& path) {
  std::vector<png_byte> raw(image.data.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = std::clamp(double(image.data[i]), -1.0, 1.0);
    raw[i] = static_cast<png_byte>(std::floor(255.0 * (v + 1.0) / 2.0 + 0.5));
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(image.width);
  img.height = png_uint_32(image.height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, raw.data(), 0, nullptr))
    throw DataError("cannot write PNG '" + path.string() + "': " + img.message);
}

std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw DataError("not a directory: '" + dir.string() + "'");
  std::vector<std::filesystem::path> frames;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (entry.is_regular_file() && ext == ".png") frames.push_back(entry.path());
  }
  std::sort(frames.begin(), frames.end());
  if (frames.empty()) throw DataError("no PNG frames in '" + dir.string() + "'");
  return frames;
}

MultiImageDataset load_dataset(const std::vector<std::filesystem::path>& paths) {
  MultiImageDataset ds;
  for (const auto& p : paths) ds.images.push_back(load_image(p));
  return ds;
}

double axis_coordinate(std::size_t i, std::size_t n) {
  return n > 1 ? -1.0 + 2.0 * double(i) / double(n - 1) : 0.0;
}

CoordinateGrid make_grid(std::size_t height, std::size_t width) {
  CoordinateGrid g;
  g.height = height;
  g.width = width;
  g.coords = Tensor2Df(2, height * width);
  for (std::size_t y = 0; y < height; ++y) {
    const float cy = float(axis_coordinate(y, height));
    for (std::size_t x = 0; x < width; ++x) {
      g.coords(0, y * width + x) = cy;
      g.coords(1, y * width + x) = float(axis_coordinate(x, width));
    }
  }
  return g;
}

CoordinateGrid upscaled_grid(std::size_t height, std::size_t width, std::size_t scale) {
  if (scale < 1) throw ConfigError("upscaled_grid: scale must be >= 1");
  auto axis = [scale](std::size_t j, std::size_t n) {
    if (n == 1) return 0.0;
    const double u = (double(j) + 0.5) / double(scale) - 0.5;
    return -1.0 + 2.0 * u / double(n - 1);
  };
  CoordinateGrid g;
  g.height = height * scale;
  g.width = width * scale;
  g.coords = Tensor2Df(2, g.height * g.width);
  for (std::size_t y = 0; y < g.height; ++y) {
    const float cy = float(axis(y, height));
    for (std::size_t x = 0; x < g.width; ++x) {
      g.coords(0, y * g.width + x) = cy;
      g.coords(1, y * g.width + x) = float(axis(x, width));
    }
  }
  return g;
}

template <typename T>
Tensor2D<T> image_targets(const ImageBuffer& image) {
  Tensor2D<T> t(ImageBuffer::channels, image.pixels());
  for (std::size_t p = 0; p < image.pixels(); ++p)
    for (std::size_t c = 0; c < ImageBuffer::channels; ++c) t(c, p) = T(image.data[p * ImageBuffer::channels + c]);
  return t;
}

template <typename T>
ImageBuffer tensor_to_image(const Tensor2D<T>& values, std::size_t height, std::size_t width) {
  require_shape(values.rows() == ImageBuffer::channels && values.cols() == height * width,
                "tensor_to_image: expected 3 x (height*width)");
  ImageBuffer out(height, width);
  for (std::size_t p = 0; p < out.pixels(); ++p)
    for (std::size_t c = 0; c < ImageBuffer::channels; ++c)
      out.data[p * ImageBuffer::channels + c] = float(std::clamp(values(c, p), T(-1), T(1)));
  return out;
}

namespace {

void blit(ImageBuffer& dst, const ImageBuffer& src, const Placement& at) {
  for (std::size_t y = 0; y < src.height; ++y)
    std::copy_n(src.data.begin() + std::ptrdiff_t(y * src.width * 3), src.width * 3,
                dst.data.begin() + std::ptrdiff_t(((at.row + y) * dst.width + at.col) * 3));
}

}  // namespace

Mosaic make_mosaic(const MultiImageDataset& ds, ConcatMode mode) {
  if (ds.images.empty()) throw ShapeError("concatenate: empty dataset");
  const auto& first = ds.images.front();
  Mosaic m;
  std::size_t h = 0, w = 0;
  switch (mode) {
    case ConcatMode::Row:
      for (const auto& im : ds.images) {
        if (im.height != first.height) throw ShapeError("concatenate(row): images must have equal heights");
        m.placements.push_back({0, w, im.height, im.width});
        w += im.width;
      }
      h = first.height;
      break;
    case ConcatMode::Column:
      for (const auto& im : ds.images) {
        if (im.width != first.width) throw ShapeError("concatenate(column): images must have equal widths");
        m.placements.push_back({h, 0, im.height, im.width});
        h += im.height;
      }
      w = first.width;
      break;
    case ConcatMode::Grid: {
      std::size_t side = 1;
      while (side * side < ds.size()) ++side;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& im = ds.images[i];
        if (im.height != first.height || im.width != first.width)
          throw ShapeError("concatenate(grid): images must have equal sizes");
        m.placements.push_back({(i / side) * first.height, (i % side) * first.width, im.height, im.width});
      }
      h = side * first.height;
      w = side * first.width;
      break;
    }
  }
  m.image = ImageBuffer(h, w, -1.0f);
  for (std::size_t i = 0; i < ds.size(); ++i) blit(m.image, ds.images[i], m.placements[i]);
  return m;
}

ImageBuffer concatenate(const MultiImageDataset& ds, ConcatMode mode) { return make_mosaic(ds, mode).image; }

ImageBuffer crop(const ImageBuffer& image, const Placement& r) {
  require_shape(r.row + r.height <= image.height && r.col + r.width <= image.width, "crop: region outside image");
  ImageBuffer out(r.height, r.width);
  for (std::size_t y = 0; y < r.height; ++y)
    std::copy_n(image.data.begin() + std::ptrdiff_t(((r.row + y) * image.width + r.col) * 3), r.width * 3,
                out.data.begin() + std::ptrdiff_t(y * r.width * 3));
  return out;
}

double id_coordinate(std::size_t image_id, std::size_t n_images) { return axis_coordinate(image_id, n_images); }

IdCoordinates id_coords(const MultiImageDataset& ds) {
  if (ds.images.empty()) throw ShapeError("id_coords: empty dataset");
  std::size_t total = 0;
  for (const auto& im : ds.images) total += im.pixels();
  IdCoordinates out;
  out.grid.coords = Tensor2Df(3, total);
  out.targets = Tensor2Df(3, total);
  std::size_t col = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& im = ds.images[i];
    out.offsets.push_back(col);
    const auto grid = make_grid(im.height, im.width);
    const float id = float(id_coordinate(i, ds.size()));
    for (std::size_t p = 0; p < im.pixels(); ++p, ++col) {
      out.grid.coords(0, col) = grid.coords(0, p);
      out.grid.coords(1, col) = grid.coords(1, p);
      out.grid.coords(2, col) = id;
      for (std::size_t c = 0; c < 3; ++c) out.targets(c, col) = im.data[p * 3 + c];
    }
  }
  return out;
}

ImageBuffer downsample(const ImageBuffer& image, std::size_t factor) {
  if (factor != 2 && factor != 4) throw ConfigError("downsample: factor must be 2 or 4");
  if (image.height % factor || image.width % factor)
    throw ShapeError("downsample: dimensions must be divisible by the factor");
  ImageBuffer out(image.height / factor, image.width / factor);
  const double inv = 1.0 / double(factor * factor);
  for (std::size_t y = 0; y < out.height; ++y)
    for (std::size_t x = 0; x < out.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (std::size_t dy = 0; dy < factor; ++dy)
          for (std::size_t dx = 0; dx < factor; ++dx) sum += image.at(y * factor + dy, x * factor + dx, c);
        out.at(y, x, c) = float(sum * inv);
      }
  return out;
}

ImageBuffer upsample_bilinear(const ImageBuffer& image, std::size_t factor) {
  if (factor < 1) throw ConfigError("upsample: factor must be >= 1");
  ImageBuffer out(image.height * factor, image.width * factor);
  auto source = [&](std::size_t i, std::size_t n) {
    const double s = std::clamp((double(i) + 0.5) / double(factor) - 0.5, 0.0, double(n - 1));
    const auto lo = std::size_t(std::floor(s));
    return std::tuple{lo, std::min(lo + 1, n - 1), s - double(lo)};
  };
  for (std::size_t y = 0; y < out.height; ++y) {
    const auto [y0, y1, fy] = source(y, image.height);
    for (std::size_t x = 0; x < out.width; ++x) {
      const auto [x0, x1, fx] = source(x, image.width);
      for (std::size_t c = 0; c < 3; ++c) {
        const double top = (1 - fx) * image.at(y0, x0, c) + fx * image.at(y0, x1, c);
        const double bottom = (1 - fx) * image.at(y1, x0, c) + fx * image.at(y1, x1, c);
        out.at(y, x, c) = float((1 - fy) * top + fy * bottom);
      }
    }
  }
  return out;
}

template Tensor2D<float> image_targets<float>(const ImageBuffer&);
template Tensor2D<double> image_targets<double>(const ImageBuffer&);
template ImageBuffer tensor_to_image<float>(const Tensor2D<float>&, std::size_t, std::size_t);
template ImageBuffer tensor_to_image<double>(const Tensor2D<double>&, std::size_t, std::size_t);

}  // namespace minr
