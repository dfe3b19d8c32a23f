#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minr/image.hpp"
#include "minr/model.hpp"

namespace minr {

// 10 log10(1 / MSE) on the [0, 1] pixel scale; +inf when the images match.
double psnr(const ImageBuffer& a, const ImageBuffer& b);
double psnr_from_mse(double mse);

// Mean SSIM of Rec.601 luminance over all valid 11x11 Gaussian windows
// (sigma 1.5, C1 = 0.01^2, C2 = 0.03^2).
double ssim(const ImageBuffer& a, const ImageBuffer& b);
inline constexpr std::size_t kSsimWindow = 11;

std::vector<double> luminance(const ImageBuffer& image);

struct Histogram {
  std::vector<double> bin_edges;  // uniform over [-range, +range]
  std::vector<std::size_t> counts;
  std::size_t total = 0;
};

// Histogram of `values` over [-half_range, +half_range]; half_range defaults
// to max |value|.
Histogram make_histogram(std::span<const float> values, std::size_t bins, std::optional<double> half_range = {});

// Histograms of several samples over their common symmetric range.
std::vector<Histogram> common_histograms(const std::vector<std::span<const float>>& samples, std::size_t bins);

// Kolmogorov-Smirnov statistic between the empirical CDFs; histograms must
// share their bin edges.
double distribution_distance(const Histogram& a, const Histogram& b);

struct NamedLayer {
  std::string name;  // input, projection, intermediate<k>, output
  const LinearLayer<float>* layer = nullptr;
};

// Layers of one image's network with role names.
std::vector<NamedLayer> network_layers(const MinrModel<float>& model, std::size_t image_id);
std::vector<NamedLayer> network_layers(const SirenModel<float>& model);

const LinearLayer<float>& select_layer(const std::vector<NamedLayer>& layers, const std::string& selector);

Histogram weight_histogram(const SirenModel<float>& model, const std::string& selector, std::size_t bins);
Histogram weight_histogram(const MinrModel<float>& model, std::size_t image_id, const std::string& selector,
                           std::size_t bins);

}  // namespace minr
