#include "minr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace minr {

double psnr_from_mse(double mse) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  if (a.height != b.height || a.width != b.width) throw ShapeError("psnr: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = (double(a.data[i]) - double(b.data[i])) * 0.5;
    sum += d * d;
  }
  return psnr_from_mse(a.data.empty() ? 0.0 : sum / double(a.data.size()));
}

std::vector<double> luminance(const ImageBuffer& image) {
  std::vector<double> y(image.pixels());
  for (std::size_t p = 0; p < y.size(); ++p) {
    const double r = (image.data[3 * p] + 1.0) * 0.5;
    const double g = (image.data[3 * p + 1] + 1.0) * 0.5;
    const double b = (image.data[3 * p + 2] + 1.0) * 0.5;
    y[p] = 0.299 * r + 0.587 * g + 0.114 * b;
  }
  return y;
}

namespace {

std::vector<double> gaussian_kernel() {
  constexpr double sigma = 1.5;
  std::vector<double> k(kSsimWindow);
  double sum = 0.0;
  for (std::size_t i = 0; i < kSsimWindow; ++i) {
    const double d = double(i) - double(kSsimWindow / 2);
    k[i] = std::exp(-d * d / (2 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable 'valid' filtering: output is (h-10) x (w-10).
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                 const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t ow = w - n + 1, oh = h - n + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * img[y * w + x + i];
      rows[y * ow + x] = s;
    }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * rows[(y + i) * ow + x];
      out[y * ow + x] = s;
    }
  return out;
}

}  // namespace

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
  if (a.height != b.height || a.width != b.width) throw ShapeError("ssim: dimension mismatch");
  if (a.height < kSsimWindow || a.width < kSsimWindow) throw ShapeError("ssim: image smaller than the 11x11 window");
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const auto k = gaussian_kernel();
  const auto x = luminance(a);
  const auto y = luminance(b);
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const std::size_t h = a.height, w = a.width;
  const auto mx = filter_valid(x, h, w, k);
  const auto my = filter_valid(y, h, w, k);
  const auto ex2 = filter_valid(xx, h, w, k);
  const auto ey2 = filter_valid(yy, h, w, k);
  const auto exy = filter_valid(xy, h, w, k);
  double sum = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double mu_xy = mx[i] * my[i];
    const double sx = ex2[i] - mx[i] * mx[i];
    const double sy = ey2[i] - my[i] * my[i];
    const double sxy = exy[i] - mu_xy;
    sum += ((2 * mu_xy + c1) * (2 * sxy + c2)) / ((mx[i] * mx[i] + my[i] * my[i] + c1) * (sx + sy + c2));
  }
  return sum / double(mx.size());
}

Histogram make_histogram(std::span<const float> values, std::size_t bins, std::optional<double> half_range) {
  if (bins < 3) throw ConfigError("histogram: at least 3 bins required");
  double r = 0.0;
  if (half_range) {
    r = *half_range;
  } else {
    for (float v : values) r = std::max(r, std::abs(double(v)));
  }
  if (!(r > 0.0)) r = 1.0;
  Histogram h;
  h.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.bin_edges[i] = -r + 2.0 * r * double(i) / double(bins);
  h.counts.assign(bins, 0);
  for (float v : values) {
    const double t = (double(v) + r) / (2.0 * r) * double(bins);
    const auto idx = std::size_t(std::clamp(std::floor(t), 0.0, double(bins - 1)));
    ++h.counts[idx];
  }
  h.total = values.size();
  return h;
}

std::vector<Histogram> common_histograms(const std::vector<std::span<const float>>& samples, std::size_t bins) {
  double r = 0.0;
  for (const auto& s : samples)
    for (float v : s) r = std::max(r, std::abs(double(v)));
  std::vector<Histogram> out;
  for (const auto& s : samples) out.push_back(make_histogram(s, bins, r > 0 ? r : 1.0));
  return out;
}

double distribution_distance(const Histogram& a, const Histogram& b) {
  if (a.counts.size() != b.counts.size() || a.bin_edges != b.bin_edges)
    throw ConfigError("distribution_distance: histograms must share bin edges");
  if (a.total == 0 || b.total == 0) throw ConfigError("distribution_distance: empty histogram");
  double ca = 0.0, cb = 0.0, d = 0.0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    ca += double(a.counts[i]);
    cb += double(b.counts[i]);
    d = std::max(d, std::abs(ca / double(a.total) - cb / double(b.total)));
  }
  return d;
}

std::vector<NamedLayer> network_layers(const MinrModel<float>& model, std::size_t image_id) {
  const auto chain = model.chain(image_id);
  std::vector<NamedLayer> out{{"input", chain.front()}};
  std::size_t next = 1;
  if (model.config.use_projection) out.push_back({"projection", chain[next++]});
  for (std::size_t p = 1; p <= model.config.shape.n_intermediate; ++p)
    out.push_back({"intermediate" + std::to_string(p), chain[next++]});
  out.push_back({"output", chain.back()});
  return out;
}

std::vector<NamedLayer> network_layers(const SirenModel<float>& model) {
  std::vector<NamedLayer> out{{"input", &model.input}};
  for (std::size_t p = 0; p < model.hidden.size(); ++p)
    out.push_back({"intermediate" + std::to_string(p + 1), &model.hidden[p]});
  out.push_back({"output", &model.output});
  return out;
}

const LinearLayer<float>& select_layer(const std::vector<NamedLayer>& layers, const std::string& selector) {
  for (const auto& l : layers)
    if (l.name == selector) return *l.layer;
  throw ConfigError("unknown layer selector '" + selector + "'");
}

Histogram weight_histogram(const SirenModel<float>& model, const std::string& selector, std::size_t bins) {
  return make_histogram(select_layer(network_layers(model), selector).weight.data(), bins);
}

Histogram weight_histogram(const MinrModel<float>& model, std::size_t image_id, const std::string& selector,
                           std::size_t bins) {
  return make_histogram(select_layer(network_layers(model, image_id), selector).weight.data(), bins);
}

}  // namespace minr
