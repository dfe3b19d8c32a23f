#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "minr/metrics.hpp"
#include "minr/random.hpp"
#include "oracles.hpp"

namespace minr {
namespace {

ImageBuffer random_image(std::size_t h, std::size_t w, Rng& rng) {
  ImageBuffer im(h, w);
  for (auto& v : im.data) v = float(rng.uniform(-1, 1));
  return im;
}

// A difference d on the [0, 1] scale is 2d on the stored [-1, 1] scale.
ImageBuffer shifted(const ImageBuffer& im, float d01) {
  ImageBuffer out = im;
  for (auto& v : out.data) v += 2.0f * d01;
  return out;
}

TEST(Psnr, ClosedForms) {
  const ImageBuffer base(8, 8, -1.0f);
  EXPECT_NEAR(psnr(base, shifted(base, 0.1f)), 20.0, 1e-6);
  EXPECT_NEAR(psnr(base, shifted(base, 0.5f)), 6.020599913279624, 1e-9);
  EXPECT_NEAR(psnr_from_mse(0.01), 20.0, 1e-9);
  EXPECT_NEAR(psnr_from_mse(0.25), 6.020599913279624, 1e-9);
  EXPECT_EQ(psnr(base, base), std::numeric_limits<double>::infinity());
  EXPECT_THROW(psnr(base, ImageBuffer(8, 7)), ShapeError);
}

TEST(Psnr, MonotoneAndPermutationInvariant) {
  Rng rng(3);
  const auto a = random_image(6, 6, rng);
  double previous = std::numeric_limits<double>::infinity();
  for (float d : {0.01f, 0.05f, 0.1f, 0.2f}) {
    const double p = psnr(a, shifted(a, d));
    EXPECT_LT(p, previous);
    previous = p;
  }
  const auto b = random_image(6, 6, rng);
  auto pa = a, pb = b;
  std::reverse(pa.data.begin(), pa.data.end());
  std::reverse(pb.data.begin(), pb.data.end());
  EXPECT_DOUBLE_EQ(psnr(a, b), psnr(pa, pb));
}

TEST(Ssim, IdentityIsExactlyOne) {
  Rng rng(9);
  const auto a = random_image(16, 20, rng);
  EXPECT_EQ(ssim(a, a), 1.0);
}

TEST(Ssim, InvertedPatternIsNegative) {
  ImageBuffer a(16, 16);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x)
      for (std::size_t c = 0; c < 3; ++c) a.at(y, x, c) = ((x / 2 + y / 2) % 2) ? 1.0f : -1.0f;
  ImageBuffer inv = a;
  for (auto& v : inv.data) v = -v;
  EXPECT_LT(ssim(a, inv), 0.0);
  EXPECT_NEAR(ssim(a, inv), oracle::ssim(a, inv), 1e-6);
}

TEST(Ssim, MatchesDirectWindowedReference) {
  Rng rng(20);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t h = 11 + rng.below(10), w = 11 + rng.below(10);
    const auto a = random_image(h, w, rng);
    auto b = a;
    for (auto& v : b.data) v = std::clamp(v + float(rng.uniform(-0.5, 0.5)), -1.0f, 1.0f);
    EXPECT_NEAR(ssim(a, b), oracle::ssim(a, b), 1e-6);
    EXPECT_DOUBLE_EQ(ssim(a, b), ssim(b, a));
  }
}

TEST(Ssim, RejectsSmallOrMismatchedImages) {
  EXPECT_THROW(ssim(ImageBuffer(10, 20), ImageBuffer(10, 20)), ShapeError);
  EXPECT_THROW(ssim(ImageBuffer(12, 12), ImageBuffer(12, 13)), ShapeError);
}

TEST(Histogram, ZeroWeightsFillCentreBin) {
  const std::vector<float> zeros(50, 0.0f);
  const auto h = make_histogram(zeros, 21);
  EXPECT_EQ(h.counts[10], 50u);
  EXPECT_EQ(h.total, 50u);
  EXPECT_EQ(h.bin_edges.size(), 22u);
}

TEST(Histogram, CountsSumToTotalAndBoundsAreSymmetric) {
  Rng rng(4);
  std::vector<float> v(1000);
  for (auto& x : v) x = float(rng.uniform(-3, 2));
  const auto h = make_histogram(v, 17);
  std::size_t sum = 0;
  for (auto c : h.counts) sum += c;
  EXPECT_EQ(sum, 1000u);
  EXPECT_EQ(h.bin_edges.front(), -h.bin_edges.back());
  EXPECT_THROW(make_histogram(v, 2), ConfigError);
}

TEST(Histogram, FreshInputLayerIsRoughlyUniform) {
  NetworkShape shape;
  shape.width = 256;
  const auto m = init_siren<float>(shape, 123);
  const auto h = weight_histogram(m, "input", 20);
  EXPECT_EQ(h.total, 512u);
  for (auto c : h.counts) EXPECT_LE(double(c), 3.0 * 512.0 / 20.0);
}

TEST(Histogram, SelectorsNameEveryLayer) {
  NetworkShape shape;
  shape.width = 8;
  const auto minr = init_minr<float>(MinrConfig::canonical(shape, 2), 1);
  const auto layers = network_layers(minr, 1);
  std::vector<std::string> names;
  for (const auto& l : layers) names.push_back(l.name);
  EXPECT_EQ(names, (std::vector<std::string>{"input", "projection", "intermediate1", "intermediate2",
                                              "intermediate3", "output"}));
  EXPECT_EQ(weight_histogram(minr, 1, "output", 5).total, 24u);
  EXPECT_THROW(weight_histogram(minr, 1, "intermediate4", 5), ConfigError);
  EXPECT_THROW(weight_histogram(minr, 1, "projection7", 5), ConfigError);
}

TEST(Distance, IdenticalAndDisjoint) {
  const std::vector<float> left(100, -0.9f), right(100, 0.9f);
  const auto hs = common_histograms({left, right}, 10);
  EXPECT_EQ(distribution_distance(hs[0], hs[0]), 0.0);
  EXPECT_EQ(distribution_distance(hs[0], hs[1]), 1.0);
  EXPECT_THROW(distribution_distance(make_histogram(left, 10), make_histogram(left, 11)), ConfigError);
}

TEST(Distance, SameUniformLawIsClose) {
  Rng a(1000), b(2000);
  std::vector<float> x(10000), y(10000);
  for (auto& v : x) v = float(a.uniform(-1, 1));
  for (auto& v : y) v = float(b.uniform(-1, 1));
  const auto hs = common_histograms({x, y}, 50);
  EXPECT_LT(distribution_distance(hs[0], hs[1]), 0.05);
}

TEST(Distance, SymmetricAndTriangleProperty) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<float>> s(3, std::vector<float>(200));
    for (auto& sample : s) {
      const double shift = rng.uniform(-0.5, 0.5);
      for (auto& v : sample) v = float(rng.uniform(-1, 1) * 0.5 + shift);
    }
    const auto hs = common_histograms({s[0], s[1], s[2]}, 30);
    const double ab = distribution_distance(hs[0], hs[1]);
    EXPECT_EQ(ab, distribution_distance(hs[1], hs[0]));
    EXPECT_LE(distribution_distance(hs[0], hs[2]), ab + distribution_distance(hs[1], hs[2]) + 1e-12);
  }
}

}  // namespace
}  // namespace minr
