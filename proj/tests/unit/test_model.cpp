#include <gtest/gtest.h>

#include <cmath>

#include "minr/model.hpp"
#include "minr/random.hpp"
#include "oracles.hpp"

namespace minr {
namespace {

NetworkShape small_shape(std::size_t width = 8, std::size_t n_intermediate = 3,
                         ActivationKind activation = Sine{}) {
  NetworkShape s;
  s.width = width;
  s.n_intermediate = n_intermediate;
  s.activation = activation;
  return s;
}

// Scalar enumeration of parameters: one count per weight entry and bias entry.
std::size_t enumerate_layer(std::size_t in, std::size_t out) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < out; ++i) {
    for (std::size_t j = 0; j < in; ++j) ++n;
    ++n;
  }
  return n;
}

std::size_t enumerate_siren(const NetworkShape& s) {
  std::size_t n = enumerate_layer(s.d_in, s.width);
  for (std::size_t k = 0; k < s.n_intermediate; ++k) n += enumerate_layer(s.width, s.width);
  return n + enumerate_layer(s.width, s.d_out);
}

std::size_t enumerate_minr(const MinrConfig& c) {
  const auto& s = c.shape;
  std::size_t n = 0;
  for (std::size_t p = 1; p <= s.n_intermediate; ++p)
    if (c.is_shared(p)) n += enumerate_layer(s.width, s.width);
  for (std::size_t i = 0; i < c.n_images; ++i) {
    n += enumerate_layer(s.d_in, s.width);
    if (c.use_projection) n += enumerate_layer(s.width, s.width);
    for (std::size_t p = 1; p <= s.n_intermediate; ++p)
      if (!c.is_shared(p)) n += enumerate_layer(s.width, s.width);
    n += enumerate_layer(s.width, s.d_out);
  }
  return n;
}

TEST(ParamCount, SirenClosedForm) {
  for (std::size_t w : {1, 2, 8, 64, 256}) {
    const auto s = small_shape(w);
    EXPECT_EQ(param_count(s), 3 * w * w + 9 * w + 3);
    EXPECT_EQ(param_count(s), enumerate_siren(s));
  }
  EXPECT_EQ(param_count(small_shape(256)), 198915u);
}

TEST(ParamCount, CanonicalMinrClosedForm) {
  for (std::size_t n : {1, 2, 4, 40, 50, 100}) {
    const auto c = MinrConfig::canonical(small_shape(256), n);
    const std::size_t w = 256;
    EXPECT_EQ(param_count(c), n * (w * w + 7 * w + 3) + 3 * (w * w + w));
    EXPECT_EQ(param_count(c), enumerate_minr(c));
  }
  EXPECT_EQ(param_count(MinrConfig::canonical(small_shape(256), 4)), 466700u);
  EXPECT_EQ(param_count(MinrConfig::canonical(small_shape(256), 40)), 2890616u);
  EXPECT_EQ(param_count(MinrConfig::canonical(small_shape(256), 50)), 3563926u);
  EXPECT_EQ(param_count(MinrConfig::canonical(small_shape(256), 100)), 6930476u);
}

TEST(ParamCount, Ablations) {
  MinrConfig no_projection;
  no_projection.shape = small_shape(256, 4);
  no_projection.n_images = 4;
  no_projection.use_projection = false;
  no_projection.share_mask = {1, 2, 3, 4};
  EXPECT_EQ(param_count(no_projection), 269324u);

  auto one_unshared = MinrConfig::canonical(small_shape(256), 4);
  one_unshared.share_mask = {2, 3};
  EXPECT_EQ(param_count(one_unshared), 664076u);
  auto two_unshared = MinrConfig::canonical(small_shape(256), 4);
  two_unshared.share_mask = {3};
  EXPECT_EQ(param_count(two_unshared), 861452u);
  for (const auto& c : {no_projection, one_unshared, two_unshared}) EXPECT_EQ(param_count(c), enumerate_minr(c));
}

TEST(ParamCount, SeparateIsLinearInImages) {
  EXPECT_EQ(param_count_separate(small_shape(256), 40), 7956600u);
  EXPECT_EQ(param_count_separate(small_shape(256), 50), 9945750u);
  EXPECT_EQ(param_count_separate(small_shape(256), 100), 19891500u);
  const double ratio = double(param_count(MinrConfig::canonical(small_shape(256), 100))) /
                       double(param_count_separate(small_shape(256), 100));
  EXPECT_NEAR(ratio, 0.3484, 5e-5);
}

TEST(ParamCount, MatchesAllocatedModels) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    MinrConfig c;
    c.shape = small_shape(1 + rng.below(8), rng.below(5));
    c.n_images = 1 + rng.below(4);
    c.use_projection = rng.below(2) == 1;
    for (std::size_t p = 1; p <= c.shape.n_intermediate; ++p)
      if (rng.below(2)) c.share_mask.push_back(p);
    const auto model = init_minr<float>(c, trial);
    EXPECT_EQ(param_count(model), param_count(c));
    EXPECT_EQ(param_count(c), enumerate_minr(c));
    EXPECT_EQ(param_count(init_siren<float>(c.shape, trial)), enumerate_siren(c.shape));
  }
}

TEST(Config, Validation) {
  EXPECT_THROW(small_shape(0).validate(), ConfigError);
  auto c = MinrConfig::canonical(small_shape(), 2);
  c.share_mask = {2, 1};
  EXPECT_THROW(c.validate(), ConfigError);
  c.share_mask = {4};
  EXPECT_THROW(c.validate(), ConfigError);
  c.share_mask = {1, 1};
  EXPECT_THROW(c.validate(), ConfigError);
  c.share_mask = {};
  c.n_images = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

double max_abs(const Tensor2Df& t) {
  double m = 0;
  for (float v : t.data()) m = std::max(m, double(std::abs(v)));
  return m;
}

TEST(Init, BoundsFollowFanIn) {
  const auto shape = small_shape(256, 3);
  const auto m = init_siren<float>(shape, 1);
  const double hidden_bound = std::sqrt(6.0 / 256.0) / 30.0;
  EXPECT_NEAR(hidden_bound, 0.005103103630798287, 1e-15);
  EXPECT_LE(max_abs(m.input.weight), 1.0 / 2.0);
  EXPECT_GT(max_abs(m.input.weight), 0.45);
  for (const auto& h : m.hidden) {
    EXPECT_LE(max_abs(h.weight), hidden_bound);
    EXPECT_GT(max_abs(h.weight), 0.9 * hidden_bound);
  }
  EXPECT_LE(max_abs(m.output.weight), hidden_bound);
  for (const auto* l : m.layers()) EXPECT_EQ(max_abs(l->bias), 0.0);

  const auto g = init_siren<float>(small_shape(256, 3, Gauss{}), 1);
  EXPECT_LE(max_abs(g.hidden[0].weight), std::sqrt(6.0 / 256.0));
  EXPECT_GT(max_abs(g.hidden[0].weight), 0.9 * std::sqrt(6.0 / 256.0));
}

TEST(Init, SameSeedSameParameters) {
  const auto c = MinrConfig::canonical(small_shape(16), 3);
  const auto a = init_minr<float>(c, 77);
  const auto b = init_minr<float>(c, 77);
  const auto other = init_minr<float>(c, 78);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.per_image[i].input.weight, b.per_image[i].input.weight);
    EXPECT_NE(a.per_image[i].input.weight, other.per_image[i].input.weight);
  }
  EXPECT_EQ(a.shared[0].weight, b.shared[0].weight);
}

TEST(Init, PerImageStreamsMatchSeparateSirens) {
  MinrConfig c;
  c.shape = small_shape(8);
  c.n_images = 3;
  c.use_projection = false;
  const auto m = init_minr<double>(c, 5);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto s = init_siren<double>(c.shape, image_seed(5, i));
    const auto assembled = assemble_image_network(m, i);
    const auto a = assembled.layers();
    const auto b = s.layers();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t l = 0; l < a.size(); ++l) EXPECT_EQ(a[l]->weight, b[l]->weight);
  }
}

Tensor2Dd random_coords(std::size_t d, std::size_t n, Rng& rng) {
  Tensor2Dd x(d, n);
  for (auto& v : x.data()) v = rng.uniform(-1, 1);
  return x;
}

TEST(Forward, SirenMatchesNaiveEvaluation) {
  Rng rng(17);
  for (const ActivationKind& kind : {ActivationKind{Sine{}}, ActivationKind{Gauss{}}, ActivationKind{Wire{}},
                                      ActivationKind{Finer{}}}) {
    const auto m = init_siren<double>(small_shape(8, 2, kind), rng.below(1000));
    const auto x = random_coords(2, 9, rng);
    const auto y = forward_siren(m, x);
    std::vector<oracle::DenseLayer> dense;
    for (const auto* l : m.layers()) dense.push_back(oracle::to_dense(*l));
    for (std::size_t c = 0; c < 9; ++c) {
      const auto ref = oracle::forward_point(dense, kind, {x(0, c), x(1, c)});
      for (std::size_t r = 0; r < 3; ++r) EXPECT_NEAR(y(r, c), ref[r], 1e-12);
    }
  }
}

TEST(Forward, MinrEqualsAssembledNetwork) {
  Rng rng(4);
  auto c = MinrConfig::canonical(small_shape(8, 4), 3);
  c.share_mask = {1, 3};
  const auto m = init_minr<double>(c, 12);
  const auto x = random_coords(2, 10, rng);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto assembled = assemble_image_network(m, i);
    EXPECT_EQ(assembled.hidden.size(), 5u);
    EXPECT_EQ(forward_minr(m, i, x), forward_siren(assembled, x));
  }
  EXPECT_THROW(forward_minr(m, 3, x), ConfigError);
}

TEST(Forward, ChainDrawsSharedPositionsFromSharedStore) {
  auto c = MinrConfig::canonical(small_shape(4, 3), 2);
  c.share_mask = {2};
  auto m = init_minr<float>(c, 1);
  const auto chain = m.chain(1);
  ASSERT_EQ(chain.size(), 6u);  // input, projection, 3 intermediates, output
  EXPECT_EQ(chain[0].layer, &m.per_image[1].input);
  EXPECT_EQ(chain[1].layer, &*m.per_image[1].projection);
  EXPECT_EQ(chain[2].layer, &m.per_image[1].private_layers[0]);
  EXPECT_EQ(chain[3].layer, &m.shared[0]);
  EXPECT_EQ(chain[3].shared_index, 0);
  EXPECT_EQ(chain[4].layer, &m.per_image[1].private_layers[1]);
  EXPECT_EQ(chain[5].layer, &m.per_image[1].output);
}

TEST(Forward, ZeroIntermediateNetwork) {
  const auto m = init_siren<float>(small_shape(4, 0), 2);
  EXPECT_TRUE(m.hidden.empty());
  EXPECT_EQ(forward_siren(m, Tensor2Df(2, 5)).rows(), 3u);
}

TEST(Forward, WrongInputShapeThrows) {
  const auto m = init_siren<float>(small_shape(4), 2);
  EXPECT_THROW(forward_siren(m, Tensor2Df(3, 5)), ShapeError);
}

TEST(PackSeparate, KeepsEveryNetwork) {
  std::vector<SirenModel<float>> models;
  for (std::size_t i = 0; i < 3; ++i) models.push_back(init_siren<float>(small_shape(6), 10 + i));
  const auto packed = pack_separate<float>(models);
  EXPECT_TRUE(packed.config.share_mask.empty());
  EXPECT_FALSE(packed.config.use_projection);
  EXPECT_EQ(param_count(packed), 3 * param_count(small_shape(6)));
  const auto x = Tensor2Df::from_rows({{0.1f, -0.4f}, {0.7f, 0.2f}});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(forward_minr(packed, i, x), forward_siren(models[i], x));
}

}  // namespace
}  // namespace minr
