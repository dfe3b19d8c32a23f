#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "minr/checkpoint.hpp"
#include "minr/report.hpp"
#include "minr/trainer.hpp"

namespace minr {
namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() /
         (name + "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name() + ".minr");
}

MinrModel<float> sample_model(bool projection = true, std::vector<std::size_t> mask = {1, 2, 3}) {
  MinrConfig c;
  c.shape.width = 8;
  c.shape.activation = Finer{12.5};
  c.n_images = 3;
  c.use_projection = projection;
  c.share_mask = std::move(mask);
  return init_minr<float>(c, 9);
}

void expect_same_model(const MinrModel<float>& a, const MinrModel<float>& b) {
  EXPECT_EQ(a.config.shape.width, b.config.shape.width);
  EXPECT_EQ(activation_name(a.config.shape.activation), activation_name(b.config.shape.activation));
  EXPECT_EQ(activation_hyperparameters(a.config.shape.activation),
            activation_hyperparameters(b.config.shape.activation));
  EXPECT_EQ(a.config.share_mask, b.config.share_mask);
  EXPECT_EQ(a.config.use_projection, b.config.use_projection);
  ASSERT_EQ(a.per_image.size(), b.per_image.size());
  for (std::size_t i = 0; i < a.per_image.size(); ++i) {
    const auto la = a.chain(i), lb = b.chain(i);
    ASSERT_EQ(la.size(), lb.size());
    for (std::size_t l = 0; l < la.size(); ++l) {
      EXPECT_EQ(la[l]->weight, lb[l]->weight);
      EXPECT_EQ(la[l]->bias, lb[l]->bias);
    }
  }
}

TEST(Checkpoint, EncodeDecodeIsBitExact) {
  for (const auto& model : {sample_model(), sample_model(false, {}), sample_model(true, {2})}) {
    const auto bytes = encode_checkpoint(model);
    const auto back = decode_checkpoint(bytes);
    expect_same_model(model, back);
    EXPECT_EQ(encode_checkpoint(back), bytes);
  }
}

TEST(Checkpoint, FileRoundTripAndHeader) {
  const auto model = sample_model();
  const auto path = temp_file("roundtrip");
  save_checkpoint(model, path);
  expect_same_model(model, load_checkpoint(path));
  const auto header = read_checkpoint_header(path);
  EXPECT_EQ(header.file_size(), fs::file_size(path));
  EXPECT_EQ(header.image_offsets.size(), 3u);
  EXPECT_EQ(header.shared_bytes, 3 * (8 * 8 + 8) * sizeof(float));
  fs::remove(path);
}

TEST(Checkpoint, PartialLoadMatchesAssembledNetwork) {
  const auto model = sample_model(true, {1, 3});
  const auto path = temp_file("partial");
  save_checkpoint(model, path);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto net = load_image_network(path, i);
    const auto full = assemble_image_network(model, i);
    EXPECT_EQ(render_siren(net, 12, 12), render_siren(full, 12, 12));
    const auto a = net.layers(), b = full.layers();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t l = 0; l < a.size(); ++l) EXPECT_EQ(a[l]->weight, b[l]->weight);
  }
  EXPECT_THROW(load_image_network(path, 3), ConfigError);
  fs::remove(path);
}

TEST(Checkpoint, CorruptFilesRejected) {
  auto bytes = encode_checkpoint(sample_model());
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad_magic), FormatError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 5);
  EXPECT_THROW(decode_checkpoint(truncated), FormatError);
  auto bad_version = bytes;
  bad_version[4] = 99;
  EXPECT_THROW(decode_checkpoint(bad_version), FormatError);

  const auto path = temp_file("truncated");
  std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(truncated.data()),
                                              std::streamsize(truncated.size()));
  EXPECT_THROW(read_checkpoint_header(path), FormatError);
  EXPECT_THROW(load_image_network(path, 0), FormatError);
  fs::remove(path);
  EXPECT_THROW(load_checkpoint(path), DataError);
}

TEST(Report, JsonFieldsAndInfSentinel) {
  TrainReport r;
  r.method = "minr";
  r.loss_curve = {0.5, 0.25};
  r.psnr = {31.5, std::numeric_limits<double>::infinity()};
  r.ssim = {0.9, std::nullopt};
  r.param_count = 466700;
  r.elapsed_seconds = 12.0;
  const auto j = to_json(r);
  EXPECT_EQ(j["method"], "minr");
  EXPECT_EQ(j["images"][0]["psnr"], 31.5);
  EXPECT_EQ(j["images"][1]["psnr"], "inf");
  EXPECT_TRUE(j["images"][1]["ssim"].is_null());
  EXPECT_EQ(j["mean_psnr"], "inf");
  EXPECT_EQ(j["param_count"], 466700);
  EXPECT_FALSE(j.contains("elapsed_seconds"));
  EXPECT_EQ(loss_csv(r), "step,loss\n0,0.5\n1,0.25\n");
}

TEST(Report, MillionsFormatting) {
  EXPECT_EQ(format_millions(466700), "0.47");
  EXPECT_EQ(format_millions(7956600), "7.96");
  EXPECT_EQ(format_millions(6930476), "6.93");
  EXPECT_EQ(format_millions(269324), "0.27");
  EXPECT_EQ(format_millions(5000), "0.01");
  EXPECT_EQ(format_millions(4999), "0.00");
}

TEST(Report, HistogramCsv) {
  Histogram h;
  h.bin_edges = {-1, 0, 1};
  h.counts = {2, 3};
  h.total = 5;
  EXPECT_EQ(histogram_csv(h), "edge_low,edge_high,count\n-1,0,2\n0,1,3\n");
}

}  // namespace
}  // namespace minr
