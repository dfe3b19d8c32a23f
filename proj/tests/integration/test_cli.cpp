// End-to-end checks of the minr command-line tool: outputs, exit codes and
// agreement between what fit reports and what the decoding commands produce.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "minr/image.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kData = MINR_TEST_DATA;
const fs::path kCli = MINR_CLI_PATH;
const fs::path kWork = MINR_CLI_WORK;

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = kCli.string() + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::vector<json> json_lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line.front() == '{') out.push_back(json::parse(line));
  return out;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string crop(int i) {
  const char* names[] = {"crop0_astronaut.png", "crop1_chelsea.png", "crop2_coffee.png", "crop3_rocket.png"};
  return (kData / names[i]).string();
}

fs::path dir(const std::string& name) {
  const auto d = kWork / name;
  fs::remove_all(d);
  return d;
}

const std::string kSmall = " --width 16 --steps 40 --seed 3 ";

// One fit shared by several tests.
class FittedMinr : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    out_ = dir("minr_fit");
    const auto r = run("fit --mode minr --images " + crop(0) + " " + crop(1) + " " + crop(2) + " --share 1,3" +
                       kSmall + "--out " + out_.string());
    status_ = r.status;
  }
  static inline fs::path out_;
  static inline int status_ = -1;
};

TEST_F(FittedMinr, WritesAllOutputs) {
  ASSERT_EQ(status_, 0);
  for (const char* f : {"ckpt.minr", "report.json", "loss.csv", "manifest.json", "timing.json", "recon_0.png",
                        "recon_1.png", "recon_2.png"})
    EXPECT_TRUE(fs::exists(out_ / f)) << f;
  const auto report = read_json(out_ / "report.json");
  EXPECT_EQ(report["images"].size(), 3u);
  EXPECT_EQ(report["mode"], "minr");
  const auto manifest = read_json(out_ / "manifest.json");
  EXPECT_EQ(manifest["inputs"].size(), 3u);
  EXPECT_EQ(manifest["inputs"][0]["sha256"].get<std::string>().size(), 64u);
}

TEST_F(FittedMinr, ReconstructPsnrMatchesReport) {
  ASSERT_EQ(status_, 0);
  const auto rec = dir("minr_rec");
  const auto r = run("reconstruct --ckpt " + (out_ / "ckpt.minr").string() + " --ids 2,0 --reference " + crop(2) +
                     " " + crop(0) + " --out " + rec.string());
  ASSERT_EQ(r.status, 0);
  const auto lines = json_lines(r.out);
  ASSERT_EQ(lines.size(), 2u);
  const auto report = read_json(out_ / "report.json");
  for (const auto& line : lines) {
    const auto id = line["id"].get<std::size_t>();
    EXPECT_NEAR(line["psnr"].get<double>(), report["images"][id]["psnr"].get<double>(), 1e-9);
    EXPECT_EQ(slurp(rec / ("recon_" + std::to_string(id) + ".png")),
              slurp(out_ / ("recon_" + std::to_string(id) + ".png")));
  }
}

TEST_F(FittedMinr, PartialAndFullLoadAgree) {
  ASSERT_EQ(status_, 0);
  const auto a = dir("minr_partial"), b = dir("minr_full");
  ASSERT_EQ(run("reconstruct --ckpt " + (out_ / "ckpt.minr").string() + " --ids 1 --out " + a.string()).status, 0);
  ASSERT_EQ(
      run("reconstruct --ckpt " + (out_ / "ckpt.minr").string() + " --ids 1 --full-load --out " + b.string()).status,
      0);
  EXPECT_EQ(slurp(a / "recon_1.png"), slurp(b / "recon_1.png"));
}

TEST_F(FittedMinr, ParamsOfCheckpointMatchesReport) {
  ASSERT_EQ(status_, 0);
  const auto r = run("params --ckpt " + (out_ / "ckpt.minr").string());
  ASSERT_EQ(r.status, 0);
  const auto lines = json_lines(r.out);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0]["param_count"], read_json(out_ / "report.json")["param_count"]);
}

TEST_F(FittedMinr, AnalyzeIdenticalCheckpointsHasZeroDistance) {
  ASSERT_EQ(status_, 0);
  const auto an = dir("minr_analyze");
  const auto ckpt = (out_ / "ckpt.minr").string();
  ASSERT_EQ(run("analyze --ckpt " + ckpt + " " + ckpt + " --bins 21 --out " + an.string()).status, 0);
  const auto summary = read_json(an / "analysis.json");
  ASSERT_TRUE(summary.contains("roles"));
  for (const auto& [role, d] : summary["roles"].items()) EXPECT_EQ(d.get<double>(), 0.0) << role;
  std::size_t hists = 0;
  for (const auto& e : fs::directory_iterator(an))
    if (e.path().filename().string().rfind("hist_", 0) == 0) ++hists;
  EXPECT_EQ(hists, 2u * 6u);  // input, projection, three intermediates, output per network
}

TEST_F(FittedMinr, RerunIsByteIdentical) {
  ASSERT_EQ(status_, 0);
  const auto again = dir("minr_rerun");
  ASSERT_EQ(run("rerun --manifest " + (out_ / "manifest.json").string() + " --out " + again.string() +
                " --threads 2")
                .status,
            0);
  for (const char* f : {"ckpt.minr", "report.json", "loss.csv", "recon_1.png"})
    EXPECT_EQ(slurp(again / f), slurp(out_ / f)) << f;
}

TEST(Cli, SuperResolutionDoublesSizeAndScaleOneEqualsReconstruct) {
  const auto out = dir("sr_fit");
  ASSERT_EQ(run("fit --mode separate --images " + crop(3) + " --downsample 2" + kSmall + "--out " + out.string())
                .status,
            0);
  const auto ckpt = (out / "ckpt.minr").string();
  const auto sr = dir("sr_out");
  const auto r = run("superres --ckpt " + ckpt + " --scale 2 --reference " + crop(3) + " --out " + sr.string());
  ASSERT_EQ(r.status, 0);
  const auto lines = json_lines(r.out);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0]["height"], 64);
  EXPECT_EQ(lines[0]["width"], 64);
  EXPECT_TRUE(lines[0].contains("bilinear_psnr"));
  const auto image = minr::load_image(sr / "sr_0.png");
  EXPECT_EQ(image.height, 64u);
  EXPECT_EQ(image.width, 64u);

  const auto one = dir("sr_one"), rec = dir("sr_rec");
  ASSERT_EQ(run("superres --ckpt " + ckpt + " --scale 1 --out " + one.string()).status, 0);
  ASSERT_EQ(run("reconstruct --ckpt " + ckpt + " --out " + rec.string()).status, 0);
  EXPECT_EQ(slurp(one / "sr_0.png"), slurp(rec / "recon_0.png"));
}

TEST(Cli, BaselineReconstructsEveryImage) {
  const auto out = dir("grid_fit");
  ASSERT_EQ(run("fit --mode grid --images " + crop(0) + " " + crop(1) + kSmall + "--out " + out.string()).status, 0);
  const auto rec = dir("grid_rec");
  const auto r = run("reconstruct --ckpt " + (out / "ckpt.minr").string() + " --reference " + crop(0) + " " +
                     crop(1) + " --out " + rec.string());
  ASSERT_EQ(r.status, 0);
  const auto lines = json_lines(r.out);
  ASSERT_EQ(lines.size(), 2u);
  const auto report = read_json(out / "report.json");
  for (const auto& line : lines)
    EXPECT_NEAR(line["psnr"].get<double>(), report["images"][line["id"].get<std::size_t>()]["psnr"].get<double>(),
                1e-9);
  EXPECT_EQ(run("superres --ckpt " + (out / "ckpt.minr").string() + " --scale 2 --out " + dir("grid_sr").string())
                .status,
            2);
}

TEST(Cli, ParamsMatchesClosedForms) {
  const auto sep = json_lines(run("params --mode separate --n-images 100 --width 256 --layers 3").out);
  const auto joint = json_lines(run("params --mode minr --n-images 100 --width 256 --layers 3").out);
  ASSERT_EQ(sep.size(), 1u);
  ASSERT_EQ(joint.size(), 1u);
  // (2*256+256) + 3*(256*256+256) + (256*3+3) per image.
  EXPECT_EQ(sep[0]["param_count"], 100u * 198915u);
  // Three shared layers plus, per image, input, projection and output.
  EXPECT_EQ(joint[0]["param_count"], 3u * 65792u + 100u * (768u + 65792u + 771u));
  const auto sweep = run("params --sweep 3 --width 256 --layers 3");
  ASSERT_EQ(sweep.status, 0);
  EXPECT_EQ(sweep.out.substr(0, sweep.out.find('\n')), "n_images,separate,minr,ratio");
  EXPECT_EQ(std::count(sweep.out.begin(), sweep.out.end(), '\n'), 4);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  const auto out = (kWork / "usage").string();
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("fit --images " + crop(0) + " --share 9 --layers 3 --out " + out).status, 2);
  EXPECT_EQ(run("fit --mode separate --images " + crop(0) + " --share 1 --out " + out).status, 2);
  EXPECT_EQ(run("fit --mode grid --images " + crop(0) + " --no-projection --out " + out).status, 2);
  EXPECT_EQ(run("fit --images " + crop(0) + " --activation relu --out " + out).status, 2);
  EXPECT_EQ(run("fit --images " + crop(0) + " --downsample 3 --out " + out).status, 2);
  EXPECT_EQ(run("fit --images " + crop(0) + " --out").status, 2);
}

TEST(Cli, DataErrorsExitWithThree) {
  const auto out = (kWork / "data_errors").string();
  fs::create_directories(kWork);
  const auto junk = kWork / "junk.png";
  std::ofstream(junk) << "not a png";
  const auto missing = (kWork / "missing.png").string();
  EXPECT_EQ(run("fit --images " + missing + kSmall + "--out " + out).status, 3);
  EXPECT_EQ(run("fit --images " + junk.string() + kSmall + "--out " + out).status, 3);

  // A checkpoint whose bytes were cut short.
  const auto fit = dir("trunc_fit");
  ASSERT_EQ(run("fit --mode separate --images " + crop(0) + kSmall + "--out " + fit.string()).status, 0);
  const auto bytes = slurp(fit / "ckpt.minr");
  std::ofstream(fit / "ckpt.minr", std::ios::binary).write(bytes.data(), std::streamsize(bytes.size() / 2));
  EXPECT_EQ(run("reconstruct --ckpt " + (fit / "ckpt.minr").string() + " --full-load --out " + out).status, 3);
}

TEST(Cli, RerunRejectsChangedInputs) {
  const auto fit = dir("tamper_fit");
  const auto input = kWork / "tamper_input.png";
  fs::copy_file(crop(1), input, fs::copy_options::overwrite_existing);
  ASSERT_EQ(run("fit --mode separate --images " + input.string() + kSmall + "--out " + fit.string()).status, 0);
  fs::copy_file(crop(2), input, fs::copy_options::overwrite_existing);
  EXPECT_EQ(run("rerun --manifest " + (fit / "manifest.json").string() + " --out " + dir("tamper_rerun").string())
                .status,
            3);
}

}  // namespace
