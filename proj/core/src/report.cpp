#include "minr/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace minr {

namespace {

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::json psnr_json(double value) {
  if (std::isinf(value)) return "inf";
  return value;
}

nlohmann::json to_json(const TrainReport& r) {
  nlohmann::json j;
  j["method"] = r.method;
  j["steps"] = r.loss_curve.size();
  j["param_count"] = r.param_count;
  j["params_m"] = format_millions(r.param_count);
  j["final_loss"] = r.loss_curve.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.loss_curve.back());
  auto& images = j["images"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.psnr.size(); ++i) {
    nlohmann::json im;
    im["id"] = i;
    im["psnr"] = psnr_json(r.psnr[i]);
    im["ssim"] = i < r.ssim.size() && r.ssim[i] ? nlohmann::json(*r.ssim[i]) : nlohmann::json(nullptr);
    images.push_back(im);
  }
  j["mean_psnr"] = psnr_json(r.mean_psnr());
  auto& evals = j["evaluations"] = nlohmann::json::array();
  for (const auto& e : r.evaluations) {
    nlohmann::json p;
    p["step"] = e.step;
    auto& ps = p["psnr"] = nlohmann::json::array();
    for (double v : e.psnr) ps.push_back(psnr_json(v));
    evals.push_back(p);
  }
  return j;
}

std::string format_millions(std::size_t count) {
  // Integer arithmetic: hundredths of a million, rounded half-up.
  const std::size_t hundredths = (count + 5000) / 10000;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%zu.%02zu", hundredths / 100, hundredths % 100);
  return buf;
}

std::string loss_csv(const TrainReport& r) {
  std::ostringstream out;
  out << "step,loss\n";
  for (std::size_t s = 0; s < r.loss_curve.size(); ++s) out << s << ',' << number(r.loss_curve[s]) << '\n';
  return out.str();
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream out;
  out << "edge_low,edge_high,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out << number(h.bin_edges[i]) << ',' << number(h.bin_edges[i + 1]) << ',' << h.counts[i] << '\n';
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace minr
