#include "manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

namespace minr::cli {

namespace {

const std::pair<FitMode, const char*> kModes[] = {
    {FitMode::Separate, "separate"}, {FitMode::Minr, "minr"}, {FitMode::Row, "row"},
    {FitMode::Column, "column"},     {FitMode::Grid, "grid"}, {FitMode::Id, "id"},
};

}  // namespace

std::string mode_name(FitMode mode) {
  for (const auto& [m, name] : kModes)
    if (m == mode) return name;
  return "unknown";
}

FitMode parse_mode(const std::string& name) {
  for (const auto& [m, n] : kModes)
    if (name == n) return m;
  throw ConfigError("unknown mode '" + name + "'");
}

bool is_baseline(FitMode mode) { return mode != FitMode::Separate && mode != FitMode::Minr; }

BaselineMode baseline_mode(FitMode mode) {
  switch (mode) {
    case FitMode::Row: return BaselineMode::Row;
    case FitMode::Column: return BaselineMode::Column;
    case FitMode::Grid: return BaselineMode::Grid;
    case FitMode::Id: return BaselineMode::Id;
    default: throw ConfigError("mode '" + mode_name(mode) + "' is not a concatenation baseline");
  }
}

NetworkShape FitOptions::shape() const {
  NetworkShape s;
  s.width = width;
  s.n_intermediate = layers;
  s.activation = make_activation(activation, {.omega0 = omega0, .gauss_s = gauss_s, .wire_s0 = wire_s0});
  validate(s.activation);
  s.validate();
  return s;
}

MinrConfig FitOptions::minr_config(std::size_t n_images) const {
  MinrConfig c;
  c.shape = shape();
  c.n_images = n_images;
  c.use_projection = projection;
  if (share) {
    c.share_mask = *share;
  } else {
    for (std::size_t p = 1; p <= layers; ++p) c.share_mask.push_back(p);
  }
  c.validate();
  return c;
}

TrainConfig FitOptions::train_config() const {
  TrainConfig t;
  t.lr = lr;
  t.steps = steps;
  t.seed = seed;
  t.coord_batch = batch;
  t.eval_every = eval_every;
  t.validate();
  return t;
}

std::vector<std::size_t> parse_share(const std::string& text) {
  std::vector<std::size_t> out;
  if (text.empty() || text == "none") return out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || item.front() == '-')
      throw ConfigError("--share: '" + item + "' is not a layer position");
    out.push_back(v);
  }
  return out;
}

std::string format_share(const std::vector<std::size_t>& share) {
  std::string s;
  for (std::size_t i = 0; i < share.size(); ++i) s += (i ? "," : "") + std::to_string(share[i]);
  return s.empty() ? "none" : s;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), std::streamsize(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), std::size_t(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

nlohmann::json to_json(const FitOptions& o) {
  const auto shape = o.shape();
  const auto [p0, p1] = activation_hyperparameters(shape.activation);
  nlohmann::json j;
  j["mode"] = mode_name(o.mode);
  j["width"] = o.width;
  j["layers"] = o.layers;
  if (o.mode == FitMode::Minr) {
    const auto c = o.minr_config(1);
    j["share"] = c.share_mask;
    j["projection"] = c.use_projection;
  }
  j["activation"] = o.activation;
  // Resolved hyperparameters: omega0/s/s0 as the network actually uses them.
  j["activation_params"] = {p0, p1};
  j["steps"] = o.steps;
  j["lr"] = o.lr;
  j["beta1"] = TrainConfig{}.beta1;
  j["beta2"] = TrainConfig{}.beta2;
  j["eps"] = TrainConfig{}.eps;
  j["seed"] = o.seed;
  j["batch"] = o.batch;
  j["downsample"] = o.downsample;
  j["eval_every"] = o.eval_every;
  return j;
}

FitOptions fit_options_from_json(const nlohmann::json& j) {
  try {
    FitOptions o;
    o.mode = parse_mode(j.at("mode").get<std::string>());
    o.width = j.at("width").get<std::size_t>();
    o.layers = j.at("layers").get<std::size_t>();
    if (j.contains("share")) o.share = j.at("share").get<std::vector<std::size_t>>();
    if (j.contains("projection")) o.projection = j.at("projection").get<bool>();
    o.activation = j.at("activation").get<std::string>();
    const auto params = j.at("activation_params").get<std::vector<double>>();
    if (params.size() != 2) throw ConfigError("manifest: activation_params must hold two values");
    const auto kind = activation_from_tag(activation_tag(make_activation(o.activation)), params[0], params[1]);
    if (std::holds_alternative<Gauss>(kind)) {
      o.gauss_s = params[0];
    } else if (std::holds_alternative<Wire>(kind)) {
      o.omega0 = params[0];
      o.wire_s0 = params[1];
    } else if (!std::holds_alternative<Identity>(kind)) {
      o.omega0 = params[0];
    }
    o.steps = j.at("steps").get<std::size_t>();
    o.lr = j.at("lr").get<double>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.batch = j.at("batch").get<std::size_t>();
    o.downsample = j.at("downsample").get<std::size_t>();
    o.eval_every = j.value("eval_every", std::size_t(0));
    return o;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

nlohmann::json to_json(const Manifest& m) {
  nlohmann::json j;
  j["tool"] = "minr";
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["config"] = to_json(m.options);
  auto& inputs = j["inputs"] = nlohmann::json::array();
  for (const auto& in : m.inputs)
    inputs.push_back({{"path", in.path}, {"sha256", in.sha256}, {"height", in.height}, {"width", in.width}});
  if (m.layout) {
    nlohmann::json l;
    l["mosaic_height"] = m.layout->mosaic_height;
    l["mosaic_width"] = m.layout->mosaic_width;
    auto& ps = l["placements"] = nlohmann::json::array();
    for (const auto& p : m.layout->placements)
      ps.push_back({{"row", p.row}, {"col", p.col}, {"height", p.height}, {"width", p.width}});
    j["layout"] = l;
  }
  j["outputs"] = m.outputs;
  return j;
}

Manifest manifest_from_json(const nlohmann::json& j) {
  try {
    if (j.at("tool") != "minr") throw FormatError("manifest: not a minr manifest");
    Manifest m;
    m.command = j.at("command").get<std::string>();
    if (m.command != "fit") throw FormatError("manifest: unsupported command '" + m.command + "'");
    m.options = fit_options_from_json(j.at("config"));
    for (const auto& in : j.at("inputs")) {
      InputRecord r{in.at("path").get<std::string>(), in.at("sha256").get<std::string>(),
                    in.at("height").get<std::size_t>(), in.at("width").get<std::size_t>()};
      m.options.images.emplace_back(r.path);
      m.inputs.push_back(std::move(r));
    }
    if (j.contains("layout")) {
      const auto& l = j.at("layout");
      Layout layout{l.at("mosaic_height").get<std::size_t>(), l.at("mosaic_width").get<std::size_t>(), {}};
      for (const auto& p : l.at("placements"))
        layout.placements.push_back({p.at("row").get<std::size_t>(), p.at("col").get<std::size_t>(),
                                     p.at("height").get<std::size_t>(), p.at("width").get<std::size_t>()});
      m.layout = std::move(layout);
    }
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

Manifest read_manifest(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("manifest '" + path.string() + "': " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace minr::cli
