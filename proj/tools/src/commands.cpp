#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>

namespace minr::cli {

namespace {

std::string recon_name(std::size_t id) { return "recon_" + std::to_string(id) + ".png"; }

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

MultiImageDataset load_inputs(const std::vector<fs::path>& paths, std::size_t factor) {
  auto ds = load_dataset(paths);
  if (factor != 1)
    for (auto& im : ds.images) im = downsample(im, factor);
  return ds;
}

struct Loaded {
  Manifest manifest;
  MinrModel<float> model;  // baselines: one network wrapped as a one-image model
};

fs::path manifest_path(const ReconstructOptions& o) {
  return o.manifest ? *o.manifest : o.ckpt.parent_path() / "manifest.json";
}

std::vector<std::size_t> resolve_ids(const std::vector<std::size_t>& ids, std::size_t n) {
  std::vector<std::size_t> out = ids;
  if (out.empty())
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
  for (auto id : out)
    if (id >= n) throw ConfigError("image id " + std::to_string(id) + " out of range (" + std::to_string(n) + " images)");
  return out;
}

// Dataset with the recorded native sizes, for rendering without the inputs.
MultiImageDataset size_only_dataset(const Manifest& m) {
  MultiImageDataset ds;
  for (const auto& in : m.inputs) ds.images.emplace_back(in.height, in.width);
  return ds;
}

BaselineResult<float> baseline_from(const Manifest& m, const MinrModel<float>& model) {
  BaselineResult<float> r;
  r.model = assemble_image_network(model, 0);
  r.mode = baseline_mode(m.options.mode);
  if (m.layout) {
    r.placements = m.layout->placements;
    r.mosaic_height = m.layout->mosaic_height;
    r.mosaic_width = m.layout->mosaic_width;
  }
  return r;
}

void score_against(const ImageBuffer& image, const std::vector<fs::path>& refs, std::size_t k, std::size_t id,
                   nlohmann::json& line) {
  if (refs.empty()) return;
  const auto ref = load_image(refs[k]);
  if (ref.height != image.height || ref.width != image.width)
    throw DataError("reference '" + refs[k].string() + "' is " + std::to_string(ref.height) + "x" +
                    std::to_string(ref.width) + ", image " + std::to_string(id) + " is " +
                    std::to_string(image.height) + "x" + std::to_string(image.width));
  line["psnr"] = psnr_json(psnr(image, ref));
  line["ssim"] = image.height >= kSsimWindow && image.width >= kSsimWindow ? nlohmann::json(ssim(image, ref))
                                                                            : nlohmann::json(nullptr);
}

}  // namespace

void run_fit(const FitOptions& o, const fs::path& out, std::size_t threads) {
  if (o.images.empty()) throw ConfigError("fit: at least one image is required");
  if (o.mode != FitMode::Minr && (o.share || !o.projection))
    throw ConfigError("fit: --share and --no-projection apply to --mode minr only");
  if (o.downsample != 1 && o.downsample != 2 && o.downsample != 4)
    throw ConfigError("fit: --downsample must be 1, 2 or 4");
  const auto shape = o.shape();
  auto train = o.train_config();
  train.threads = threads;
  if (o.mode == FitMode::Minr) o.minr_config(o.images.size());

  Manifest manifest;
  manifest.options = o;
  const auto ds = load_inputs(o.images, o.downsample);
  for (std::size_t i = 0; i < ds.size(); ++i)
    manifest.inputs.push_back({o.images[i].string(), sha256_file(o.images[i]), ds.images[i].height,
                               ds.images[i].width});

  const auto start = std::chrono::steady_clock::now();
  MinrModel<float> packed;
  TrainReport report;
  std::vector<ImageBuffer> recon;
  if (o.mode == FitMode::Minr) {
    auto r = train_minr<float>(ds, o.minr_config(ds.size()), train);
    recon = reconstruct_minr(r.model, ds);
    packed = std::move(r.model);
    report = std::move(r.report);
  } else if (o.mode == FitMode::Separate) {
    auto r = train_separate<float>(ds, shape, train);
    for (std::size_t i = 0; i < ds.size(); ++i)
      recon.push_back(render_siren(r.models[i], ds.images[i].height, ds.images[i].width));
    packed = pack_separate<float>(r.models);
    report = std::move(r.report);
  } else {
    auto r = train_concat_baseline<float>(ds, baseline_mode(o.mode), shape, train);
    recon = reconstruct_baseline(r, ds);
    if (o.mode != FitMode::Id) manifest.layout = Layout{r.mosaic_height, r.mosaic_width, r.placements};
    packed = pack_separate<float>(std::span(&r.model, 1));
    report = std::move(r.report);
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(out);
  save_checkpoint(packed, out / "ckpt.minr");
  auto report_json = to_json(report);
  report_json["mode"] = mode_name(o.mode);
  write_json(out / "report.json", report_json);
  write_text(out / "loss.csv", loss_csv(report));
  manifest.outputs = {"ckpt.minr", "report.json", "loss.csv"};
  for (std::size_t i = 0; i < recon.size(); ++i) {
    save_image(recon[i], out / recon_name(i));
    manifest.outputs.push_back(recon_name(i));
  }
  write_json(out / "manifest.json", to_json(manifest));
  write_json(out / "timing.json", {{"elapsed_seconds", elapsed}});

  std::printf("%s: %zu images, %zu params (%sM), mean PSNR %s dB\n", mode_name(o.mode).c_str(), ds.size(),
              report.param_count, format_millions(report.param_count).c_str(),
              psnr_json(report.mean_psnr()).dump().c_str());
}

namespace {

Loaded load_run(const ReconstructOptions& o, bool need_full) {
  Loaded l{read_manifest(manifest_path(o)), {}};
  const auto header = read_checkpoint_header(o.ckpt);
  const std::size_t expected = is_baseline(l.manifest.options.mode) ? 1 : l.manifest.inputs.size();
  if (header.config.n_images != expected)
    throw FormatError("checkpoint holds " + std::to_string(header.config.n_images) + " networks, manifest expects " +
                      std::to_string(expected));
  if (need_full) l.model = load_checkpoint(o.ckpt);
  return l;
}

// Renders image `id` of a per-image (separate or minr) run at `scale`.
ImageBuffer render_per_image(const ReconstructOptions& o, const Loaded& l, std::size_t id) {
  const auto& in = l.manifest.inputs[id];
  if (o.full_load) {
    if (o.scale == 1) {
      const auto grid = make_grid(in.height, in.width);
      return tensor_to_image(forward_minr(l.model, id, grid.coords), in.height, in.width);
    }
    return render_siren(assemble_image_network(l.model, id), in.height, in.width, o.scale);
  }
  return render_siren(load_image_network(o.ckpt, id), in.height, in.width, o.scale);
}

}  // namespace

void run_reconstruct(const ReconstructOptions& o) {
  const auto probe = read_manifest(manifest_path(o));
  const bool baseline = is_baseline(probe.options.mode);
  const auto l = load_run(o, baseline || o.full_load);
  const auto ids = resolve_ids(o.ids, l.manifest.inputs.size());
  if (!o.references.empty() && o.references.size() != ids.size())
    throw ConfigError("reconstruct: give one --reference per reconstructed id");

  std::vector<ImageBuffer> images;
  if (baseline) {
    const auto all = reconstruct_baseline(baseline_from(l.manifest, l.model), size_only_dataset(l.manifest));
    for (auto id : ids) images.push_back(all[id]);
  } else {
    for (auto id : ids) images.push_back(render_per_image(o, l, id));
  }
  fs::create_directories(o.out);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    save_image(images[k], o.out / recon_name(ids[k]));
    nlohmann::json line{{"id", ids[k]}, {"file", recon_name(ids[k])}};
    score_against(images[k], o.references, k, ids[k], line);
    std::cout << line.dump() << "\n";
  }
}

void run_superres(const ReconstructOptions& o) {
  if (o.scale != 1 && o.scale != 2 && o.scale != 4) throw ConfigError("superres: --scale must be 1, 2 or 4");
  const auto probe = read_manifest(manifest_path(o));
  if (is_baseline(probe.options.mode))
    throw ConfigError("superres: needs a separate or minr checkpoint (one network per image)");
  const auto l = load_run(o, o.full_load);
  const auto ids = resolve_ids(o.ids, l.manifest.inputs.size());
  if (!o.references.empty() && o.references.size() != ids.size())
    throw ConfigError("superres: give one --reference per id");

  fs::create_directories(o.out);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const auto id = ids[k];
    const auto image = render_per_image(o, l, id);
    const std::string name = "sr_" + std::to_string(id) + ".png";
    save_image(image, o.out / name);
    nlohmann::json line{{"id", id}, {"file", name}, {"height", image.height}, {"width", image.width}};
    score_against(image, o.references, k, id, line);
    if (!o.references.empty()) {
      // Bilinear baseline from the same low-resolution input the network saw.
      auto low = load_image(l.manifest.inputs[id].path);
      if (l.manifest.options.downsample != 1) low = downsample(low, l.manifest.options.downsample);
      const auto bilinear = upsample_bilinear(low, o.scale);
      const auto ref = load_image(o.references[k]);
      line["bilinear_psnr"] = psnr_json(psnr(bilinear, ref));
    }
    std::cout << line.dump() << "\n";
  }
}

void run_params(const ParamsOptions& o) {
  if (o.sweep) {
    NetworkShape shape;
    shape.width = o.width;
    shape.n_intermediate = o.layers;
    std::printf("n_images,separate,minr,ratio\n");
    for (std::size_t n = 1; n <= o.sweep; ++n) {
      const auto sep = param_count_separate(shape, n);
      const auto joint = param_count(MinrConfig::canonical(shape, n));
      std::printf("%zu,%zu,%zu,%.6f\n", n, sep, joint, double(joint) / double(sep));
    }
    return;
  }
  std::size_t count = 0;
  if (o.ckpt) {
    count = param_count(read_checkpoint_header(*o.ckpt).config);
  } else {
    if (o.mode != FitMode::Minr && (o.share || !o.projection))
      throw ConfigError("params: --share and --no-projection apply to --mode minr only");
    if (o.n_images < 1) throw ConfigError("params: --n-images must be >= 1");
    NetworkShape shape;
    shape.width = o.width;
    shape.n_intermediate = o.layers;
    shape.validate();
    if (o.mode == FitMode::Minr) {
      MinrConfig c = MinrConfig::canonical(shape, o.n_images);
      c.use_projection = o.projection;
      if (o.share) c.share_mask = *o.share;
      c.validate();
      count = param_count(c);
    } else if (o.mode == FitMode::Separate) {
      count = param_count_separate(shape, o.n_images);
    } else {
      if (o.mode == FitMode::Id) shape.d_in = 3;
      count = param_count(shape);
    }
  }
  std::cout << nlohmann::json{{"param_count", count}, {"params_m", format_millions(count)}}.dump() << "\n";
}

void run_analyze(const AnalyzeOptions& o) {
  if (o.ckpts.empty()) throw ConfigError("analyze: at least one checkpoint is required");
  if (o.bins < 3) throw ConfigError("analyze: --bins must be >= 3");
  std::vector<MinrModel<float>> models;
  for (const auto& p : o.ckpts) {
    models.push_back(load_checkpoint(p));
    if (o.image_id >= models.back().config.n_images)
      throw ConfigError("analyze: image id " + std::to_string(o.image_id) + " not in '" + p.string() + "'");
  }
  fs::create_directories(o.out);
  const auto role_of = [](const std::string& name) {
    return name.rfind("intermediate", 0) == 0 ? std::string("intermediate") : name;
  };
  std::map<std::string, std::vector<std::span<const float>>> by_layer;
  std::vector<std::string> order;
  for (std::size_t k = 0; k < models.size(); ++k) {
    for (const auto& layer : network_layers(models[k], o.image_id)) {
      const auto& w = layer.layer->weight.data();
      write_text(o.out / ("hist_" + std::to_string(k) + "_" + layer.name + ".csv"),
                 histogram_csv(make_histogram(w, o.bins)));
      if (!by_layer.count(layer.name)) order.push_back(layer.name);
      by_layer[layer.name].push_back(w);
    }
  }
  nlohmann::json summary{{"networks", o.ckpts.size()}, {"bins", o.bins}};
  std::map<std::string, std::pair<double, std::size_t>> roles;
  for (const auto& name : order) {
    const auto& samples = by_layer[name];
    if (samples.size() != models.size()) continue;  // not present in every network
    const auto hs = common_histograms(samples, o.bins);
    std::string csv = "network";
    for (std::size_t b = 0; b < hs.size(); ++b) csv += "," + std::to_string(b);
    csv += "\n";
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < hs.size(); ++a) {
      csv += std::to_string(a);
      for (std::size_t b = 0; b < hs.size(); ++b) {
        const double d = distribution_distance(hs[a], hs[b]);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", d);
        csv += std::string(",") + buf;
        if (a < b) {
          sum += d;
          ++pairs;
        }
      }
      csv += "\n";
    }
    write_text(o.out / ("dist_" + name + ".csv"), csv);
    if (pairs) {
      summary["layers"][name] = sum / double(pairs);
      auto& r = roles[role_of(name)];
      r.first += sum;
      r.second += pairs;
    }
  }
  for (const auto& [role, acc] : roles) summary["roles"][role] = acc.first / double(acc.second);
  write_json(o.out / "analysis.json", summary);
  std::cout << summary.dump() << "\n";
}

void run_rerun(const fs::path& manifest_file, const fs::path& out, std::size_t threads) {
  const auto m = read_manifest(manifest_file);
  for (const auto& in : m.inputs) {
    const auto digest = sha256_file(in.path);
    if (digest != in.sha256) throw DataError("input '" + in.path + "' changed since the manifest was written");
  }
  run_fit(m.options, out, threads);
}

}  // namespace minr::cli
