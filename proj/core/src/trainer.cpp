#include "minr/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <tuple>

#include "minr/metrics.hpp"
#include "minr/parallel.hpp"
#include "minr/random.hpp"
#include "fpenv.hpp"

namespace minr {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("train: lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("train: betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("train: eps must be > 0");
  if (coord_batch == 0) throw ConfigError("train: coordinate batch must be >= 1");
}

double TrainReport::mean_psnr() const {
  double s = 0.0;
  for (double p : psnr) s += p;
  return psnr.empty() ? 0.0 : s / double(psnr.size());
}

std::string baseline_name(BaselineMode mode) {
  switch (mode) {
    case BaselineMode::Row: return "row";
    case BaselineMode::Column: return "column";
    case BaselineMode::Grid: return "grid";
    case BaselineMode::Id: return "id";
  }
  return "unknown";
}

template <typename T>
void adam_step(std::span<Tensor2D<T>* const> params, std::span<const Tensor2D<T>* const> grads, AdamState<T>& state,
               const TrainConfig& config) {
  const detail::FlushSubnormals flush;
  require_shape(params.size() == grads.size(), "adam_step: one gradient per parameter");
  if (state.m.empty() && state.t == 0) {
    for (const auto* p : params) {
      state.m.emplace_back(p->rows(), p->cols());
      state.v.emplace_back(p->rows(), p->cols());
    }
  }
  require_shape(state.m.size() == params.size(), "adam_step: state does not match parameter list");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_shape(params[i]->rows() == grads[i]->rows() && params[i]->cols() == grads[i]->cols() &&
                      state.m[i].rows() == params[i]->rows() && state.m[i].cols() == params[i]->cols(),
                  "adam_step: gradient shape mismatch");
    require_finite(*grads[i], "adam_step gradient");
  }
  state.t += 1;
  const T b1 = T(config.beta1), b2 = T(config.beta2);
  const T c1 = T(1.0 - std::pow(config.beta1, double(state.t)));
  const T c2 = T(1.0 - std::pow(config.beta2, double(state.t)));
  const T lr = T(config.lr), eps = T(config.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i]->mat().array();
    const auto g = grads[i]->mat().array();
    auto m = state.m[i].mat().array();
    auto v = state.v[i].mat().array();
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g * g;
    theta -= lr * (m / c1) / ((v / c2).sqrt() + eps);
  }
}

namespace {

using Clock = std::chrono::steady_clock;

template <typename T>
struct FitData {
  Tensor2D<T> coords;
  Tensor2D<T> targets;
};

template <typename T>
FitData<T> image_data(const ImageBuffer& image) {
  return {make_grid(image.height, image.width).coords.template cast<T>(), image_targets<T>(image)};
}

// Yields the batch for one step: the full data set, or columns drawn
// uniformly with replacement from a dedicated stream.
template <typename T>
class BatchSampler {
 public:
  BatchSampler(const FitData<T>& data, std::size_t batch, std::uint64_t seed)
      : data_(data), rng_(seed), full_(batch == kFullBatch || data.coords.cols() <= batch), batch_(batch) {}

  const FitData<T>& next() {
    if (full_) return data_;
    const std::size_t n = data_.coords.cols();
    picked_.coords.resize(data_.coords.rows(), batch_);
    picked_.targets.resize(data_.targets.rows(), batch_);
    for (std::size_t j = 0; j < batch_; ++j) {
      const std::size_t c = std::size_t(rng_.below(n));
      for (std::size_t r = 0; r < data_.coords.rows(); ++r) picked_.coords(r, j) = data_.coords(r, c);
      for (std::size_t r = 0; r < data_.targets.rows(); ++r) picked_.targets(r, j) = data_.targets(r, c);
    }
    return picked_;
  }

 private:
  const FitData<T>& data_;
  Rng rng_;
  bool full_;
  std::size_t batch_;
  FitData<T> picked_;
};

// Columns processed per forward/backward pass. Batches above this are split so
// the activations of one pass stay cache resident; gradients accumulate across
// chunks in column order.
constexpr std::size_t kChunkColumns = 4096;

template <typename T>
struct ChainState {
  ForwardCache<T> cache;
  BackwardWorkspace<T> workspace;
  Tensor2D<T> coords;
  Tensor2D<T> targets;
  Tensor2D<T> grad;
};

template <typename T>
void copy_columns(const Tensor2D<T>& src, std::size_t first, std::size_t count, Tensor2D<T>& dst) {
  dst.resize(src.rows(), count);
  for (std::size_t r = 0; r < src.rows(); ++r) {
    const auto from = src.row(r).subspan(first, count);
    std::copy(from.begin(), from.end(), dst.row(r).begin());
  }
}

// MSE of the chain on (coords, targets); d(MSE)/d(params) is added to sinks.
template <typename T>
double chain_gradients(std::span<const LinearLayer<T>* const> layers, const ActivationKind& activation,
                       const Tensor2D<T>& coords, const Tensor2D<T>& targets, std::span<const GradSink<T>> sinks,
                       ChainState<T>& st) {
  const detail::FlushSubnormals flush;
  const std::size_t n = coords.cols();
  if (n <= kChunkColumns) {
    forward_chain<T>(layers, activation, coords, st.cache);
    auto loss = mse_loss(st.cache.output, targets);
    backward_chain<T>(layers, coords, st.cache, loss.grad, sinks, st.workspace);
    return loss.loss;
  }
  const T scale = T(2) / T(targets.size());
  double sse = 0.0;
  for (std::size_t first = 0; first < n; first += kChunkColumns) {
    const std::size_t count = std::min(kChunkColumns, n - first);
    copy_columns(coords, first, count, st.coords);
    copy_columns(targets, first, count, st.targets);
    forward_chain<T>(layers, activation, st.coords, st.cache);
    sse += mse_value(st.cache.output, st.targets) * double(st.targets.size());
    st.grad.resize(st.targets.rows(), count);
    st.grad.mat() = (st.cache.output.mat() - st.targets.mat()) * scale;
    backward_chain<T>(layers, st.coords, st.cache, st.grad, sinks, st.workspace);
  }
  return sse / double(targets.size());
}

template <typename T>
std::vector<Tensor2D<T>*> siren_params(SirenModel<T>& m) {
  std::vector<Tensor2D<T>*> out;
  for (auto* l : m.layers()) {
    out.push_back(&l->weight);
    out.push_back(&l->bias);
  }
  return out;
}

template <typename T>
std::vector<const Tensor2D<T>*> siren_grads(SirenModel<T>& m) {
  std::vector<const Tensor2D<T>*> out;
  for (auto* l : m.layers()) {
    out.push_back(&l->grad_weight);
    out.push_back(&l->grad_bias);
  }
  return out;
}

// Single-network optimisation loop shared by separate SIRENs and the
// concatenation baselines.
template <typename T>
class SirenFitter {
 public:
  SirenFitter(SirenModel<T>& model, const FitData<T>& data, const TrainConfig& config, std::uint64_t batch_stream)
      : model_(model), sampler_(data, config.coord_batch, batch_stream), config_(config) {
    for (auto* l : model_.layers()) {
      layers_.push_back(l);
      sinks_.push_back({&l->grad_weight, &l->grad_bias});
    }
    params_ = siren_params(model_);
    grads_ = siren_grads(model_);
  }

  double step() {
    const auto& batch = sampler_.next();
    for (auto* l : model_.layers()) l->zero_grad();
    const double loss =
        chain_gradients<T>(layers_, model_.shape.activation, batch.coords, batch.targets, sinks_, state_);
    adam_step<T>(params_, grads_, adam_, config_);
    return loss;
  }

 private:
  SirenModel<T>& model_;
  BatchSampler<T> sampler_;
  const TrainConfig& config_;
  std::vector<const LinearLayer<T>*> layers_;
  std::vector<GradSink<T>> sinks_;
  std::vector<Tensor2D<T>*> params_;
  std::vector<const Tensor2D<T>*> grads_;
  AdamState<T> adam_;
  ChainState<T> state_;
};

void score(TrainReport& report, const std::vector<ImageBuffer>& recon, const MultiImageDataset& ds) {
  report.psnr.clear();
  report.ssim.clear();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    report.psnr.push_back(psnr(recon[i], ds.images[i]));
    const auto& im = ds.images[i];
    if (im.height >= kSsimWindow && im.width >= kSsimWindow)
      report.ssim.emplace_back(ssim(recon[i], im));
    else
      report.ssim.emplace_back(std::nullopt);
  }
}

template <typename T>
std::vector<double> psnr_all(const std::vector<ImageBuffer>& recon, const MultiImageDataset& ds) {
  std::vector<double> out;
  for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(psnr(recon[i], ds.images[i]));
  return out;
}

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

void require_dataset(const MultiImageDataset& ds) {
  if (ds.images.empty()) throw ConfigError("train: empty dataset");
}

}  // namespace

template <typename T>
ImageBuffer render_siren(const SirenModel<T>& model, std::size_t height, std::size_t width, std::size_t scale) {
  const auto grid = scale == 1 ? make_grid(height, width) : upscaled_grid(height, width, scale);
  return tensor_to_image(forward_siren(model, grid.coords.template cast<T>()), grid.height, grid.width);
}

template <typename T>
std::vector<ImageBuffer> reconstruct_minr(const MinrModel<T>& model, const MultiImageDataset& ds) {
  std::vector<ImageBuffer> out(ds.size());
  parallel_for(ds.size(), worker_threads(), [&](std::size_t i) {
    const auto& im = ds.images[i];
    const auto grid = make_grid(im.height, im.width).coords.template cast<T>();
    out[i] = tensor_to_image(forward_minr(model, i, grid), im.height, im.width);
  });
  return out;
}

template <typename T>
SeparateResult<T> train_separate(const MultiImageDataset& ds, const NetworkShape& shape, const TrainConfig& config) {
  require_dataset(ds);
  config.validate();
  shape.validate();
  const auto start = Clock::now();
  const std::size_t n = ds.size();
  SeparateResult<T> result;
  result.models.resize(n);
  std::vector<std::vector<double>> curves(n);
  std::vector<std::vector<std::vector<double>>> evals(n);
  parallel_for(n, worker_threads(config.threads), [&](std::size_t i) {
    auto& model = result.models[i];
    model = init_siren<T>(shape, image_seed(config.seed, i));
    const auto data = image_data<T>(ds.images[i]);
    SirenFitter<T> fitter(model, data, config, batch_seed(config.seed, i));
    curves[i].reserve(config.steps);
    for (std::size_t s = 0; s < config.steps; ++s) {
      curves[i].push_back(fitter.step());
      if (config.eval_every && (s + 1) % config.eval_every == 0)
        evals[i].push_back({psnr(render_siren(model, ds.images[i].height, ds.images[i].width), ds.images[i])});
    }
  });
  auto& report = result.report;
  report.method = "separate";
  report.loss_curve.assign(config.steps, 0.0);
  for (std::size_t s = 0; s < config.steps; ++s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += curves[i][s];
    report.loss_curve[s] = sum / double(n);
  }
  if (config.eval_every) {
    for (std::size_t k = 0; k < evals.front().size(); ++k) {
      EvalPoint p{(k + 1) * config.eval_every, {}};
      for (std::size_t i = 0; i < n; ++i) p.psnr.push_back(evals[i][k].front());
      report.evaluations.push_back(std::move(p));
    }
  }
  std::vector<ImageBuffer> recon(n);
  for (std::size_t i = 0; i < n; ++i)
    recon[i] = render_siren(result.models[i], ds.images[i].height, ds.images[i].width);
  score(report, recon, ds);
  report.param_count = param_count_separate(shape, n);
  report.elapsed_seconds = seconds_since(start);
  return result;
}

namespace {

// Per-image forward/backward for one MINR step. Image-specific layers
// accumulate in place; shared layers accumulate into per-image scratch that is
// reduced in image-id order, so results do not depend on the thread count.
template <typename T>
class MinrGradientEngine {
 public:
  MinrGradientEngine(MinrModel<T>& model, std::size_t threads) : model_(model), threads_(threads) {
    const std::size_t n = model.config.n_images;
    const std::size_t width = model.config.shape.width;
    states_.resize(n);
    scratch_.resize(n);
    for (auto& s : scratch_) s.assign(model.shared.size(), {Tensor2D<T>(width, width), Tensor2D<T>(width, 1)});
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<const LinearLayer<T>*> layers;
      std::vector<GradSink<T>> sinks;
      for (auto& link : model_.chain(i)) {
        layers.push_back(link.layer);
        if (link.shared_index >= 0) {
          auto& [gw, gb] = scratch_[i][std::size_t(link.shared_index)];
          sinks.push_back({&gw, &gb});
        } else {
          sinks.push_back({&link.layer->grad_weight, &link.layer->grad_bias});
        }
      }
      layers_.push_back(std::move(layers));
      sinks_.push_back(std::move(sinks));
    }
  }

  // batch(i) returns the coordinates/targets for image i.
  template <typename BatchFn>
  std::vector<double> run(BatchFn&& batch) {
    const std::size_t n = model_.config.n_images;
    std::vector<double> losses(n, 0.0);
    const auto& activation = model_.config.shape.activation;
    parallel_for(n, threads_, [&](std::size_t i) {
      for (auto& sink : sinks_[i]) {
        sink.weight->fill(T(0));
        sink.bias->fill(T(0));
      }
      const auto& [coords, targets] = batch(i);
      losses[i] = chain_gradients<T>(layers_[i], activation, coords, targets, sinks_[i], states_[i]);
    });
    for (std::size_t k = 0; k < model_.shared.size(); ++k) {
      auto& gw = model_.shared[k].grad_weight;
      auto& gb = model_.shared[k].grad_bias;
      gw.mat() = scratch_[0][k].first.mat();
      gb.mat() = scratch_[0][k].second.mat();
      for (std::size_t i = 1; i < n; ++i) {
        gw.mat() += scratch_[i][k].first.mat();
        gb.mat() += scratch_[i][k].second.mat();
      }
      gw.mat() /= T(n);
      gb.mat() /= T(n);
    }
    return losses;
  }

 private:
  MinrModel<T>& model_;
  std::size_t threads_;
  std::vector<ChainState<T>> states_;
  std::vector<std::vector<std::pair<Tensor2D<T>, Tensor2D<T>>>> scratch_;
  std::vector<std::vector<const LinearLayer<T>*>> layers_;
  std::vector<std::vector<GradSink<T>>> sinks_;
};

template <typename T>
class MinrFitter {
 public:
  MinrFitter(MinrModel<T>& model, const std::vector<FitData<T>>& data, const TrainConfig& config)
      : config_(config), engine_(model, worker_threads(config.threads)) {
    for (std::size_t i = 0; i < model.config.n_images; ++i)
      samplers_.emplace_back(data[i], config.coord_batch, batch_seed(config.seed, i));
    auto add = [&](LinearLayer<T>& l) {
      params_.push_back(&l.weight);
      params_.push_back(&l.bias);
      grads_.push_back(&l.grad_weight);
      grads_.push_back(&l.grad_bias);
    };
    for (auto& l : model.shared) add(l);
    for (auto& img : model.per_image) {
      add(img.input);
      if (img.projection) add(*img.projection);
      for (auto& p : img.private_layers) add(p);
      add(img.output);
    }
  }

  double step() {
    const auto losses = engine_.run([&](std::size_t i) -> const FitData<T>& { return samplers_[i].next(); });
    adam_step<T>(params_, grads_, adam_, config_);
    double sum = 0.0;
    for (double l : losses) sum += l;
    return sum / double(losses.size());
  }

 private:
  const TrainConfig& config_;
  MinrGradientEngine<T> engine_;
  std::vector<BatchSampler<T>> samplers_;
  std::vector<Tensor2D<T>*> params_;
  std::vector<const Tensor2D<T>*> grads_;
  AdamState<T> adam_;
};

}  // namespace

template <typename T>
std::vector<double> compute_minr_gradients(MinrModel<T>& model, std::span<const ImageBatch<T>> batches,
                                           std::size_t threads) {
  require_shape(batches.size() == model.config.n_images, "compute_minr_gradients: one batch per image");
  for (auto& l : model.shared) l.zero_grad();
  MinrGradientEngine<T> engine(model, threads);
  return engine.run([&](std::size_t i) { return std::tie(batches[i].coords, batches[i].targets); });
}

template <typename T>
MinrResult<T> train_minr(const MultiImageDataset& ds, const MinrConfig& minr_config, const TrainConfig& config) {
  require_dataset(ds);
  config.validate();
  if (minr_config.n_images != ds.size()) throw ConfigError("train_minr: n_images must equal the dataset size");
  const auto start = Clock::now();
  MinrResult<T> result;
  result.model = init_minr<T>(minr_config, config.seed);
  std::vector<FitData<T>> data;
  for (const auto& im : ds.images) data.push_back(image_data<T>(im));
  MinrFitter<T> fitter(result.model, data, config);
  auto& report = result.report;
  report.method = "minr";
  report.loss_curve.reserve(config.steps);
  for (std::size_t s = 0; s < config.steps; ++s) {
    report.loss_curve.push_back(fitter.step());
    if (config.eval_every && (s + 1) % config.eval_every == 0)
      report.evaluations.push_back({s + 1, psnr_all<T>(reconstruct_minr(result.model, ds), ds)});
  }
  score(report, reconstruct_minr(result.model, ds), ds);
  report.param_count = param_count(minr_config);
  report.elapsed_seconds = seconds_since(start);
  return result;
}

template <typename T>
std::vector<ImageBuffer> reconstruct_baseline(const BaselineResult<T>& r, const MultiImageDataset& ds) {
  std::vector<ImageBuffer> out;
  if (r.mode == BaselineMode::Id) {
    const auto ids = id_coords(ds);
    const auto pred = forward_siren(r.model, ids.grid.coords.template cast<T>());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto& im = ds.images[i];
      Tensor2D<T> slice(3, im.pixels());
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t p = 0; p < im.pixels(); ++p) slice(c, p) = pred(c, ids.offsets[i] + p);
      out.push_back(tensor_to_image(slice, im.height, im.width));
    }
  } else {
    const auto mosaic = render_siren(r.model, r.mosaic_height, r.mosaic_width);
    for (const auto& placement : r.placements) out.push_back(crop(mosaic, placement));
  }
  return out;
}

template <typename T>
BaselineResult<T> train_concat_baseline(const MultiImageDataset& ds, BaselineMode mode, const NetworkShape& shape,
                                        const TrainConfig& config) {
  require_dataset(ds);
  config.validate();
  const auto start = Clock::now();
  BaselineResult<T> result;
  result.mode = mode;
  NetworkShape net = shape;
  FitData<T> data;
  if (mode == BaselineMode::Id) {
    net.d_in = 3;
    const auto ids = id_coords(ds);
    data = {ids.grid.coords.template cast<T>(), ids.targets.template cast<T>()};
  } else {
    net.d_in = 2;
    const auto concat = mode == BaselineMode::Row ? ConcatMode::Row
                        : mode == BaselineMode::Column ? ConcatMode::Column
                                                       : ConcatMode::Grid;
    auto mosaic = make_mosaic(ds, concat);
    result.placements = mosaic.placements;
    result.mosaic_height = mosaic.image.height;
    result.mosaic_width = mosaic.image.width;
    data = image_data<T>(mosaic.image);
  }
  result.model = init_siren<T>(net, image_seed(config.seed, 0));
  SirenFitter<T> fitter(result.model, data, config, batch_seed(config.seed, 0));
  auto& report = result.report;
  report.method = baseline_name(mode);
  report.loss_curve.reserve(config.steps);
  for (std::size_t s = 0; s < config.steps; ++s) {
    report.loss_curve.push_back(fitter.step());
    if (config.eval_every && (s + 1) % config.eval_every == 0)
      report.evaluations.push_back({s + 1, psnr_all<T>(reconstruct_baseline(result, ds), ds)});
  }
  score(report, reconstruct_baseline(result, ds), ds);
  report.param_count = param_count(net);
  report.elapsed_seconds = seconds_since(start);
  return result;
}

#define MINR_INSTANTIATE(T)                                                                                       \
  template void adam_step<T>(std::span<Tensor2D<T>* const>, std::span<const Tensor2D<T>* const>, AdamState<T>&, \
                             const TrainConfig&);                                                                 \
  template SeparateResult<T> train_separate<T>(const MultiImageDataset&, const NetworkShape&, const TrainConfig&); \
  template MinrResult<T> train_minr<T>(const MultiImageDataset&, const MinrConfig&, const TrainConfig&);          \
  template BaselineResult<T> train_concat_baseline<T>(const MultiImageDataset&, BaselineMode, const NetworkShape&, \
                                                      const TrainConfig&);                                        \
  template std::vector<double> compute_minr_gradients<T>(MinrModel<T>&, std::span<const ImageBatch<T>>,          \
                                                         std::size_t);                                            \
  template std::vector<ImageBuffer> reconstruct_minr<T>(const MinrModel<T>&, const MultiImageDataset&);           \
  template ImageBuffer render_siren<T>(const SirenModel<T>&, std::size_t, std::size_t, std::size_t);                       \
  template std::vector<ImageBuffer> reconstruct_baseline<T>(const BaselineResult<T>&, const MultiImageDataset&);

MINR_INSTANTIATE(float)
MINR_INSTANTIATE(double)
#undef MINR_INSTANTIATE

}  // namespace minr
