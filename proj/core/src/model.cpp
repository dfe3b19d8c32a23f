#include "minr/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "minr/random.hpp"
#include "fpenv.hpp"

namespace minr {

void NetworkShape::validate() const {
  if (d_in != 2 && d_in != 3) throw ConfigError("network: d_in must be 2 or 3");
  if (width < 1) throw ConfigError("network: width must be >= 1");
  if (d_out < 1) throw ConfigError("network: d_out must be >= 1");
  if (n_intermediate > kMaxIntermediate) throw ConfigError("network: at most 64 intermediate layers");
  minr::validate(activation);
}

MinrConfig MinrConfig::canonical(const NetworkShape& shape, std::size_t n_images) {
  MinrConfig c;
  c.shape = shape;
  c.n_images = n_images;
  c.use_projection = true;
  for (std::size_t p = 1; p <= shape.n_intermediate; ++p) c.share_mask.push_back(p);
  return c;
}

bool MinrConfig::is_shared(std::size_t position) const {
  return std::binary_search(share_mask.begin(), share_mask.end(), position);
}

void MinrConfig::validate() const {
  shape.validate();
  if (n_images < 1) throw ConfigError("minr: n_images must be >= 1");
  for (std::size_t i = 0; i < share_mask.size(); ++i) {
    const std::size_t p = share_mask[i];
    if (p < 1 || p > shape.n_intermediate)
      throw ConfigError("minr: share position " + std::to_string(p) + " outside 1.." +
                        std::to_string(shape.n_intermediate));
    if (i > 0 && share_mask[i - 1] >= p) throw ConfigError("minr: share mask must be strictly ascending");
  }
}

template <typename T>
std::vector<const LinearLayer<T>*> SirenModel<T>::layers() const {
  std::vector<const LinearLayer<T>*> out{&input};
  for (const auto& h : hidden) out.push_back(&h);
  out.push_back(&output);
  return out;
}

template <typename T>
std::vector<LinearLayer<T>*> SirenModel<T>::layers() {
  std::vector<LinearLayer<T>*> out{&input};
  for (auto& h : hidden) out.push_back(&h);
  out.push_back(&output);
  return out;
}

template <typename T>
template <typename U>
SirenModel<U> SirenModel<T>::cast() const {
  SirenModel<U> out;
  out.shape = shape;
  out.input = input.template cast<U>();
  for (const auto& h : hidden) out.hidden.push_back(h.template cast<U>());
  out.output = output.template cast<U>();
  return out;
}

template <typename T>
std::vector<ChainLink<T>> MinrModel<T>::chain(std::size_t image_id) {
  if (image_id >= per_image.size())
    throw ConfigError("minr: image id " + std::to_string(image_id) + " out of range");
  auto& img = per_image[image_id];
  std::vector<ChainLink<T>> out{{&img.input, -1}};
  if (img.projection) out.push_back({&*img.projection, -1});
  std::size_t next_shared = 0;
  std::size_t next_private = 0;
  for (std::size_t p = 1; p <= config.shape.n_intermediate; ++p) {
    if (config.is_shared(p)) {
      out.push_back({&shared[next_shared], int(next_shared)});
      ++next_shared;
    } else {
      out.push_back({&img.private_layers[next_private++], -1});
    }
  }
  out.push_back({&img.output, -1});
  return out;
}

template <typename T>
std::vector<const LinearLayer<T>*> MinrModel<T>::chain(std::size_t image_id) const {
  auto links = const_cast<MinrModel<T>*>(this)->chain(image_id);
  std::vector<const LinearLayer<T>*> out;
  out.reserve(links.size());
  for (const auto& l : links) out.push_back(l.layer);
  return out;
}

template <typename T>
template <typename U>
MinrModel<U> MinrModel<T>::cast() const {
  MinrModel<U> out;
  out.config = config;
  for (const auto& s : shared) out.shared.push_back(s.template cast<U>());
  for (const auto& img : per_image) {
    ImageLayers<U> c;
    c.input = img.input.template cast<U>();
    if (img.projection) c.projection = img.projection->template cast<U>();
    for (const auto& p : img.private_layers) c.private_layers.push_back(p.template cast<U>());
    c.output = img.output.template cast<U>();
    out.per_image.push_back(std::move(c));
  }
  return out;
}

namespace {

template <typename T>
LinearLayer<T> make_layer(std::size_t in, std::size_t out, double bound, Rng& rng) {
  LinearLayer<T> layer(in, out);
  for (auto& w : layer.weight.data()) w = static_cast<T>(rng.uniform(-bound, bound));
  return layer;
}

// Input layers ~ U(-1/d_in, 1/d_in); every later layer ~ U(+-sqrt(6/fan_in)),
// divided by omega0 for the sinusoidal families.
double input_bound(const NetworkShape& s) { return 1.0 / double(s.d_in); }
double hidden_bound(const NetworkShape& s, std::size_t fan_in) {
  const double b = std::sqrt(6.0 / double(fan_in));
  return is_sinusoidal(s.activation) ? b / init_frequency(s.activation) : b;
}

}  // namespace

template <typename T>
SirenModel<T> init_siren(const NetworkShape& shape, std::uint64_t seed) {
  shape.validate();
  Rng rng(seed);
  SirenModel<T> m;
  m.shape = shape;
  m.input = make_layer<T>(shape.d_in, shape.width, input_bound(shape), rng);
  for (std::size_t i = 0; i < shape.n_intermediate; ++i)
    m.hidden.push_back(make_layer<T>(shape.width, shape.width, hidden_bound(shape, shape.width), rng));
  m.output = make_layer<T>(shape.width, shape.d_out, hidden_bound(shape, shape.width), rng);
  return m;
}

template <typename T>
MinrModel<T> init_minr(const MinrConfig& config, std::uint64_t seed) {
  config.validate();
  const auto& s = config.shape;
  const double hb = hidden_bound(s, s.width);
  MinrModel<T> m;
  m.config = config;
  Rng shared_rng(shared_seed(seed));
  for (std::size_t i = 0; i < config.share_mask.size(); ++i)
    m.shared.push_back(make_layer<T>(s.width, s.width, hb, shared_rng));
  for (std::size_t id = 0; id < config.n_images; ++id) {
    Rng rng(image_seed(seed, id));
    ImageLayers<T> img;
    img.input = make_layer<T>(s.d_in, s.width, input_bound(s), rng);
    if (config.use_projection) img.projection = make_layer<T>(s.width, s.width, hb, rng);
    for (std::size_t p = 1; p <= s.n_intermediate; ++p)
      if (!config.is_shared(p)) img.private_layers.push_back(make_layer<T>(s.width, s.width, hb, rng));
    img.output = make_layer<T>(s.width, s.d_out, hb, rng);
    m.per_image.push_back(std::move(img));
  }
  return m;
}

template <typename T>
void forward_chain(std::span<const LinearLayer<T>* const> layers, const ActivationKind& activation,
                   const Tensor2D<T>& x, ForwardCache<T>& cache) {
  const detail::FlushSubnormals flush;
  require_shape(!layers.empty(), "forward: empty network");
  const std::size_t n_hidden = layers.size() - 1;
  cache.post.resize(n_hidden);
  cache.deriv.resize(n_hidden);
  const Tensor2D<T>* in = &x;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    linear_forward_into(*layers[l], *in, cache.linear);
    activate_with_derivative(activation, cache.linear, cache.post[l], cache.deriv[l]);
    in = &cache.post[l];
  }
  linear_forward_into(*layers.back(), *in, cache.output);
}

// Inference pass: no cache, no derivatives.
template <typename T>
Tensor2D<T> forward_only(std::span<const LinearLayer<T>* const> layers, const ActivationKind& activation,
                         const Tensor2D<T>& x) {
  const detail::FlushSubnormals flush;
  require_shape(!layers.empty(), "forward: empty network");
  Tensor2D<T> a, b;
  const Tensor2D<T>* in = &x;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    linear_forward_into(*layers[l], *in, a);
    activate_into(activation, a, b);
    in = &b;
  }
  linear_forward_into(*layers.back(), *in, a);
  return a;
}

template <typename T>
void backward_chain(std::span<const LinearLayer<T>* const> layers, const Tensor2D<T>& x, const ForwardCache<T>& cache,
                    const Tensor2D<T>& grad_output, std::span<const GradSink<T>> sinks, BackwardWorkspace<T>& ws) {
  const detail::FlushSubnormals flush;
  require_shape(sinks.size() == layers.size(), "backward: one gradient sink per layer");
  const Tensor2D<T>* upstream = &grad_output;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Tensor2D<T>& in = l == 0 ? x : cache.post[l - 1];
    if (l == 0) {
      linear_backward_into(*layers[l], in, *upstream, *sinks[l].weight, *sinks[l].bias,
                           static_cast<Tensor2D<T>*>(nullptr));
      break;
    }
    linear_backward_into(*layers[l], in, *upstream, *sinks[l].weight, *sinks[l].bias, &ws.grad_input);
    require_shape(cache.deriv[l - 1].size() == ws.grad_input.size(), "backward: cache does not match the chain");
    ws.grad_input.mat().array() *= cache.deriv[l - 1].mat().array();
    std::swap(ws.grad, ws.grad_input);
    upstream = &ws.grad;
  }
}

template <typename T>
Tensor2D<T> forward_siren(const SirenModel<T>& model, const Tensor2D<T>& coords) {
  require_shape(coords.rows() == model.shape.d_in, "forward_siren: coords must be d_in x batch");
  return forward_only<T>(model.layers(), model.shape.activation, coords);
}

template <typename T>
Tensor2D<T> forward_minr(const MinrModel<T>& model, std::size_t image_id, const Tensor2D<T>& coords) {
  require_shape(coords.rows() == model.config.shape.d_in, "forward_minr: coords must be d_in x batch");
  return forward_only<T>(model.chain(image_id), model.config.shape.activation, coords);
}

template <typename T>
SirenModel<T> assemble_image_network(const MinrModel<T>& model, std::size_t image_id) {
  const auto layers = model.chain(image_id);
  SirenModel<T> out;
  out.shape = model.config.shape;
  out.shape.n_intermediate = layers.size() - 2;
  out.input = *layers.front();
  for (std::size_t l = 1; l + 1 < layers.size(); ++l) out.hidden.push_back(*layers[l]);
  out.output = *layers.back();
  return out;
}

template <typename T>
MinrModel<T> pack_separate(std::span<const SirenModel<T>> models) {
  if (models.empty()) throw ConfigError("pack_separate: no models");
  MinrModel<T> out;
  out.config.shape = models.front().shape;
  out.config.n_images = models.size();
  out.config.use_projection = false;
  for (const auto& m : models) {
    if (m.shape.width != out.config.shape.width || m.shape.d_in != out.config.shape.d_in ||
        m.shape.n_intermediate != out.config.shape.n_intermediate || m.shape.d_out != out.config.shape.d_out)
      throw ConfigError("pack_separate: models must share one shape");
    ImageLayers<T> img;
    img.input = m.input;
    img.private_layers = m.hidden;
    img.output = m.output;
    out.per_image.push_back(std::move(img));
  }
  return out;
}

std::size_t param_count(const NetworkShape& s) {
  const std::size_t w = s.width;
  return (s.d_in * w + w) + s.n_intermediate * (w * w + w) + (w * s.d_out + s.d_out);
}

std::size_t param_count(const MinrConfig& c) {
  c.validate();
  const auto& s = c.shape;
  const std::size_t w = s.width;
  const std::size_t square = w * w + w;
  const std::size_t per_image =
      (s.d_in * w + w) + (c.use_projection ? square : 0) + c.n_private() * square + (w * s.d_out + s.d_out);
  return c.n_images * per_image + c.share_mask.size() * square;
}

std::size_t param_count_separate(const NetworkShape& shape, std::size_t n_images) {
  return n_images * param_count(shape);
}

template <typename T>
std::size_t param_count(const SirenModel<T>& model) {
  std::size_t n = 0;
  for (const auto* l : model.layers()) n += l->param_count();
  return n;
}

template <typename T>
std::size_t param_count(const MinrModel<T>& model) {
  std::size_t n = 0;
  for (const auto& l : model.shared) n += l.param_count();
  for (const auto& img : model.per_image) {
    n += img.input.param_count() + img.output.param_count();
    if (img.projection) n += img.projection->param_count();
    for (const auto& p : img.private_layers) n += p.param_count();
  }
  return n;
}

#define MINR_INSTANTIATE(T)                                                                                     \
  template struct SirenModel<T>;                                                                                \
  template struct MinrModel<T>;                                                                                 \
  template SirenModel<T> init_siren<T>(const NetworkShape&, std::uint64_t);                                   \
  template MinrModel<T> init_minr<T>(const MinrConfig&, std::uint64_t);                                       \
  template void forward_chain<T>(std::span<const LinearLayer<T>* const>, const ActivationKind&,             \
                                 const Tensor2D<T>&, ForwardCache<T>&);                                       \
  template void backward_chain<T>(std::span<const LinearLayer<T>* const>, const Tensor2D<T>&,              \
                                  const ForwardCache<T>&, const Tensor2D<T>&,            \
                                  std::span<const GradSink<T>>, BackwardWorkspace<T>&);                        \
  template Tensor2D<T> forward_siren<T>(const SirenModel<T>&, const Tensor2D<T>&);                            \
  template Tensor2D<T> forward_minr<T>(const MinrModel<T>&, std::size_t, const Tensor2D<T>&);                 \
  template SirenModel<T> assemble_image_network<T>(const MinrModel<T>&, std::size_t);                         \
  template MinrModel<T> pack_separate<T>(std::span<const SirenModel<T>>);                                     \
  template std::size_t param_count<T>(const SirenModel<T>&);                                                   \
  template std::size_t param_count<T>(const MinrModel<T>&);

MINR_INSTANTIATE(float)
MINR_INSTANTIATE(double)
#undef MINR_INSTANTIATE

template SirenModel<double> SirenModel<float>::cast<double>() const;
template SirenModel<float> SirenModel<double>::cast<float>() const;
template MinrModel<double> MinrModel<float>::cast<double>() const;
template MinrModel<float> MinrModel<double>::cast<float>() const;

}  // namespace minr
