#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "minr/activation.hpp"
#include "minr/linear.hpp"

namespace minr {

struct NetworkShape {
  std::size_t d_in = 2;
  std::size_t width = 256;
  std::size_t n_intermediate = 3;
  std::size_t d_out = 3;
  ActivationKind activation = Sine{};

  void validate() const;
};

// Number of intermediate positions representable in a checkpoint share bitset.
inline constexpr std::size_t kMaxIntermediate = 64;

struct MinrConfig {
  NetworkShape shape;
  std::size_t n_images = 1;
  bool use_projection = true;
  // 1-based intermediate positions whose parameters are shared, ascending.
  std::vector<std::size_t> share_mask;

  // Every intermediate position shared, projection on.
  static MinrConfig canonical(const NetworkShape& shape, std::size_t n_images);

  bool is_shared(std::size_t position) const;
  std::size_t n_private() const { return shape.n_intermediate - share_mask.size(); }
  void validate() const;
};

template <typename T>
struct SirenModel {
  NetworkShape shape;
  LinearLayer<T> input;
  std::vector<LinearLayer<T>> hidden;
  LinearLayer<T> output;

  std::vector<const LinearLayer<T>*> layers() const;
  std::vector<LinearLayer<T>*> layers();

  template <typename U>
  SirenModel<U> cast() const;
};

template <typename T>
struct ImageLayers {
  LinearLayer<T> input;
  std::optional<LinearLayer<T>> projection;
  // Intermediate positions not in the share mask, ascending.
  std::vector<LinearLayer<T>> private_layers;
  LinearLayer<T> output;
};

// One layer of an image's forward chain and where its parameters live.
template <typename T>
struct ChainLink {
  LinearLayer<T>* layer = nullptr;
  // Index into MinrModel::shared, or -1 for image-specific parameters.
  int shared_index = -1;
};

template <typename T>
struct MinrModel {
  MinrConfig config;
  std::vector<LinearLayer<T>> shared;  // share_mask order
  std::vector<ImageLayers<T>> per_image;

  // Forward-order chain for one image: input, [projection], positions
  // 1..n_intermediate drawn from shared or private storage, output.
  std::vector<ChainLink<T>> chain(std::size_t image_id);
  std::vector<const LinearLayer<T>*> chain(std::size_t image_id) const;

  template <typename U>
  MinrModel<U> cast() const;
};

template <typename T>
SirenModel<T> init_siren(const NetworkShape& shape, std::uint64_t seed);

template <typename T>
MinrModel<T> init_minr(const MinrConfig& config, std::uint64_t seed);

// Activation outputs and derivatives recorded by a training forward pass.
template <typename T>
struct ForwardCache {
  std::vector<Tensor2D<T>> post;   // sigma(z), one per hidden (activated) layer
  std::vector<Tensor2D<T>> deriv;  // sigma'(z)
  Tensor2D<T> linear;              // scratch for the current layer's z
  Tensor2D<T> output;
};

// Affine layers in order; sigma after every layer except the last.
template <typename T>
void forward_chain(std::span<const LinearLayer<T>* const> layers, const ActivationKind& activation,
                   const Tensor2D<T>& x, ForwardCache<T>& cache);

template <typename T>
struct GradSink {
  Tensor2D<T>* weight = nullptr;
  Tensor2D<T>* bias = nullptr;
};

template <typename T>
struct BackwardWorkspace {
  Tensor2D<T> grad;
  Tensor2D<T> grad_input;
};

// Backpropagates grad_output through a chain evaluated by forward_chain,
// accumulating into sinks[l] for each layer l.
template <typename T>
void backward_chain(std::span<const LinearLayer<T>* const> layers, const Tensor2D<T>& x, const ForwardCache<T>& cache,
                    const Tensor2D<T>& grad_output, std::span<const GradSink<T>> sinks, BackwardWorkspace<T>& workspace);

template <typename T>
Tensor2D<T> forward_siren(const SirenModel<T>& model, const Tensor2D<T>& coords);

template <typename T>
Tensor2D<T> forward_minr(const MinrModel<T>& model, std::size_t image_id, const Tensor2D<T>& coords);

// The full forward network of one image as a SIREN; a projection layer
// becomes an extra hidden layer. forward_siren(assemble(m, i), x) equals
// forward_minr(m, i, x).
template <typename T>
SirenModel<T> assemble_image_network(const MinrModel<T>& model, std::size_t image_id);

// Wraps independent SIRENs as a MINR model with an empty share mask and no
// projection, which is structurally the same set of networks.
template <typename T>
MinrModel<T> pack_separate(std::span<const SirenModel<T>> models);

std::size_t param_count(const NetworkShape& shape);
std::size_t param_count(const MinrConfig& config);
std::size_t param_count_separate(const NetworkShape& shape, std::size_t n_images);

template <typename T>
std::size_t param_count(const SirenModel<T>& model);
template <typename T>
std::size_t param_count(const MinrModel<T>& model);

}  // namespace minr
