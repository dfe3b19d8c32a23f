#pragma once

#include <cstddef>

#include "minr/tensor.hpp"

namespace minr {

// Affine layer y = W x + b with additive gradient accumulators.
template <typename T>
struct LinearLayer {
  Tensor2D<T> weight;       // out_dim x in_dim
  Tensor2D<T> bias;         // out_dim x 1
  Tensor2D<T> grad_weight;  // same shape as weight
  Tensor2D<T> grad_bias;    // same shape as bias

  LinearLayer() = default;
  LinearLayer(std::size_t in_dim, std::size_t out_dim)
      : weight(out_dim, in_dim), bias(out_dim, 1), grad_weight(out_dim, in_dim), grad_bias(out_dim, 1) {}

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
  std::size_t param_count() const { return weight.size() + bias.size(); }

  void zero_grad() {
    grad_weight.fill(T(0));
    grad_bias.fill(T(0));
  }

  template <typename U>
  LinearLayer<U> cast() const {
    LinearLayer<U> out;
    out.weight = weight.template cast<U>();
    out.bias = bias.template cast<U>();
    out.grad_weight = grad_weight.template cast<U>();
    out.grad_bias = grad_bias.template cast<U>();
    return out;
  }
};

template <typename T>
Tensor2D<T> linear_forward(const LinearLayer<T>& layer, const Tensor2D<T>& x);

// Writes W x + b into `out`, reusing its storage.
template <typename T>
void linear_forward_into(const LinearLayer<T>& layer, const Tensor2D<T>& x, Tensor2D<T>& out);

// Accumulates into layer.grad_weight / layer.grad_bias and returns W^T upstream.
template <typename T>
Tensor2D<T> linear_backward(LinearLayer<T>& layer, const Tensor2D<T>& x, const Tensor2D<T>& upstream);

// Same contract with caller-owned accumulators. grad_input may be null when
// the input gradient is not needed (first layer of a network).
template <typename T>
void linear_backward_into(const LinearLayer<T>& layer, const Tensor2D<T>& x, const Tensor2D<T>& upstream,
                          Tensor2D<T>& grad_weight, Tensor2D<T>& grad_bias, Tensor2D<T>* grad_input);

template <typename T>
struct MseResult {
  double loss = 0.0;
  Tensor2D<T> grad;
};

template <typename T>
MseResult<T> mse_loss(const Tensor2D<T>& pred, const Tensor2D<T>& target);

// Loss-only variant, summed in index order.
template <typename T>
double mse_value(const Tensor2D<T>& pred, const Tensor2D<T>& target);

}  // namespace minr
