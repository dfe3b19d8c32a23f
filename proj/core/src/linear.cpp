#include "minr/linear.hpp"

#include "fpenv.hpp"

namespace minr {

template <typename T>
void linear_forward_into(const LinearLayer<T>& layer, const Tensor2D<T>& x, Tensor2D<T>& out) {
  const detail::FlushSubnormals flush;
  require_shape(x.rows() == layer.in_dim(), "linear_forward: input rows must equal layer in_dim");
  out.resize(layer.out_dim(), x.cols());
  auto y = out.mat();
  y.noalias() = layer.weight.mat() * x.mat();
  y.colwise() += layer.bias.mat().col(0);
  require_finite(out, "linear_forward");
}

template <typename T>
Tensor2D<T> linear_forward(const LinearLayer<T>& layer, const Tensor2D<T>& x) {
  Tensor2D<T> out;
  linear_forward_into(layer, x, out);
  return out;
}

template <typename T>
void linear_backward_into(const LinearLayer<T>& layer, const Tensor2D<T>& x, const Tensor2D<T>& upstream,
                          Tensor2D<T>& grad_weight, Tensor2D<T>& grad_bias, Tensor2D<T>* grad_input) {
  const detail::FlushSubnormals flush;
  require_shape(x.rows() == layer.in_dim(), "linear_backward: input rows must equal layer in_dim");
  require_shape(upstream.rows() == layer.out_dim() && upstream.cols() == x.cols(),
                "linear_backward: upstream must be out_dim x batch");
  require_shape(grad_weight.rows() == layer.out_dim() && grad_weight.cols() == layer.in_dim() &&
                    grad_bias.rows() == layer.out_dim() && grad_bias.cols() == 1,
                "linear_backward: accumulator shapes must match the layer");
  require_finite(upstream, "linear_backward upstream");
  grad_weight.mat().noalias() += upstream.mat() * x.mat().transpose();
  grad_bias.mat().col(0) += upstream.mat().rowwise().sum();
  if (grad_input) {
    grad_input->resize(layer.in_dim(), x.cols());
    grad_input->mat().noalias() = layer.weight.mat().transpose() * upstream.mat();
  }
}

template <typename T>
Tensor2D<T> linear_backward(LinearLayer<T>& layer, const Tensor2D<T>& x, const Tensor2D<T>& upstream) {
  Tensor2D<T> grad_input;
  linear_backward_into(layer, x, upstream, layer.grad_weight, layer.grad_bias, &grad_input);
  return grad_input;
}

template <typename T>
double mse_value(const Tensor2D<T>& pred, const Tensor2D<T>& target) {
  require_shape(pred.rows() == target.rows() && pred.cols() == target.cols(), "mse_loss: shape mismatch");
  const auto p = pred.data();
  const auto t = target.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = double(p[i]) - double(t[i]);
    sum += d * d;
  }
  return p.empty() ? 0.0 : sum / double(p.size());
}

template <typename T>
MseResult<T> mse_loss(const Tensor2D<T>& pred, const Tensor2D<T>& target) {
  const detail::FlushSubnormals flush;
  MseResult<T> out;
  out.loss = mse_value(pred, target);
  out.grad.resize(pred.rows(), pred.cols());
  const T scale = T(2) / T(pred.size() ? pred.size() : 1);
  out.grad.mat() = (pred.mat() - target.mat()) * scale;
  require_finite(out.grad, "mse_loss");
  return out;
}

template Tensor2D<float> linear_forward(const LinearLayer<float>&, const Tensor2D<float>&);
template Tensor2D<double> linear_forward(const LinearLayer<double>&, const Tensor2D<double>&);
template void linear_forward_into(const LinearLayer<float>&, const Tensor2D<float>&, Tensor2D<float>&);
template void linear_forward_into(const LinearLayer<double>&, const Tensor2D<double>&, Tensor2D<double>&);
template Tensor2D<float> linear_backward(LinearLayer<float>&, const Tensor2D<float>&, const Tensor2D<float>&);
template Tensor2D<double> linear_backward(LinearLayer<double>&, const Tensor2D<double>&, const Tensor2D<double>&);
template void linear_backward_into(const LinearLayer<float>&, const Tensor2D<float>&, const Tensor2D<float>&,
                                   Tensor2D<float>&, Tensor2D<float>&, Tensor2D<float>*);
template void linear_backward_into(const LinearLayer<double>&, const Tensor2D<double>&, const Tensor2D<double>&,
                                   Tensor2D<double>&, Tensor2D<double>&, Tensor2D<double>*);
template MseResult<float> mse_loss(const Tensor2D<float>&, const Tensor2D<float>&);
template MseResult<double> mse_loss(const Tensor2D<double>&, const Tensor2D<double>&);
template double mse_value(const Tensor2D<float>&, const Tensor2D<float>&);
template double mse_value(const Tensor2D<double>&, const Tensor2D<double>&);

}  // namespace minr
