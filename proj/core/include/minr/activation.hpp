#pragma once

#include <string>
#include <variant>

#include "minr/tensor.hpp"

namespace minr {

struct Sine {
  double omega0 = 30.0;
};
struct Gauss {
  double s = 10.0;
};
// Real-valued Gabor wavelet: cos(omega0 x) * exp(-(s0 x)^2).
struct Wire {
  double omega0 = 20.0;
  double s0 = 10.0;
};
struct Finer {
  double omega0 = 30.0;
};
struct Identity {};

using ActivationKind = std::variant<Sine, Gauss, Wire, Finer, Identity>;

// Stable 1-byte tags used by the checkpoint header.
enum class ActivationTag : unsigned char { Sine = 0, Gauss = 1, Wire = 2, Finer = 3, Identity = 4 };

ActivationTag activation_tag(const ActivationKind& kind);
std::string activation_name(const ActivationKind& kind);

// Frequency used by the SIREN-style init scale; 1 for kinds without one.
double init_frequency(const ActivationKind& kind);
bool is_sinusoidal(const ActivationKind& kind);

// Throws ConfigError when a frequency or bandwidth is not strictly positive.
void validate(const ActivationKind& kind);

struct ActivationParams {
  double omega0 = 0.0;  // 0 means "use the backbone default"
  double gauss_s = 0.0;
  double wire_s0 = 0.0;
};

// Builds a kind from a CLI name {sine, gauss, wire, finer, identity}.
ActivationKind make_activation(const std::string& name, const ActivationParams& params = {});

// The pair of hyperparameters serialized for each kind.
std::pair<double, double> activation_hyperparameters(const ActivationKind& kind);
ActivationKind activation_from_tag(ActivationTag tag, double p0, double p1);

template <typename T>
Tensor2D<T> activate(const ActivationKind& kind, const Tensor2D<T>& x);

template <typename T>
Tensor2D<T> activate_derivative(const ActivationKind& kind, const Tensor2D<T>& x);

template <typename T>
void activate_into(const ActivationKind& kind, const Tensor2D<T>& x, Tensor2D<T>& out);

// out <- sigma(x) and deriv <- sigma'(x) in one pass; the training forward
// pass keeps deriv so backward is a single multiply.
template <typename T>
void activate_with_derivative(const ActivationKind& kind, const Tensor2D<T>& x, Tensor2D<T>& out,
                              Tensor2D<T>& deriv);

// grad <- grad * sigma'(pre), elementwise.
template <typename T>
void scale_by_derivative(const ActivationKind& kind, const Tensor2D<T>& pre, Tensor2D<T>& grad);

}  // namespace minr
