#include "minr/activation.hpp"

#include <cmath>
#include <type_traits>

#include "fpenv.hpp"

namespace minr {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

template <typename T>
using Array = Eigen::Array<T, Eigen::Dynamic, 1>;

template <typename T>
Eigen::Map<const Array<T>> flat(const Tensor2D<T>& t) {
  return {t.data().data(), Eigen::Index(t.size())};
}

template <typename T>
Eigen::Map<Array<T>> flat(Tensor2D<T>& t) {
  return {t.data().data(), Eigen::Index(t.size())};
}

// sin/cos of arg(i) for i < n, handed to emit(i, sin, cos). The float
// path is branch-free so it vectorizes: quadrant reduction by pi/2 in three
// parts, then minimax polynomials on [-pi/4, pi/4]. Arguments beyond the
// reduction's accurate range (or non-finite) are redone with std::sin/cos.
template <typename T, class ArgFn, class EmitFn>
void sincos_loop(std::size_t n, ArgFn arg, EmitFn emit) {
  if constexpr (std::is_same_v<T, float>) {
    constexpr float kLimit = 8192.0f;
    constexpr float kTwoOverPi = 0.636619772367581343f;
    constexpr float kRound = 12582912.0f;  // 1.5 * 2^23
    constexpr float kP1 = 1.5703125f, kP2 = 4.837512969970703125e-4f, kP3 = 7.54978995489188216e-8f;
    int bad = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const float a = arg(i);
      const bool out_of_range = !(std::fabs(a) <= kLimit);
      bad |= int(out_of_range);
      const float x = out_of_range ? 0.0f : a;
      const float k = (x * kTwoOverPi + kRound) - kRound;
      const int q = int(k);
      const float r = ((x - k * kP1) - k * kP2) - k * kP3;
      const float z = r * r;
      const float s = r + r * z * (-1.6666654611e-1f + z * (8.3321608736e-3f + z * -1.9515295891e-4f));
      const float c = 1.0f - 0.5f * z +
                      z * z * (4.166664568298827e-2f + z * (-1.388731625493765e-3f + z * 2.443315711809948e-5f));
      const bool swap = (q & 1) != 0;
      float sv = swap ? c : s;
      float cv = swap ? s : c;
      sv = (q & 2) ? -sv : sv;
      cv = ((q + 1) & 2) ? -cv : cv;
      emit(i, sv, cv);
    }
    if (bad) {
      for (std::size_t i = 0; i < n; ++i) {
        const float a = arg(i);
        if (!(std::fabs(a) <= kLimit)) emit(i, std::sin(a), std::cos(a));
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const T a = arg(i);
      emit(i, std::sin(a), std::cos(a));
    }
  }
}

}  // namespace

ActivationTag activation_tag(const ActivationKind& kind) {
  return std::visit(Overloaded{[](const Sine&) { return ActivationTag::Sine; },
                               [](const Gauss&) { return ActivationTag::Gauss; },
                               [](const Wire&) { return ActivationTag::Wire; },
                               [](const Finer&) { return ActivationTag::Finer; },
                               [](const Identity&) { return ActivationTag::Identity; }},
                    kind);
}

std::string activation_name(const ActivationKind& kind) {
  switch (activation_tag(kind)) {
    case ActivationTag::Sine: return "sine";
    case ActivationTag::Gauss: return "gauss";
    case ActivationTag::Wire: return "wire";
    case ActivationTag::Finer: return "finer";
    case ActivationTag::Identity: return "identity";
  }
  return "unknown";
}

double init_frequency(const ActivationKind& kind) {
  if (const auto* s = std::get_if<Sine>(&kind)) return s->omega0;
  if (const auto* f = std::get_if<Finer>(&kind)) return f->omega0;
  return 1.0;
}

bool is_sinusoidal(const ActivationKind& kind) {
  return std::holds_alternative<Sine>(kind) || std::holds_alternative<Finer>(kind);
}

void validate(const ActivationKind& kind) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("activation: ") + what + " must be > 0");
  };
  std::visit(Overloaded{[&](const Sine& a) { positive(a.omega0, "omega0"); },
                        [&](const Gauss& a) { positive(a.s, "s"); },
                        [&](const Wire& a) {
                          positive(a.omega0, "omega0");
                          positive(a.s0, "s0");
                        },
                        [&](const Finer& a) { positive(a.omega0, "omega0"); }, [](const Identity&) {}},
             kind);
}

ActivationKind make_activation(const std::string& name, const ActivationParams& p) {
  ActivationKind kind;
  if (name == "sine") {
    kind = Sine{p.omega0 > 0 ? p.omega0 : Sine{}.omega0};
  } else if (name == "gauss") {
    kind = Gauss{p.gauss_s > 0 ? p.gauss_s : Gauss{}.s};
  } else if (name == "wire") {
    kind = Wire{p.omega0 > 0 ? p.omega0 : Wire{}.omega0, p.wire_s0 > 0 ? p.wire_s0 : Wire{}.s0};
  } else if (name == "finer") {
    kind = Finer{p.omega0 > 0 ? p.omega0 : Finer{}.omega0};
  } else if (name == "identity") {
    kind = Identity{};
  } else {
    throw ConfigError("unknown activation '" + name + "'");
  }
  validate(kind);
  return kind;
}

std::pair<double, double> activation_hyperparameters(const ActivationKind& kind) {
  return std::visit(Overloaded{[](const Sine& a) { return std::pair{a.omega0, 0.0}; },
                               [](const Gauss& a) { return std::pair{a.s, 0.0}; },
                               [](const Wire& a) { return std::pair{a.omega0, a.s0}; },
                               [](const Finer& a) { return std::pair{a.omega0, 0.0}; },
                               [](const Identity&) { return std::pair{0.0, 0.0}; }},
                    kind);
}

ActivationKind activation_from_tag(ActivationTag tag, double p0, double p1) {
  ActivationKind kind;
  switch (tag) {
    case ActivationTag::Sine: kind = Sine{p0}; break;
    case ActivationTag::Gauss: kind = Gauss{p0}; break;
    case ActivationTag::Wire: kind = Wire{p0, p1}; break;
    case ActivationTag::Finer: kind = Finer{p0}; break;
    case ActivationTag::Identity: kind = Identity{}; break;
    default: throw FormatError("unknown activation tag");
  }
  validate(kind);
  return kind;
}

template <typename T>
void activate_into(const ActivationKind& kind, const Tensor2D<T>& x, Tensor2D<T>& out) {
  const detail::FlushSubnormals flush;
  require_finite(x, "activate input");
  out.resize(x.rows(), x.cols());
  const auto in = flat(x);
  auto y = flat(out);
  std::visit(Overloaded{[&](const Sine& a) { y = (T(a.omega0) * in).sin(); },
                        [&](const Gauss& a) { y = (-(T(a.s) * in).square()).exp(); },
                        [&](const Wire& a) { y = (T(a.omega0) * in).cos() * (-(T(a.s0) * in).square()).exp(); },
                        [&](const Finer& a) { y = (T(a.omega0) * (in.abs() + T(1)) * in).sin(); },
                        [&](const Identity&) { y = in; }},
             kind);
}

template <typename T>
void activate_with_derivative(const ActivationKind& kind, const Tensor2D<T>& x, Tensor2D<T>& out,
                              Tensor2D<T>& deriv) {
  const detail::FlushSubnormals flush;
  require_finite(x, "activate input");
  out.resize(x.rows(), x.cols());
  deriv.resize(x.rows(), x.cols());
  const std::size_t n = x.size();
  const T* in = x.data().data();
  T* y = out.data().data();
  T* d = deriv.data().data();
  std::visit(Overloaded{[&](const Sine& a) {
                          const T w = T(a.omega0);
                          sincos_loop<T>(n, [&](std::size_t i) { return w * in[i]; },
                                         [&](std::size_t i, T s, T c) {
                                           y[i] = s;
                                           d[i] = w * c;
                                         });
                        },
                        [&](const Gauss& a) {
                          const T s = T(a.s);
                          const auto xs = flat(x);
                          flat(out) = (-(s * xs).square()).exp();
                          flat(deriv) = T(-2) * s * s * xs * flat(out);
                        },
                        [&](const Wire& a) {
                          const T w = T(a.omega0);
                          const T s0 = T(a.s0);
                          thread_local Array<T> env;
                          env = (-(s0 * flat(x)).square()).exp();
                          sincos_loop<T>(n, [&](std::size_t i) { return w * in[i]; },
                                         [&](std::size_t i, T s, T c) {
                                           const T envelope = env[Eigen::Index(i)];
                                           y[i] = c * envelope;
                                           d[i] = (-w * s - T(2) * s0 * s0 * in[i] * c) * envelope;
                                         });
                        },
                        [&](const Finer& a) {
                          const T w = T(a.omega0);
                          sincos_loop<T>(n, [&](std::size_t i) { return w * (std::fabs(in[i]) + T(1)) * in[i]; },
                                         [&](std::size_t i, T s, T c) {
                                           y[i] = s;
                                           d[i] = c * w * (T(2) * std::fabs(in[i]) + T(1));
                                         });
                        },
                        [&](const Identity&) {
                          for (std::size_t i = 0; i < n; ++i) {
                            y[i] = in[i];
                            d[i] = T(1);
                          }
                        }},
             kind);
}

template <typename T>
Tensor2D<T> activate(const ActivationKind& kind, const Tensor2D<T>& x) {
  Tensor2D<T> out;
  activate_into(kind, x, out);
  return out;
}

template <typename T>
void scale_by_derivative(const ActivationKind& kind, const Tensor2D<T>& pre, Tensor2D<T>& grad) {
  const detail::FlushSubnormals flush;
  require_shape(pre.rows() == grad.rows() && pre.cols() == grad.cols(), "activation backward: shape mismatch");
  const auto x = flat(pre);
  auto g = flat(grad);
  std::visit(Overloaded{[&](const Sine& a) {
                          const T w = T(a.omega0);
                          g *= w * (w * x).cos();
                        },
                        [&](const Gauss& a) {
                          const T s = T(a.s);
                          g *= T(-2) * s * s * x * (-(s * x).square()).exp();
                        },
                        [&](const Wire& a) {
                          const T w = T(a.omega0);
                          const T s0 = T(a.s0);
                          const auto envelope = (-(s0 * x).square()).exp();
                          g *= (-w * (w * x).sin() - T(2) * s0 * s0 * x * (w * x).cos()) * envelope;
                        },
                        [&](const Finer& a) {
                          const T w = T(a.omega0);
                          const auto ax = x.abs();
                          g *= (w * (ax + T(1)) * x).cos() * w * (T(2) * ax + T(1));
                        },
                        [](const Identity&) {}},
             kind);
}

template <typename T>
Tensor2D<T> activate_derivative(const ActivationKind& kind, const Tensor2D<T>& x) {
  require_finite(x, "activate_derivative input");
  Tensor2D<T> out(x.rows(), x.cols(), T(1));
  scale_by_derivative(kind, x, out);
  return out;
}

template Tensor2D<float> activate(const ActivationKind&, const Tensor2D<float>&);
template Tensor2D<double> activate(const ActivationKind&, const Tensor2D<double>&);
template Tensor2D<float> activate_derivative(const ActivationKind&, const Tensor2D<float>&);
template Tensor2D<double> activate_derivative(const ActivationKind&, const Tensor2D<double>&);
template void activate_into(const ActivationKind&, const Tensor2D<float>&, Tensor2D<float>&);
template void activate_into(const ActivationKind&, const Tensor2D<double>&, Tensor2D<double>&);
template void activate_with_derivative(const ActivationKind&, const Tensor2D<float>&, Tensor2D<float>&,
                                       Tensor2D<float>&);
template void activate_with_derivative(const ActivationKind&, const Tensor2D<double>&, Tensor2D<double>&,
                                       Tensor2D<double>&);
template void scale_by_derivative(const ActivationKind&, const Tensor2D<float>&, Tensor2D<float>&);
template void scale_by_derivative(const ActivationKind&, const Tensor2D<double>&, Tensor2D<double>&);

}  // namespace minr
