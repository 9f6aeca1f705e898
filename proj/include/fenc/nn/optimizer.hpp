#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "fenc/nn/types.hpp"

namespace fenc::nn {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double unbounded = std::numeric_limits<double>::infinity();

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double max_grad_norm = 1.0;  // `unbounded` disables clipping

  void validate() const {
    if (!(learning_rate > 0)) throw std::invalid_argument("AdamConfig: learning_rate must be > 0");
    if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1))
      throw std::invalid_argument("AdamConfig: betas must lie in (0, 1)");
    if (!(epsilon > 0)) throw std::invalid_argument("AdamConfig: epsilon must be > 0");
    if (!(max_grad_norm > 0)) throw std::invalid_argument("AdamConfig: max_grad_norm must be > 0");
  }
};

template <typename Scalar>
struct OptimizerState {
  AdamConfig config;
  ParameterBlock<Scalar> first_moment;
  ParameterBlock<Scalar> second_moment;
  std::int64_t step = 0;

  static OptimizerState create(const Architecture& arch, AdamConfig cfg = {}) {
    cfg.validate();
    return {cfg, ParameterBlock<Scalar>::zeros(arch), ParameterBlock<Scalar>::zeros(arch), 0};
  }
};

template <typename Scalar>
Scalar global_norm(const GradientBlock<Scalar>& grads) {
  using std::sqrt;
  return sqrt(grads.squared_norm());
}

/// Rescales grads so the global L2 norm is at most max_norm; direction is kept.
template <typename Scalar>
GradientBlock<Scalar> clip_gradients(GradientBlock<Scalar> grads, double max_norm) {
  if (!(max_norm > 0)) throw std::invalid_argument("clip_gradients: max_norm must be > 0");
  if (std::isinf(max_norm)) return grads;
  const Scalar norm = global_norm(grads);
  if (norm > static_cast<Scalar>(max_norm)) grads *= static_cast<Scalar>(max_norm) / norm;
  return grads;
}

/// One bias-corrected adaptive-moment update (gradient clipped first).
/// Non-finite gradients leave both params and state untouched.
template <typename Scalar>
void optimizer_step(OptimizerState<Scalar>& state, ParameterBlock<Scalar>& params,
                    const GradientBlock<Scalar>& grads) {
  if (!params.same_shape(grads) || !params.same_shape(state.first_moment))
    throw std::invalid_argument("optimizer_step: shape mismatch");
  if (!grads.all_finite()) throw NumericalError("optimizer_step: non-finite gradient");

  const auto clipped = clip_gradients(grads, state.config.max_grad_norm);
  const Scalar b1 = static_cast<Scalar>(state.config.beta1);
  const Scalar b2 = static_cast<Scalar>(state.config.beta2);
  const std::int64_t t = state.step + 1;
  using std::pow;
  const Scalar correction1 = Scalar(1) - pow(b1, static_cast<Scalar>(t));
  const Scalar correction2 = Scalar(1) - pow(b2, static_cast<Scalar>(t));
  const Scalar lr = static_cast<Scalar>(state.config.learning_rate);
  const Scalar eps = static_cast<Scalar>(state.config.epsilon);

  auto updated = params;
  auto m = state.first_moment;
  auto v = state.second_moment;
  for (std::size_t k = 0; k < params.tensors.size(); ++k) {
    const auto& g = clipped.tensors[k];
    m.tensors[k] = b1 * m.tensors[k] + (Scalar(1) - b1) * g;
    v.tensors[k] = b2 * v.tensors[k] + (Scalar(1) - b2) * g.cwiseAbs2();
    updated.tensors[k].array() -=
        lr * (m.tensors[k].array() / correction1) /
        ((v.tensors[k].array() / correction2).sqrt() + eps);
  }
  if (!updated.all_finite()) throw NumericalError("optimizer_step: parameters became non-finite");
  params = std::move(updated);
  state.first_moment = std::move(m);
  state.second_moment = std::move(v);
  state.step = t;
}

}  // namespace fenc::nn
