#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fenc/nn/types.hpp"
#include "fenc/random.hpp"

namespace fenc::nn {

/// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases exactly zero.
/// Deterministic in (arch, seed).
template <typename Scalar = double>
ParameterBlock<Scalar> init_params(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(derive_seed(seed, stream::init));
  auto params = ParameterBlock<Scalar>::zeros(arch);
  for (Index l = 0; l < arch.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(arch.layer_inputs(l)));
    auto& w = params.weight(l);
    for (Index c = 0; c < w.cols(); ++c)
      for (Index r = 0; r < w.rows(); ++r) w(r, c) = static_cast<Scalar>(rng.uniform(-bound, bound));
  }
  return params;
}

namespace detail {

template <typename Scalar>
void apply_activation(Activation act, MatrixX<Scalar>& z) {
  if (act == Activation::tanh)
    z = z.array().tanh().matrix();
  else
    z = z.array().max(Scalar(0)).matrix();
}

inline void check_input(const Architecture& arch, Index rows) {
  if (rows != arch.input_dim) throw std::invalid_argument("forward: input dimension mismatch");
}

}  // namespace detail

/// Layer activations retained from a batched forward pass; column s is sample s.
template <typename Scalar>
struct ForwardTrace {
  std::vector<MatrixX<Scalar>> activations;  // [input, hidden_1, ..., output]

  const MatrixX<Scalar>& output() const { return activations.back(); }
};

template <typename Scalar, typename Derived>
ForwardTrace<Scalar> forward_trace(const ParameterBlock<Scalar>& params, const Architecture& arch,
                                   const Eigen::MatrixBase<Derived>& inputs) {
  detail::check_input(arch, inputs.rows());
  ForwardTrace<Scalar> trace;
  trace.activations.reserve(arch.num_layers() + 1);
  trace.activations.emplace_back(inputs.template cast<Scalar>());
  for (Index l = 0; l < arch.num_layers(); ++l) {
    MatrixX<Scalar> z = params.weight(l) * trace.activations.back();
    z.colwise() += params.bias(l).col(0);
    if (l + 1 < arch.num_layers()) detail::apply_activation(arch.activation, z);
    trace.activations.push_back(std::move(z));
  }
  return trace;
}

/// Batched evaluation: inputs is n x N, result is (b*m) x N.
template <typename Scalar, typename Derived>
MatrixX<Scalar> forward_batch(const ParameterBlock<Scalar>& params, const Architecture& arch,
                              const Eigen::MatrixBase<Derived>& inputs) {
  detail::check_input(arch, inputs.rows());
  MatrixX<Scalar> a = inputs.template cast<Scalar>();
  for (Index l = 0; l < arch.num_layers(); ++l) {
    MatrixX<Scalar> z = params.weight(l) * a;
    z.colwise() += params.bias(l).col(0);
    if (l + 1 < arch.num_layers()) detail::apply_activation(arch.activation, z);
    a = std::move(z);
  }
  return a;
}

/// Basis matrix G (b x m) at a single input x: G(i, j) is head i, output j.
template <typename Scalar, typename Derived>
MatrixX<Scalar> forward(const ParameterBlock<Scalar>& params, const Architecture& arch,
                        const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != 1) throw std::invalid_argument("forward: expected a single input column");
  if (!x.allFinite()) throw std::invalid_argument("forward: non-finite input");
  const MatrixX<Scalar> out = forward_batch(params, arch, x);
  return out.reshaped(arch.num_heads, arch.output_dim);
}

/// Accumulates d(sum_s <upstream_s, out_s>)/d(params) into grads, where
/// upstream is (b*m) x N aligned with trace.output().
template <typename Scalar, typename Derived>
void backward_batch(const ParameterBlock<Scalar>& params, const Architecture& arch,
                    const ForwardTrace<Scalar>& trace, const Eigen::MatrixBase<Derived>& upstream,
                    GradientBlock<Scalar>& grads) {
  if (upstream.rows() != arch.output_units() || upstream.cols() != trace.output().cols())
    throw std::invalid_argument("backward: upstream shape mismatch");
  if (!grads.congruent(arch)) throw std::invalid_argument("backward: gradient block shape mismatch");
  MatrixX<Scalar> delta = upstream;
  for (Index l = arch.num_layers() - 1; l >= 0; --l) {
    const auto& a_in = trace.activations[l];
    grads.weight(l).noalias() += delta * a_in.transpose();
    grads.bias(l).col(0) += delta.rowwise().sum();
    if (l == 0) break;
    MatrixX<Scalar> back = params.weight(l).transpose() * delta;
    if (arch.activation == Activation::tanh)
      back.array() *= Scalar(1) - a_in.array().square();
    else
      back.array() *= (a_in.array() > Scalar(0)).template cast<Scalar>();
    delta = std::move(back);
  }
  grads.accumulated += 1;
}

/// Single-sample backward: upstream is the b x m gradient of some scalar
/// with respect to G(x). Accumulates into grads.
template <typename Scalar, typename DerivedX, typename DerivedU>
void backward(const ParameterBlock<Scalar>& params, const Architecture& arch,
              const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedU>& upstream,
              GradientBlock<Scalar>& grads) {
  if (x.cols() != 1) throw std::invalid_argument("backward: expected a single input column");
  if (upstream.rows() != arch.num_heads || upstream.cols() != arch.output_dim)
    throw std::invalid_argument("backward: upstream must be num_heads x output_dim");
  if (!upstream.allFinite()) throw std::invalid_argument("backward: non-finite upstream gradient");
  const auto trace = forward_trace(params, arch, x);
  const MatrixX<Scalar> flat = upstream.template cast<Scalar>().reshaped(arch.output_units(), 1);
  backward_batch(params, arch, trace, flat, grads);
}

template <typename Scalar, typename DerivedX, typename DerivedU>
GradientBlock<Scalar> backward(const ParameterBlock<Scalar>& params, const Architecture& arch,
                               const Eigen::MatrixBase<DerivedX>& x,
                               const Eigen::MatrixBase<DerivedU>& upstream) {
  auto grads = GradientBlock<Scalar>::zeros(arch);
  backward(params, arch, x, upstream, grads);
  return grads;
}

}  // namespace fenc::nn
