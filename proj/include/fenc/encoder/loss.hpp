#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "fenc/encoder/basis.hpp"
#include "fenc/encoder/coefficients.hpp"
#include "fenc/encoder/dataset.hpp"
#include "fenc/nn/types.hpp"

namespace fenc {

struct LossOptions {
  /// Fraction of each function's points used to estimate coefficients; the
  /// rest are query points for the loss.
  double example_fraction = 0.5;
  /// Treat coefficients as constants during backpropagation.
  bool detach_coefficients = false;
};

template <typename Scalar>
struct LossResult {
  Scalar loss = 0;
  nn::GradientBlock<Scalar> grads;
};

/// Number of example points when splitting `total` points.
inline Index example_count(Index total, double fraction) {
  if (total < 2) throw std::invalid_argument("fe_loss: a function needs at least 2 points to split");
  const auto n = static_cast<Index>(std::floor(fraction * static_cast<double>(total)));
  return std::clamp<Index>(n, 1, total - 1);
}

/// Mean over functions of the mean squared query error, where each
/// function's coefficients come from its example half. Gradients flow
/// through both the query-point basis values and (unless detached) the
/// coefficient estimate. Functions whose inputs are identical share one
/// forward pass.
template <typename Scalar>
LossResult<Scalar> fe_loss(const BasisSet<Scalar>& basis,
                           std::span<const BasicFunctionDataset<Scalar>> batch,
                           const LossOptions& options = {}) {
  if (batch.empty()) throw std::invalid_argument("fe_loss: empty batch");
  if (!(options.example_fraction > 0 && options.example_fraction < 1))
    throw std::invalid_argument("fe_loss: example_fraction must lie in (0, 1)");
  for (const auto& d : batch) {
    check_dataset(basis, d);
    example_count(d.size(), options.example_fraction);
  }

  const Index b = basis.num_basis();
  const Index m = basis.output_dim();
  const auto n_functions = static_cast<Scalar>(batch.size());
  LossResult<Scalar> result{Scalar(0), nn::GradientBlock<Scalar>::zeros(basis.arch())};

  std::size_t first = 0;
  while (first < batch.size()) {
    std::size_t last = first + 1;
    while (last < batch.size() && batch[last].inputs.rows() == batch[first].inputs.rows() &&
           batch[last].inputs.cols() == batch[first].inputs.cols() &&
           batch[last].inputs == batch[first].inputs)
      ++last;

    const auto& inputs = batch[first].inputs;
    const Index total = inputs.cols();
    const Index n_ex = example_count(total, options.example_fraction);
    const Index n_q = total - n_ex;
    const auto trace_ex = basis.trace(inputs.leftCols(n_ex));
    const auto trace_q = basis.trace(inputs.rightCols(n_q));
    const auto& g_ex = trace_ex.output();
    const auto& g_q = trace_q.output();
    nn::MatrixX<Scalar> up_ex = nn::MatrixX<Scalar>::Zero(b * m, n_ex);
    nn::MatrixX<Scalar> up_q = nn::MatrixX<Scalar>::Zero(b * m, n_q);

    for (std::size_t f = first; f < last; ++f) {
      const auto y_ex = batch[f].outputs.leftCols(n_ex);
      const auto y_q = batch[f].outputs.rightCols(n_q);
      const nn::MatrixX<Scalar> c = inner_products(g_ex, y_ex, b);
      const nn::MatrixX<Scalar> residual = combine(g_q, c) - y_q;
      result.loss += residual.squaredNorm() / (static_cast<Scalar>(n_q) * n_functions);
      const nn::MatrixX<Scalar> d_pred = (Scalar(2) / (static_cast<Scalar>(n_q) * n_functions)) * residual;
      for (Index j = 0; j < m; ++j) {
        up_q.middleRows(j * b, b).noalias() += c.col(j) * d_pred.row(j);
        if (!options.detach_coefficients) {
          const nn::VectorX<Scalar> d_c = g_q.middleRows(j * b, b) * d_pred.row(j).transpose();
          up_ex.middleRows(j * b, b).noalias() += (d_c / static_cast<Scalar>(n_ex)) * y_ex.row(j);
        }
      }
    }
    nn::backward_batch(basis.params(), basis.arch(), trace_q, up_q, result.grads);
    if (!options.detach_coefficients)
      nn::backward_batch(basis.params(), basis.arch(), trace_ex, up_ex, result.grads);
    first = last;
  }
  return result;
}

template <typename Scalar>
LossResult<Scalar> fe_loss(const BasisSet<Scalar>& basis,
                           const std::vector<BasicFunctionDataset<Scalar>>& batch,
                           const LossOptions& options = {}) {
  return fe_loss(basis, std::span<const BasicFunctionDataset<Scalar>>(batch), options);
}

}  // namespace fenc
