#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fenc/encoder/basis.hpp"
#include "fenc/encoder/dataset.hpp"

namespace fenc {

struct BasisMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Coefficients c_f (b x m) of one function in one basis. Only comparable
/// with representations carrying the same basis_id.
template <typename Scalar>
struct Representation {
  nn::MatrixX<Scalar> coefficients;
  Index source_size = 0;
  std::string basis_id;

  Index num_basis() const { return coefficients.rows(); }
  Index output_dim() const { return coefficients.cols(); }
};

/// Volume-free Monte Carlo inner products from precomputed basis values:
/// c(i, j) = (1/N) sum_s y(j, s) G_s(i, j), with values (b*m) x N and
/// outputs m x N.
template <typename DerivedG, typename DerivedY>
nn::MatrixX<typename DerivedG::Scalar> inner_products(const Eigen::MatrixBase<DerivedG>& values,
                                                      const Eigen::MatrixBase<DerivedY>& outputs,
                                                      Index num_basis) {
  using Scalar = typename DerivedG::Scalar;
  const Index m = outputs.rows();
  const Index n_samples = outputs.cols();
  if (values.rows() != num_basis * m || values.cols() != n_samples)
    throw std::invalid_argument("inner_products: basis values and outputs disagree in shape");
  if (n_samples < 1) throw std::invalid_argument("inner_products: empty dataset");
  nn::MatrixX<Scalar> c(num_basis, m);
  for (Index j = 0; j < m; ++j)
    c.col(j).noalias() = values.middleRows(j * num_basis, num_basis) * outputs.row(j).transpose();
  c /= static_cast<Scalar>(n_samples);
  return c;
}

/// f_hat(x_s)_j = sum_i c(i, j) G_s(i, j); returns m x N.
template <typename DerivedG, typename DerivedC>
nn::MatrixX<typename DerivedG::Scalar> combine(const Eigen::MatrixBase<DerivedG>& values,
                                               const Eigen::MatrixBase<DerivedC>& coefficients) {
  using Scalar = typename DerivedG::Scalar;
  const Index b = coefficients.rows();
  const Index m = coefficients.cols();
  if (values.rows() != b * m) throw std::invalid_argument("combine: coefficient shape mismatch");
  nn::MatrixX<Scalar> out(m, values.cols());
  for (Index j = 0; j < m; ++j)
    out.row(j).noalias() = coefficients.col(j).transpose() * values.middleRows(j * b, b);
  return out;
}

template <BasisFunctions Basis>
void check_dataset(const Basis& basis, const BasicFunctionDataset<typename Basis::Scalar>& data) {
  data.validate();
  if (data.input_dim() != basis.input_dim() || data.output_dim() != basis.output_dim())
    throw std::invalid_argument("dataset dimensions do not match the basis");
}

template <BasisFunctions Basis>
Representation<typename Basis::Scalar> estimate_coefficients(
    const Basis& basis, const BasicFunctionDataset<typename Basis::Scalar>& data) {
  check_dataset(basis, data);
  return {inner_products(basis.evaluate(data.inputs), data.outputs, basis.num_basis()), data.size(),
          basis.id()};
}

template <BasisFunctions Basis>
void check_pairing(const Basis& basis, const Representation<typename Basis::Scalar>& rep) {
  if (rep.basis_id != basis.id())
    throw BasisMismatch("representation '" + rep.basis_id + "' used with basis '" + basis.id() + "'");
  if (rep.num_basis() != basis.num_basis() || rep.output_dim() != basis.output_dim())
    throw BasisMismatch("representation shape does not match the basis");
}

/// Batched prediction: inputs n x N, result m x N.
template <BasisFunctions Basis, typename Derived>
nn::MatrixX<typename Basis::Scalar> predict_batch(const Basis& basis,
                                                  const Representation<typename Basis::Scalar>& rep,
                                                  const Eigen::MatrixBase<Derived>& inputs) {
  check_pairing(basis, rep);
  return combine(basis.evaluate(inputs), rep.coefficients);
}

template <BasisFunctions Basis, typename Derived>
nn::VectorX<typename Basis::Scalar> predict(const Basis& basis,
                                            const Representation<typename Basis::Scalar>& rep,
                                            const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != 1) throw std::invalid_argument("predict: expected a single input column");
  return predict_batch(basis, rep, x).col(0);
}

/// Constant-memory running estimate of the coefficients.
template <typename Scalar>
class StreamingCoefficients {
 public:
  StreamingCoefficients(Index num_basis, Index output_dim)
      : sum_(nn::MatrixX<Scalar>::Zero(num_basis, output_dim)) {}

  template <BasisFunctions Basis, typename DerivedX, typename DerivedY>
  void update(const Basis& basis, const Eigen::MatrixBase<DerivedX>& x,
              const Eigen::MatrixBase<DerivedY>& y) {
    if (x.cols() != 1 || y.cols() != 1 || y.rows() != sum_.cols() ||
        basis.num_basis() != sum_.rows() || basis.output_dim() != sum_.cols())
      throw std::invalid_argument("StreamingCoefficients::update: shape mismatch");
    const nn::MatrixX<Scalar> g = basis.evaluate(x).reshaped(sum_.rows(), sum_.cols());
    sum_ += g * y.template cast<Scalar>().asDiagonal();
    ++count_;
    if (basis_id_.empty()) basis_id_ = basis.id();
    if (basis_id_ != basis.id()) throw BasisMismatch("StreamingCoefficients: basis changed mid-stream");
  }

  Representation<Scalar> finalize() const {
    if (count_ == 0) throw std::logic_error("StreamingCoefficients::finalize: no samples");
    return {sum_ / static_cast<Scalar>(count_), count_, basis_id_};
  }

  Index count() const { return count_; }
  const nn::MatrixX<Scalar>& running_sum() const { return sum_; }

 private:
  nn::MatrixX<Scalar> sum_;
  Index count_ = 0;
  std::string basis_id_;
};

/// `basis_id,b,m` header, one line of those values, then b rows of m
/// coefficients. source_size is not stored.
void write_representation_csv(const std::string& path, const Representation<double>& rep);
Representation<double> read_representation_csv(const std::string& path);

/// Cosine of the angle between flattened coefficient matrices.
template <typename Scalar>
Scalar cosine_similarity(const Representation<Scalar>& a, const Representation<Scalar>& b) {
  if (a.basis_id != b.basis_id) throw BasisMismatch("cosine_similarity: different bases");
  if (a.coefficients.rows() != b.coefficients.rows() || a.coefficients.cols() != b.coefficients.cols())
    throw BasisMismatch("cosine_similarity: shape mismatch");
  const Scalar na = a.coefficients.norm();
  const Scalar nb = b.coefficients.norm();
  if (na == Scalar(0) || nb == Scalar(0))
    throw std::invalid_argument("cosine_similarity: zero-norm representation");
  const Scalar cos = a.coefficients.cwiseProduct(b.coefficients).sum() / (na * nb);
  return std::clamp(cos, Scalar(-1), Scalar(1));
}

/// Monte Carlo Gram matrix of the basis, averaged over output dimensions.
template <BasisFunctions Basis, typename Derived>
nn::MatrixX<typename Basis::Scalar> gram_matrix(const Basis& basis,
                                                const Eigen::MatrixBase<Derived>& probes) {
  using Scalar = typename Basis::Scalar;
  if (probes.cols() < 1) throw std::invalid_argument("gram_matrix: empty probe set");
  const auto values = basis.evaluate(probes);
  const Index b = basis.num_basis();
  const Index m = basis.output_dim();
  nn::MatrixX<Scalar> gram = nn::MatrixX<Scalar>::Zero(b, b);
  for (Index j = 0; j < m; ++j) {
    const auto block = values.middleRows(j * b, b);
    gram.noalias() += block * block.transpose();
  }
  return gram / static_cast<Scalar>(probes.cols() * m);
}

/// Mean squared deviation of the estimated inner products from delta_ij.
/// Diagnostic only.
template <BasisFunctions Basis, typename Derived>
typename Basis::Scalar orthonormality_error(const Basis& basis,
                                            const Eigen::MatrixBase<Derived>& probes) {
  using Scalar = typename Basis::Scalar;
  const auto gram = gram_matrix(basis, probes);
  const Index b = gram.rows();
  return (gram - nn::MatrixX<Scalar>::Identity(b, b)).squaredNorm() / static_cast<Scalar>(b * b);
}

}  // namespace fenc
