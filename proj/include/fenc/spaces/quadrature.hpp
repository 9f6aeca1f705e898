#pragma once

#include <functional>

#include <Eigen/Core>

#include "fenc/spaces/function_space.hpp"

namespace fenc::spaces {

/// (1/V) * integral of f over [lo, hi] by composite Simpson with `nodes`
/// points (rounded up to odd).
double mean_integral(const std::function<double(double)>& f, double lo, double hi,
                     Index nodes = 1'000'001);

/// Volume-free inner product (1/V) * integral f g over [lo, hi].
double inner_product(const std::function<double(double)>& f, const std::function<double(double)>& g,
                     double lo, double hi, Index nodes = 1'000'001);

/// Ground-truth coefficients for linear-span spaces. The span's features are
/// orthonormalized by modified Gram-Schmidt under the volume-free inner
/// product, with all inner products taken by composite quadrature.
class SpanQuadratureOracle {
 public:
  /// Throws std::invalid_argument if `space` is not a LinearSpanSpace.
  explicit SpanQuadratureOracle(const FunctionSpace& space, Index nodes = 1'000'001);

  Index dim() const { return transform_.rows(); }

  /// Row k holds the feature weights of orthonormal function k.
  const Eigen::MatrixXd& transform() const { return transform_; }
  /// Gram matrix of the raw features.
  const Eigen::MatrixXd& feature_gram() const { return gram_; }

  double orthonormal(Index k, double x) const;

  /// Coefficients of f in the orthonormalized basis, by quadrature.
  VectorXd true_coefficients(const std::function<double(double)>& f) const;
  VectorXd true_coefficients(const SampledFunction& fn) const;

 private:
  const LinearSpanSpace* space_;
  Index nodes_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd transform_;
};

}  // namespace fenc::spaces
