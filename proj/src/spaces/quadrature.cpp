#include "fenc/spaces/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace fenc::spaces {

namespace {

/// Calls visit(x, w) for composite Simpson nodes with weights summing to 1.
template <typename Visit>
void simpson_nodes(double lo, double hi, Index nodes, Visit&& visit) {
  if (nodes < 3) nodes = 3;
  if (nodes % 2 == 0) ++nodes;
  const Index intervals = nodes - 1;
  const double h = (hi - lo) / static_cast<double>(intervals);
  const double scale = h / 3.0 / (hi - lo);
  for (Index k = 0; k <= intervals; ++k) {
    const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    visit(lo + h * static_cast<double>(k), w * scale);
  }
}

}  // namespace

double mean_integral(const std::function<double(double)>& f, double lo, double hi, Index nodes) {
  if (!(hi > lo)) throw std::invalid_argument("mean_integral: empty interval");
  double acc = 0;
  simpson_nodes(lo, hi, nodes, [&](double x, double w) { acc += w * f(x); });
  return acc;
}

double inner_product(const std::function<double(double)>& f, const std::function<double(double)>& g,
                     double lo, double hi, Index nodes) {
  return mean_integral([&](double x) { return f(x) * g(x); }, lo, hi, nodes);
}

SpanQuadratureOracle::SpanQuadratureOracle(const FunctionSpace& space, Index nodes)
    : space_(dynamic_cast<const LinearSpanSpace*>(&space)), nodes_(nodes) {
  if (!space_) throw std::invalid_argument("SpanQuadratureOracle: only linear_span spaces have true coefficients");
  const Index d = space_->num_features();
  const auto& features = space_->features();

  gram_ = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd phi(d);
  simpson_nodes(space_->domain_lo(), space_->domain_hi(), nodes_, [&](double x, double w) {
    for (Index k = 0; k < d; ++k) phi(k) = features[k].eval(x);
    gram_.noalias() += w * phi * phi.transpose();
  });

  // Modified Gram-Schmidt on feature-weight vectors; <u, v> = u^T gram v.
  transform_ = Eigen::MatrixXd::Identity(d, d);
  for (Index k = 0; k < d; ++k) {
    for (Index j = 0; j < k; ++j) {
      const double proj = transform_.row(k) * gram_ * transform_.row(j).transpose();
      transform_.row(k) -= proj * transform_.row(j);
    }
    const double norm2 = transform_.row(k) * gram_ * transform_.row(k).transpose();
    if (!(norm2 > 0)) throw std::runtime_error("SpanQuadratureOracle: features are linearly dependent");
    transform_.row(k) /= std::sqrt(norm2);
  }
}

double SpanQuadratureOracle::orthonormal(Index k, double x) const {
  double acc = 0;
  const auto& features = space_->features();
  for (Index l = 0; l < dim(); ++l) acc += transform_(k, l) * features[l].eval(x);
  return acc;
}

VectorXd SpanQuadratureOracle::true_coefficients(const std::function<double(double)>& f) const {
  const Index d = dim();
  const auto& features = space_->features();
  Eigen::VectorXd feature_products = Eigen::VectorXd::Zero(d);
  simpson_nodes(space_->domain_lo(), space_->domain_hi(), nodes_, [&](double x, double w) {
    const double fx = w * f(x);
    for (Index l = 0; l < d; ++l) feature_products(l) += fx * features[l].eval(x);
  });
  return transform_ * feature_products;
}

VectorXd SpanQuadratureOracle::true_coefficients(const SampledFunction& fn) const {
  if (fn.space != space_) throw std::invalid_argument("true_coefficients: function from a different space");
  if (fn.hidden.size() != dim()) throw std::invalid_argument("true_coefficients: bad coefficient vector");
  const auto& features = space_->features();
  return true_coefficients([&](double x) {
    double acc = 0;
    for (Index l = 0; l < dim(); ++l) acc += fn.hidden(l) * features[l].eval(x);
    return acc;
  });
}

}  // namespace fenc::spaces
