#pragma once

#include <concepts>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fenc/nn/mlp.hpp"
#include "fenc/nn/types.hpp"

namespace fenc {

using Eigen::Index;

/// Anything that evaluates b basis functions with m outputs on a batch of
/// inputs: evaluate(X) with X n x N returns (b*m) x N, row i + j*b holding
/// head i, output j.
template <typename B>
concept BasisFunctions = requires(const B& basis, const typename B::Matrix& inputs) {
  typename B::Scalar;
  { basis.input_dim() } -> std::convertible_to<Index>;
  { basis.output_dim() } -> std::convertible_to<Index>;
  { basis.num_basis() } -> std::convertible_to<Index>;
  { basis.evaluate(inputs) } -> std::convertible_to<typename B::Matrix>;
  { basis.id() } -> std::convertible_to<std::string>;
};

namespace detail {

inline std::uint64_t fnv1a(const void* data, std::size_t size,
                           std::uint64_t hash = 0xcbf29ce484222325ULL) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < size; ++k) {
    hash ^= bytes[k];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

/// Learned basis: one multi-headed MLP whose b*m outputs are the basis values.
template <typename ScalarT>
class BasisSet {
 public:
  using Scalar = ScalarT;
  using Matrix = nn::MatrixX<Scalar>;

  BasisSet() = default;
  BasisSet(nn::Architecture arch, nn::ParameterBlock<Scalar> params)
      : arch_(std::move(arch)), params_(std::move(params)) {
    arch_.validate();
    if (!params_.congruent(arch_)) throw std::invalid_argument("BasisSet: params do not match arch");
    refresh_id();
  }

  static BasisSet initialize(const nn::Architecture& arch, std::uint64_t seed) {
    BasisSet basis(arch, nn::init_params<Scalar>(arch, seed));
    basis.metadata_["init_seed"] = std::to_string(seed);
    return basis;
  }

  Index input_dim() const { return arch_.input_dim; }
  Index output_dim() const { return arch_.output_dim; }
  Index num_basis() const { return arch_.num_heads; }

  template <typename Derived>
  Matrix evaluate(const Eigen::MatrixBase<Derived>& inputs) const {
    return nn::forward_batch(params_, arch_, inputs);
  }

  template <typename Derived>
  nn::ForwardTrace<Scalar> trace(const Eigen::MatrixBase<Derived>& inputs) const {
    return nn::forward_trace(params_, arch_, inputs);
  }

  /// Content hash of architecture and parameters.
  const std::string& id() const { return id_; }

  const nn::Architecture& arch() const { return arch_; }
  const nn::ParameterBlock<Scalar>& params() const { return params_; }

  void set_params(nn::ParameterBlock<Scalar> params) {
    if (!params.congruent(arch_)) throw std::invalid_argument("BasisSet: params do not match arch");
    params_ = std::move(params);
    refresh_id();
  }

  bool trained() const { return trained_; }
  void mark_trained(bool flag = true) { trained_ = flag; }

  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

 private:
  void refresh_id() {
    std::uint64_t h = detail::fnv1a(nullptr, 0);
    const Index dims[] = {arch_.input_dim, arch_.output_dim, arch_.num_heads,
                          static_cast<Index>(arch_.activation)};
    h = detail::fnv1a(dims, sizeof dims, h);
    for (Index w : arch_.hidden) h = detail::fnv1a(&w, sizeof w, h);
    for (const auto& t : params_.tensors)
      h = detail::fnv1a(t.data(), sizeof(Scalar) * static_cast<std::size_t>(t.size()), h);
    id_ = "nn-" + detail::hex64(h);
  }

  nn::Architecture arch_;
  nn::ParameterBlock<Scalar> params_;
  bool trained_ = false;
  std::map<std::string, std::string> metadata_;
  std::string id_;
};

/// Closed-form basis, used as a ground-truth stand-in for the learned one.
template <typename ScalarT>
class AnalyticBasis {
 public:
  using Scalar = ScalarT;
  using Matrix = nn::MatrixX<Scalar>;
  using Vector = nn::VectorX<Scalar>;
  /// Returns the b x m basis matrix at x.
  using Evaluator = std::function<Matrix(const Vector&)>;

  AnalyticBasis(Index input_dim, Index num_basis, Index output_dim, Evaluator eval, std::string name)
      : input_dim_(input_dim),
        num_basis_(num_basis),
        output_dim_(output_dim),
        eval_(std::move(eval)),
        id_("analytic-" + std::move(name)) {}

  /// Scalar-output basis from one function per head.
  static AnalyticBasis scalar(Index input_dim, std::vector<std::function<Scalar(const Vector&)>> heads,
                              std::string name) {
    const Index b = static_cast<Index>(heads.size());
    return AnalyticBasis(
        input_dim, b, 1,
        [heads = std::move(heads)](const Vector& x) {
          Matrix g(static_cast<Index>(heads.size()), 1);
          for (std::size_t i = 0; i < heads.size(); ++i) g(static_cast<Index>(i), 0) = heads[i](x);
          return g;
        },
        std::move(name));
  }

  Index input_dim() const { return input_dim_; }
  Index output_dim() const { return output_dim_; }
  Index num_basis() const { return num_basis_; }
  const std::string& id() const { return id_; }

  template <typename Derived>
  Matrix evaluate(const Eigen::MatrixBase<Derived>& inputs) const {
    if (inputs.rows() != input_dim_) throw std::invalid_argument("AnalyticBasis: input dimension mismatch");
    Matrix out(num_basis_ * output_dim_, inputs.cols());
    for (Index s = 0; s < inputs.cols(); ++s) {
      const Matrix g = eval_(inputs.col(s).template cast<Scalar>());
      out.col(s) = g.reshaped();
    }
    return out;
  }

 private:
  Index input_dim_;
  Index num_basis_;
  Index output_dim_;
  Evaluator eval_;
  std::string id_;
};

}  // namespace fenc
