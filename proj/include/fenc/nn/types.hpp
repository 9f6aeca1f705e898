#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fenc::nn {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Activation { relu, tanh };

std::string to_string(Activation act);
Activation parse_activation(const std::string& name);

/// Shape of a multi-headed MLP: a shared trunk whose last layer has
/// num_heads * output_dim units. Output unit (head i, dimension j) lives at
/// row i + j * num_heads, so one sample's output maps onto a column-major
/// num_heads x output_dim matrix.
struct Architecture {
  Index input_dim = 1;
  Index output_dim = 1;
  Index num_heads = 1;
  std::vector<Index> hidden{32, 32};
  Activation activation = Activation::tanh;

  Index output_units() const { return num_heads * output_dim; }
  Index num_layers() const { return static_cast<Index>(hidden.size()) + 1; }

  /// Fan-in of layer l (inputs into layer l).
  Index layer_inputs(Index l) const { return l == 0 ? input_dim : hidden[l - 1]; }
  Index layer_outputs(Index l) const {
    return l + 1 == num_layers() ? output_units() : hidden[l];
  }

  void validate() const {
    if (input_dim < 1 || output_dim < 1 || num_heads < 1)
      throw std::invalid_argument("Architecture: dimensions must be >= 1");
    if (hidden.empty()) throw std::invalid_argument("Architecture: hidden_layers must be non-empty");
    for (Index h : hidden)
      if (h < 1) throw std::invalid_argument("Architecture: hidden widths must be >= 1");
  }

  Index parameter_count() const {
    Index total = 0;
    for (Index l = 0; l < num_layers(); ++l) total += layer_outputs(l) * (layer_inputs(l) + 1);
    return total;
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Weights and biases stored as [W0, b0, W1, b1, ...]; W_l is out x in and
/// b_l is out x 1.
template <typename Scalar>
struct ParameterBlock {
  std::vector<MatrixX<Scalar>> tensors;

  static ParameterBlock zeros(const Architecture& arch) {
    ParameterBlock p;
    for (Index l = 0; l < arch.num_layers(); ++l) {
      p.tensors.push_back(MatrixX<Scalar>::Zero(arch.layer_outputs(l), arch.layer_inputs(l)));
      p.tensors.push_back(MatrixX<Scalar>::Zero(arch.layer_outputs(l), 1));
    }
    return p;
  }

  MatrixX<Scalar>& weight(Index l) { return tensors[2 * l]; }
  const MatrixX<Scalar>& weight(Index l) const { return tensors[2 * l]; }
  MatrixX<Scalar>& bias(Index l) { return tensors[2 * l + 1]; }
  const MatrixX<Scalar>& bias(Index l) const { return tensors[2 * l + 1]; }

  Index num_tensors() const { return static_cast<Index>(tensors.size()); }

  Index size() const {
    Index total = 0;
    for (const auto& t : tensors) total += t.size();
    return total;
  }

  bool all_finite() const {
    for (const auto& t : tensors)
      if (!t.allFinite()) return false;
    return true;
  }

  bool congruent(const Architecture& arch) const {
    if (num_tensors() != 2 * arch.num_layers()) return false;
    for (Index l = 0; l < arch.num_layers(); ++l) {
      if (weight(l).rows() != arch.layer_outputs(l) || weight(l).cols() != arch.layer_inputs(l))
        return false;
      if (bias(l).rows() != arch.layer_outputs(l) || bias(l).cols() != 1) return false;
    }
    return true;
  }

  template <typename Other>
  bool same_shape(const Other& other) const {
    if (num_tensors() != other.num_tensors()) return false;
    for (std::size_t k = 0; k < tensors.size(); ++k)
      if (tensors[k].rows() != other.tensors[k].rows() ||
          tensors[k].cols() != other.tensors[k].cols())
        return false;
    return true;
  }

  /// Flattened copy in tensor order, column-major within each tensor.
  VectorX<Scalar> flat() const {
    VectorX<Scalar> out(size());
    Index offset = 0;
    for (const auto& t : tensors) {
      out.segment(offset, t.size()) = t.reshaped();
      offset += t.size();
    }
    return out;
  }

  void set_flat(const VectorX<Scalar>& values) {
    if (values.size() != size()) throw std::invalid_argument("ParameterBlock::set_flat: size mismatch");
    Index offset = 0;
    for (auto& t : tensors) {
      t.reshaped() = values.segment(offset, t.size());
      offset += t.size();
    }
  }

  friend bool operator==(const ParameterBlock& a, const ParameterBlock& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t k = 0; k < a.tensors.size(); ++k)
      if (a.tensors[k] != b.tensors[k]) return false;
    return true;
  }
};

inline std::string tensor_name(Index k) {
  return "layer" + std::to_string(k / 2) + (k % 2 == 0 ? ".weight" : ".bias");
}

/// Gradient with the same layout as ParameterBlock, plus the number of
/// backward passes accumulated into it.
template <typename Scalar>
struct GradientBlock : ParameterBlock<Scalar> {
  std::int64_t accumulated = 0;

  static GradientBlock zeros(const Architecture& arch) {
    GradientBlock g;
    static_cast<ParameterBlock<Scalar>&>(g) = ParameterBlock<Scalar>::zeros(arch);
    return g;
  }

  void set_zero() {
    for (auto& t : this->tensors) t.setZero();
    accumulated = 0;
  }

  Scalar squared_norm() const {
    Scalar total = 0;
    for (const auto& t : this->tensors) total += t.squaredNorm();
    return total;
  }

  GradientBlock& operator+=(const GradientBlock& other) {
    if (!this->same_shape(other)) throw std::invalid_argument("GradientBlock: shape mismatch");
    for (std::size_t k = 0; k < this->tensors.size(); ++k) this->tensors[k] += other.tensors[k];
    accumulated += other.accumulated;
    return *this;
  }

  GradientBlock& operator*=(Scalar s) {
    for (auto& t : this->tensors) t *= s;
    return *this;
  }
};

}  // namespace fenc::nn
