#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace fenc {

enum class SamplingNote { uniform, other };

/// Example set D = {(x_j, f(x_j))} for one function. Column j of `inputs`
/// (n x N) pairs with column j of `outputs` (m x N).
template <typename Scalar>
struct BasicFunctionDataset {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix inputs;
  Matrix outputs;
  SamplingNote sampling = SamplingNote::uniform;

  Eigen::Index size() const { return inputs.cols(); }
  Eigen::Index input_dim() const { return inputs.rows(); }
  Eigen::Index output_dim() const { return outputs.rows(); }

  void validate() const {
    if (inputs.cols() < 1) throw std::invalid_argument("FunctionDataset: empty dataset");
    if (inputs.cols() != outputs.cols())
      throw std::invalid_argument("FunctionDataset: inputs and outputs differ in length");
    if (!inputs.allFinite() || !outputs.allFinite())
      throw std::invalid_argument("FunctionDataset: non-finite entries");
  }

  /// Columns [first, first + count).
  BasicFunctionDataset slice(Eigen::Index first, Eigen::Index count) const {
    return {inputs.middleCols(first, count), outputs.middleCols(first, count), sampling};
  }
};

using FunctionDataset = BasicFunctionDataset<double>;

/// CSV with header `x0..x{n-1},y0..y{m-1}`, one sample per row.
void write_dataset_csv(const std::string& path, const FunctionDataset& data);
FunctionDataset read_dataset_csv(const std::string& path);

}  // namespace fenc
