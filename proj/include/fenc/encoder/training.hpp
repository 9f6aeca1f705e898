#pragma once

#include <cstdint>
#include <vector>

#include "fenc/encoder/basis.hpp"
#include "fenc/encoder/coefficients.hpp"
#include "fenc/encoder/loss.hpp"
#include "fenc/nn/optimizer.hpp"
#include "fenc/spaces/function_space.hpp"

namespace fenc {

struct TrainConfig {
  std::int64_t steps = 2000;
  Index functions_per_step = 5;
  Index points_per_function = 400;
  LossOptions loss{};
  nn::AdamConfig optimizer{};
  /// Cosine decay of the learning rate down to this fraction of the initial
  /// value at the last step; 1 keeps it constant.
  double final_lr_fraction = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  double learning_rate_at(std::int64_t step) const;
};

/// `functions` freshly sampled functions evaluated on one shared input set,
/// so every function in the batch sees the same query inputs.
std::vector<FunctionDataset> sample_training_batch(const spaces::FunctionSpace& space, Index functions,
                                                   Index points, std::uint64_t seed, std::int64_t step);

struct TrainResult {
  BasisSet<double> basis;
  nn::OptimizerState<double> optimizer;
  std::vector<double> history;  // loss per step
};

TrainResult train(BasisSet<double> basis, const spaces::FunctionSpace& space, const TrainConfig& config);

struct HeldOutConfig {
  Index functions = 50;
  Index example_points = 5000;
  Index query_points = 500;
  std::uint64_t seed = 0;
};

struct HeldOutMetrics {
  double mse = 0;           // mean over functions of mean squared query error
  double relative_mse = 0;  // mse / mean squared output norm
  std::vector<double> per_function_mse;
};

/// Functions drawn from a seed stream disjoint from training; coefficients
/// from example_points, error on independent query points.
HeldOutMetrics evaluate_heldout(const BasisSet<double>& basis, const spaces::FunctionSpace& space,
                                const HeldOutConfig& config);

/// f(x) = f_mean(x) + f_dif(x): a plain regression network for the average
/// function plus a function encoder for each function's deviation from it.
struct ResidualModel {
  nn::Architecture mean_arch;
  nn::ParameterBlock<double> mean_params;
  BasisSet<double> difference_encoder;

  static ResidualModel initialize(const nn::Architecture& encoder_arch, std::uint64_t seed);

  Eigen::MatrixXd mean_prediction(const Eigen::MatrixXd& inputs) const;
  /// Coefficients of y - f_mean(x) in the difference encoder.
  Representation<double> encode(const FunctionDataset& data) const;
  Eigen::MatrixXd predict(const Representation<double>& rep, const Eigen::MatrixXd& inputs) const;
};

struct ResidualTrainResult {
  ResidualModel model;
  std::vector<double> history;       // difference-encoder loss per step
  std::vector<double> mean_history;  // mean-model regression loss per step
};

ResidualTrainResult train_residual(ResidualModel model, const spaces::FunctionSpace& space,
                                   const TrainConfig& config);

HeldOutMetrics evaluate_heldout(const ResidualModel& model, const spaces::FunctionSpace& space,
                                const HeldOutConfig& config);

}  // namespace fenc
