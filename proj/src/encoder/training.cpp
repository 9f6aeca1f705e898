#include "fenc/encoder/training.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fenc/nn/mlp.hpp"

namespace fenc {

void TrainConfig::validate() const {
  if (steps < 0) throw std::invalid_argument("TrainConfig: steps must be >= 0");
  if (functions_per_step < 1) throw std::invalid_argument("TrainConfig: functions_per_step must be >= 1");
  if (points_per_function < 2) throw std::invalid_argument("TrainConfig: points_per_function must be >= 2");
  if (!(loss.example_fraction > 0 && loss.example_fraction < 1))
    throw std::invalid_argument("TrainConfig: example_fraction must lie in (0, 1)");
  if (!(final_lr_fraction > 0 && final_lr_fraction <= 1))
    throw std::invalid_argument("TrainConfig: final_lr_fraction must lie in (0, 1]");
  optimizer.validate();
}

double TrainConfig::learning_rate_at(std::int64_t step) const {
  if (final_lr_fraction == 1.0 || steps <= 1) return optimizer.learning_rate;
  const double progress = static_cast<double>(step) / static_cast<double>(steps - 1);
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return optimizer.learning_rate * (final_lr_fraction + (1.0 - final_lr_fraction) * cosine);
}

std::vector<FunctionDataset> sample_training_batch(const spaces::FunctionSpace& space, Index functions,
                                                   Index points, std::uint64_t seed, std::int64_t step) {
  const auto ustep = static_cast<std::uint64_t>(step);
  Rng input_rng(derive_seed(seed, stream::inputs, ustep));
  const Eigen::MatrixXd inputs = space.sample_inputs(points, input_rng);
  std::vector<FunctionDataset> batch;
  batch.reserve(static_cast<std::size_t>(functions));
  for (Index k = 0; k < functions; ++k) {
    const auto fn = space.sample_function(
        derive_seed(seed, stream::functions, ustep * static_cast<std::uint64_t>(functions) + k));
    batch.push_back({inputs, fn.evaluate(inputs), SamplingNote::uniform});
  }
  return batch;
}

TrainResult train(BasisSet<double> basis, const spaces::FunctionSpace& space, const TrainConfig& config) {
  config.validate();
  if (basis.input_dim() != space.input_dim() || basis.output_dim() != space.output_dim())
    throw std::invalid_argument("train: basis and space dimensions differ");
  auto state = nn::OptimizerState<double>::create(basis.arch(), config.optimizer);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(config.steps));
  auto params = basis.params();
  for (std::int64_t step = 0; step < config.steps; ++step) {
    const auto batch =
        sample_training_batch(space, config.functions_per_step, config.points_per_function, config.seed, step);
    auto [loss, grads] = fe_loss(basis, batch, config.loss);
    history.push_back(loss);
    state.config.learning_rate = config.learning_rate_at(step);
    nn::optimizer_step(state, params, grads);
    basis.set_params(params);
  }
  if (config.steps > 0) basis.mark_trained();
  auto& meta = basis.metadata();
  meta["train_seed"] = std::to_string(config.seed);
  meta["train_steps"] = std::to_string(config.steps);
  meta["functions_per_step"] = std::to_string(config.functions_per_step);
  meta["points_per_function"] = std::to_string(config.points_per_function);
  meta["example_fraction"] = std::to_string(config.loss.example_fraction);
  meta["space"] = space.kind();
  return {std::move(basis), std::move(state), std::move(history)};
}

namespace {

template <typename Predict>
HeldOutMetrics heldout_impl(const spaces::FunctionSpace& space, const HeldOutConfig& config,
                            Predict&& predict_fn) {
  if (config.functions < 1 || config.example_points < 1 || config.query_points < 1)
    throw std::invalid_argument("evaluate_heldout: counts must be >= 1");
  HeldOutMetrics metrics;
  double total_err = 0;
  double total_norm = 0;
  for (Index k = 0; k < config.functions; ++k) {
    const auto uk = static_cast<std::uint64_t>(k);
    const auto fn = space.sample_function(derive_seed(config.seed, stream::heldout, uk));
    const auto examples =
        spaces::sample_dataset(fn, config.example_points, derive_seed(config.seed, stream::heldout, 2 * uk + 1));
    const auto queries =
        spaces::sample_dataset(fn, config.query_points, derive_seed(config.seed, stream::heldout, 2 * uk + 2));
    const Eigen::MatrixXd pred = predict_fn(examples, queries.inputs);
    const double n_q = static_cast<double>(queries.size());
    const double err = (pred - queries.outputs).squaredNorm() / n_q;
    metrics.per_function_mse.push_back(err);
    total_err += err;
    total_norm += queries.outputs.squaredNorm() / n_q;
  }
  metrics.mse = total_err / static_cast<double>(config.functions);
  metrics.relative_mse = total_norm > 0 ? total_err / total_norm : 0.0;
  return metrics;
}

}  // namespace

HeldOutMetrics evaluate_heldout(const BasisSet<double>& basis, const spaces::FunctionSpace& space,
                                const HeldOutConfig& config) {
  return heldout_impl(space, config, [&](const FunctionDataset& examples, const Eigen::MatrixXd& inputs) {
    return predict_batch(basis, estimate_coefficients(basis, examples), inputs);
  });
}

// --- residual model -------------------------------------------------------------

ResidualModel ResidualModel::initialize(const nn::Architecture& encoder_arch, std::uint64_t seed) {
  nn::Architecture mean_arch = encoder_arch;
  mean_arch.num_heads = 1;
  return {mean_arch, nn::init_params<double>(mean_arch, derive_seed(seed, 1)),
          BasisSet<double>::initialize(encoder_arch, derive_seed(seed, 2))};
}

Eigen::MatrixXd ResidualModel::mean_prediction(const Eigen::MatrixXd& inputs) const {
  return nn::forward_batch(mean_params, mean_arch, inputs);
}

Representation<double> ResidualModel::encode(const FunctionDataset& data) const {
  FunctionDataset residual{data.inputs, data.outputs - mean_prediction(data.inputs), data.sampling};
  return estimate_coefficients(difference_encoder, residual);
}

Eigen::MatrixXd ResidualModel::predict(const Representation<double>& rep, const Eigen::MatrixXd& inputs) const {
  return mean_prediction(inputs) + predict_batch(difference_encoder, rep, inputs);
}

ResidualTrainResult train_residual(ResidualModel model, const spaces::FunctionSpace& space,
                                   const TrainConfig& config) {
  config.validate();
  auto& encoder = model.difference_encoder;
  if (encoder.input_dim() != space.input_dim() || encoder.output_dim() != space.output_dim() ||
      model.mean_arch.input_dim != space.input_dim() || model.mean_arch.output_dim != space.output_dim())
    throw std::invalid_argument("train_residual: model and space dimensions differ");

  auto mean_state = nn::OptimizerState<double>::create(model.mean_arch, config.optimizer);
  auto enc_state = nn::OptimizerState<double>::create(encoder.arch(), config.optimizer);
  auto enc_params = encoder.params();
  ResidualTrainResult result;
  for (std::int64_t step = 0; step < config.steps; ++step) {
    auto batch =
        sample_training_batch(space, config.functions_per_step, config.points_per_function, config.seed, step);

    // Mean model: plain regression pooled over every function in the batch.
    const auto& inputs = batch.front().inputs;
    const auto trace = nn::forward_trace(model.mean_params, model.mean_arch, inputs);
    const Eigen::MatrixXd mean_out = trace.output();
    Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(mean_out.rows(), mean_out.cols());
    double mean_loss = 0;
    const double scale = 1.0 / static_cast<double>(batch.size() * static_cast<std::size_t>(inputs.cols()));
    for (auto& d : batch) {
      const Eigen::MatrixXd diff = mean_out - d.outputs;
      mean_loss += diff.squaredNorm() * scale;
      upstream += 2.0 * scale * diff;
      d.outputs = -diff;  // residual targets y - f_mean(x)
    }
    auto mean_grads = nn::GradientBlock<double>::zeros(model.mean_arch);
    nn::backward_batch(model.mean_params, model.mean_arch, trace, upstream, mean_grads);

    auto [loss, grads] = fe_loss(encoder, batch, config.loss);
    result.history.push_back(loss);
    result.mean_history.push_back(mean_loss);
    mean_state.config.learning_rate = enc_state.config.learning_rate = config.learning_rate_at(step);
    nn::optimizer_step(mean_state, model.mean_params, mean_grads);
    nn::optimizer_step(enc_state, enc_params, grads);
    encoder.set_params(enc_params);
  }
  if (config.steps > 0) encoder.mark_trained();
  encoder.metadata()["train_seed"] = std::to_string(config.seed);
  encoder.metadata()["train_steps"] = std::to_string(config.steps);
  encoder.metadata()["model"] = "fe_residual";
  result.model = std::move(model);
  return result;
}

HeldOutMetrics evaluate_heldout(const ResidualModel& model, const spaces::FunctionSpace& space,
                                const HeldOutConfig& config) {
  return heldout_impl(space, config, [&](const FunctionDataset& examples, const Eigen::MatrixXd& inputs) {
    return model.predict(model.encode(examples), inputs);
  });
}

}  // namespace fenc
