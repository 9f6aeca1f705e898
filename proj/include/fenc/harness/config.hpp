#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fenc/encoder/training.hpp"
#include "fenc/nn/types.hpp"

namespace fenc::harness {

using Eigen::Index;

/// Anything wrong with a configuration; maps to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Benchmark { linear_span, sinusoid, hip_sysid, rl_reward, rl_treadmill };
enum class ModelKind { fe, fe_residual };

std::string to_string(Benchmark b);
std::string to_string(ModelKind m);
Benchmark parse_benchmark(const std::string& s);
ModelKind parse_model(const std::string& s);

inline bool is_rl(Benchmark b) { return b == Benchmark::rl_reward || b == Benchmark::rl_treadmill; }

struct ExperimentConfig {
  Benchmark benchmark = Benchmark::linear_span;
  ModelKind model = ModelKind::fe;

  // encoder
  Index num_basis = 8;
  std::vector<Index> hidden_layers{32, 32};
  nn::Activation activation = nn::Activation::tanh;

  // linear_span space
  std::string span_features = "legendre";  // legendre | standard | trigonometric
  int span_dim = 5;
  int halfspace_axis = -1;  // >= 0: train on sign(a[axis]) == +1, also evaluate the other half

  // training
  std::int64_t steps = 2000;
  Index functions_per_step = 20;
  Index points_per_function = 800;
  double example_fraction = 0.5;
  bool detach_coefficients = false;
  double learning_rate = 1e-2;
  double final_lr_fraction = 0.05;
  double clip_norm = 1.0;

  // held-out evaluation
  Index eval_functions = 50;
  Index eval_example_points = 5000;
  Index eval_query_points = 500;

  // rl
  std::string rl_head = "bilinear";
  bool rl_zero_context = false;
  int rl_episodes = 1500;
  std::vector<Index> rl_hidden{64, 64};
  double rl_learning_rate = 1e-3;
  Index rl_probe_size = 256;
  int rl_episodes_per_task = 5;
  std::vector<double> rl_train_values;
  std::vector<double> rl_heldout_values;

  // sweeps and similarity grids
  std::string sweep_axis = "num_basis";
  std::vector<double> sweep_values{2, 4, 8, 16, 32};
  std::string similarity_param = "mass";
  std::vector<double> similarity_values{0.6, 0.8, 1.0, 1.25, 1.67};
  Index similarity_points = 5000;  // shared inputs for every grid point

  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "results";

  /// Throws ConfigError.
  void validate() const;

  nn::Architecture encoder_arch(Index input_dim, Index output_dim) const;
  TrainConfig train_config(std::uint64_t seed) const;
  HeldOutConfig heldout_config(std::uint64_t seed) const;
};

/// Benchmark-specific defaults (frozen from pilot runs).
ExperimentConfig defaults_for(Benchmark b);

/// Flat key=value map; `#` starts a comment. Throws ConfigError.
std::map<std::string, std::string> read_key_values(const std::string& path);
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Starts from defaults_for(benchmark) and applies every key; unknown keys
/// and malformed values are errors.
ExperimentConfig parse_config(const std::map<std::string, std::string>& kv);
ExperimentConfig load_config(const std::string& path);

/// Canonical key=value echo of every field (round-trips through parse_config).
std::string echo_config(const ExperimentConfig& cfg);

/// FNV-1a hash of the echo, excluding seeds and output_dir, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Applies one sweep value to a copy of the config.
ExperimentConfig with_sweep_value(const ExperimentConfig& cfg, const std::string& axis, double value);

std::string format_number(double v);

}  // namespace fenc::harness
