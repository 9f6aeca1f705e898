#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fenc/encoder/basis.hpp"
#include "fenc/harness/config.hpp"
#include "fenc/harness/results.hpp"
#include "fenc/rl/agent.hpp"
#include "fenc/spaces/function_space.hpp"

namespace fenc::harness {

namespace fs = std::filesystem;

struct SeedFailure {
  std::uint64_t seed = 0;
  std::string what;
};

struct RunSummary {
  std::string config_hash;
  fs::path dir;
  ResultsTable metrics;  // deterministic given config + seed
  ResultsTable timings;  // wall-clock, kept apart so metrics stay reproducible
  std::vector<SeedFailure> failures;

  bool ok() const { return failures.empty(); }
};

/// The benchmark's function space for one seed (also used as master seed).
std::unique_ptr<spaces::FunctionSpace> make_space(const ExperimentConfig& cfg, std::uint64_t seed);
/// Task prototype of an rl benchmark.
rl::GridTask rl_prototype(Benchmark b);

/// Train + evaluate per seed into cfg.output_dir. Writes config.txt,
/// provenance.txt, metrics.csv, timings.csv, failures.log (if any) and a
/// seed_<s>/ directory of checkpoints and curves per seed. A failing seed is
/// logged and the rest still run. Validation happens before anything is
/// written.
RunSummary run(const ExperimentConfig& cfg);

/// Re-evaluates the checkpoints of a previous `run` in cfg.output_dir;
/// writes eval_metrics.csv.
RunSummary evaluate_run(const ExperimentConfig& cfg);

/// One full run per cfg.sweep_values entry under <out>/<axis>_<value>/;
/// all rows land in <out>/sweep.csv as `metric@axis=value`.
RunSummary sweep(const ExperimentConfig& cfg);

struct SimilarityGrid {
  std::string param;
  std::vector<double> values;
  Eigen::MatrixXd cosine;  // pairwise cosine similarities of the representations
};

/// Pairwise cosine similarity of the representations of space members
/// hidden(v), v in values, all estimated on one shared input set. Throws
/// std::logic_error for an untrained encoder.
SimilarityGrid similarity_grid(const BasisSet<double>& fe, const spaces::FunctionSpace& space,
                               const std::string& param, const std::vector<double>& values,
                               const std::function<Eigen::VectorXd(double)>& hidden, Index points,
                               std::uint64_t seed);

/// Oscillators that differ only in `param` (others at nominal values).
SimilarityGrid similarity_grid(const BasisSet<double>& fe, const spaces::HipDynamicsSpace& space,
                               const std::string& param, const std::vector<double>& values, Index points,
                               std::uint64_t seed);

/// Nominal oscillator used by similarity grids.
spaces::Theta nominal_theta();

/// hip_sysid (mass|damping|gain) or rl_reward (slope). Trains an encoder per seed (or loads `checkpoint`) and
/// writes similarity.csv (+ per-seed grids) and metrics.
RunSummary similarity(const ExperimentConfig& cfg, const std::optional<std::string>& checkpoint);

/// rl benchmarks: encoder + agent training (checkpoints, learning curves).
RunSummary rl_train(const ExperimentConfig& cfg);
/// rl benchmarks: zero-shot evaluation of the agents saved by rl_train.
RunSummary rl_eval(const ExperimentConfig& cfg);

rl::AgentConfig agent_config(const ExperimentConfig& cfg, std::uint64_t seed);
std::vector<rl::GridTask> rl_tasks(const ExperimentConfig& cfg, const std::vector<double>& values);

/// Encoder checkpoint + key=value sidecar (`<path>.meta`).
void save_encoder(const fs::path& path, const BasisSet<double>& basis,
                  const std::map<std::string, std::string>& extra = {});
BasisSet<double> load_encoder(const fs::path& path);

}  // namespace fenc::harness
