#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fenc/encoder/basis.hpp"
#include "fenc/nn/mlp.hpp"
#include "fenc/nn/optimizer.hpp"
#include "fenc/rl/gridworld.hpp"
#include "fenc/rl/oracle.hpp"

namespace fenc::rl {

enum class QHead { plain, bilinear };

std::string to_string(QHead head);
QHead parse_q_head(const std::string& name);

/// Q(s, a, c) over a one-hot state and a context vector c.
///   plain:    the net outputs one value per action.
///   bilinear: the net outputs a k-vector per action and Q = q_a . c.
class ConditionedQ {
 public:
  ConditionedQ() = default;
  ConditionedQ(const GridTask& prototype, Index context_dim, QHead head, std::vector<Index> hidden,
               std::uint64_t seed);

  Index context_dim() const { return context_dim_; }
  QHead head() const { return head_; }
  const nn::Architecture& arch() const { return arch_; }
  nn::ParameterBlock<double>& params() { return params_; }
  const nn::ParameterBlock<double>& params() const { return params_; }
  void set_params(nn::ParameterBlock<double> params);

  /// Network input for one (state, context): [one-hot(state), context].
  Eigen::VectorXd input(const GridState& s, const Eigen::VectorXd& context) const;
  /// 4 x N action values for network inputs (columns) with matching contexts.
  Eigen::MatrixXd q_batch(const nn::ParameterBlock<double>& params, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& contexts) const;
  /// Combines raw net outputs (arch output units x N) into 4 x N values.
  Eigen::MatrixXd combine(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& contexts) const;

  Eigen::Vector4d q_values(const GridState& s, const Eigen::VectorXd& context) const;
  int greedy(const GridState& s, const Eigen::VectorXd& context) const;

 private:
  int width_ = 0, height_ = 0;
  Index context_dim_ = 0;
  QHead head_ = QHead::plain;
  nn::Architecture arch_;
  nn::ParameterBlock<double> params_;
};

struct AgentConfig {
  QHead head = QHead::plain;
  bool zero_context = false;  // ablation: feed zeros instead of the representation
  std::vector<Index> hidden{64, 64};
  int episodes = 1500;
  int batch_size = 64;
  int replay_capacity = 20000;
  int warmup_transitions = 500;
  int target_sync = 200;  // gradient steps between target-network copies
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.5;  // fraction of episodes over which epsilon decays linearly
  nn::AdamConfig optimizer{1e-3, 0.9, 0.999, 1e-8, 10.0};
  Index probe_size = 256;
  int baseline_episodes = 20;  // random-policy episodes per training task
  std::uint64_t seed = 0;

  void validate() const;
  double epsilon_at(int episode) const;
};

/// Draws the task for each training episode.
using TaskSampler = std::function<GridTask(int episode, Rng& rng)>;

/// Uniform over a finite list of perturbation values.
TaskSampler finite_task_sampler(const GridTask& prototype, std::vector<double> values);

/// Context for an episode: the flattened representation of the probe data,
/// or zeros under the ablation.
Eigen::VectorXd task_context(const BasisSet<double>& fe, const GridTask& task,
                             const PerturbationDataset& probes, bool zero_context);

struct AgentTrainResult {
  ConditionedQ agent;
  bool zero_context = false;
  std::vector<double> episode_returns;  // discounted, per training episode
  double random_baseline = 0;           // mean discounted return of the uniform-random policy
  std::int64_t gradient_steps = 0;
};

/// Q-learning with replay and a target network; the encoder stays frozen.
AgentTrainResult train_agent(const BasisSet<double>& fe, const GridTask& prototype,
                             const TaskSampler& sampler, const std::vector<GridTask>& baseline_tasks,
                             const AgentConfig& config);

/// Trailing mean of episode returns over `window` episodes.
std::vector<double> learning_curve(const std::vector<double>& returns, int window = 50);

// ---------------------------------------------------------------------------

using ActionSelector =
    std::function<int(const GridTask& task, const GridState& s, const Eigen::VectorXd& context)>;
using ContextProvider = std::function<Eigen::VectorXd(const GridTask& task, const PerturbationDataset& probes)>;

ActionSelector greedy_selector(const ConditionedQ& agent);
/// Acts optimally using value iteration on the true task (ignores context).
ActionSelector oracle_selector();

struct ZeroShotConfig {
  int episodes_per_task = 5;
  Index probe_size = 256;
  std::uint64_t seed = 0;
};

struct TaskOutcome {
  TaskKind kind = TaskKind::reward_slope;
  double perturbation = 0;
  double mean_return = 0;
  double oracle_return = 0;
  double oracle_ratio = 0;
  int first_action = 0;  // most frequent greedy first action
  std::string outcome;   // most frequent terminal outcome
  bool correct_decision = false;
};

struct ZeroShotReport {
  std::vector<TaskOutcome> tasks;

  double mean_oracle_ratio() const;
  int correct_decisions() const;
};

/// Whether the behaviour matches the optimal decision: first move toward
/// sign(c), or the room chosen by the treadmill rule.
bool decision_correct(const GridTask& task, int first_action, const std::string& outcome);

/// Greedy evaluation; each episode draws fresh probe data for its context.
ZeroShotReport evaluate_policy(const ActionSelector& act, const ContextProvider& context,
                               const std::vector<GridTask>& tasks, const ZeroShotConfig& config);

ZeroShotReport evaluate_zero_shot(const AgentTrainResult& trained, const BasisSet<double>& fe,
                                  const std::vector<GridTask>& held_out, const ZeroShotConfig& config);

/// Discounted return of the optimal greedy rollout.
double oracle_return(const GridTask& task);

void write_report_csv(const std::string& path, const ZeroShotReport& report);
void write_learning_curve_csv(const std::string& path, const std::vector<double>& returns, int window = 50);

}  // namespace fenc::rl
