#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fenc/encoder/basis.hpp"
#include "fenc/encoder/coefficients.hpp"
#include "fenc/encoder/dataset.hpp"
#include "fenc/spaces/function_space.hpp"

namespace fenc::rl {

using Eigen::Index;

enum class TaskKind { reward_slope, treadmill };

std::string to_string(TaskKind kind);
TaskKind parse_task_kind(const std::string& name);

enum Action : int { left = 0, right = 1, up = 2, down = 3 };
inline constexpr int num_actions = 4;
std::string action_name(int action);

struct GridState {
  int x = 0;
  int y = 0;
  friend bool operator==(const GridState&, const GridState&) = default;
};

/// A W x H gridworld whose reward (reward_slope) or transitions (treadmill)
/// depend on a scalar perturbation.
///
/// reward_slope: the agent starts at the centre; each step pays
/// slope * (x' - centre_x) for the cell entered. Entering either side column
/// ends the episode.
///
/// treadmill: the agent starts in the bottom room, just below a treadmill row
/// that separates it from the top room. The row is passable only if
/// agent_speed exceeds the treadmill speed; otherwise stepping onto it pushes
/// the agent back to the row below. Reaching the top row pays +10, the bottom
/// row +1, and both end the episode.
struct GridTask {
  TaskKind kind = TaskKind::reward_slope;
  double perturbation = 0.0;  // slope c, or treadmill speed v_t
  int width = 9;
  int height = 9;
  int horizon = 50;
  double gamma = 0.95;
  double agent_speed = 1.0;
  int treadmill_row = 4;
  GridState start{4, 4};
  int top_goal_row = 8;
  int bottom_goal_row = 0;
  double top_reward = 10.0;
  double bottom_reward = 1.0;

  int num_states() const { return width * height; }
  int index(const GridState& s) const { return s.y * width + s.x; }
  GridState state(int index) const { return {index % width, index / width}; }
  bool treadmill_passable() const { return agent_speed > perturbation; }
  void validate() const;
};

GridTask make_reward_slope(double slope);
GridTask make_treadmill(double treadmill_speed);

bool is_terminal(const GridTask& task, const GridState& s);

/// Deterministic successor cell (walls clamp, treadmill pushes back).
GridState next_state(const GridTask& task, const GridState& s, int action);
/// Reward received for taking `action` in `s`.
double reward(const GridTask& task, const GridState& s, int action);

struct StepResult {
  GridState next;
  double reward = 0;
  bool done = false;
};

GridState env_reset(const GridTask& task);
/// Throws std::logic_error when stepping from a terminal state.
StepResult env_step(const GridTask& task, const GridState& s, int action);

/// (s, a) encoded as [x scaled to [-1,1], y scaled to [-1,1], one-hot(a)].
inline constexpr Index probe_input_dim = 6;
Eigen::VectorXd encode_state_action(const GridTask& task, const GridState& s, int action);
std::pair<GridState, int> decode_state_action(const GridTask& task, const Eigen::VectorXd& x);

/// Output of the perturbing function at (s, a): the reward for reward_slope
/// (m = 1), the displacement s' - s for treadmill (m = 2).
Eigen::VectorXd perturbing_function(const GridTask& task, const GridState& s, int action);
Index perturbing_output_dim(TaskKind kind);

struct PerturbationSample {
  GridState state;
  int action = 0;
  double reward = 0;
  GridState next;
};

/// Probe data labelled by the task's true perturbing function; (s, a) pairs
/// are uniform over non-terminal states and all actions.
struct PerturbationDataset {
  TaskKind kind = TaskKind::reward_slope;
  std::vector<PerturbationSample> samples;

  Index size() const { return static_cast<Index>(samples.size()); }
  /// Encoded inputs and perturbing-function outputs for the encoder.
  FunctionDataset to_function_dataset(const GridTask& task) const;
};

PerturbationDataset collect_perturbation_data(const GridTask& task, Index size, std::uint64_t seed);

/// Representation of the task's perturbing function in a trained encoder.
Representation<double> encode_task(const BasisSet<double>& encoder, const GridTask& task,
                                   const PerturbationDataset& data);

/// The family of perturbing functions as a function space, so the encoder
/// can be trained with the generic training loop. Hidden parameter is the
/// perturbation, uniform over [lo, hi].
class PerturbationSpace : public spaces::FunctionSpace {
 public:
  PerturbationSpace(GridTask prototype, double lo, double hi, std::uint64_t master_seed);

  std::string kind() const override { return "grid_" + to_string(prototype_.kind); }
  Index input_dim() const override { return probe_input_dim; }
  Index output_dim() const override { return perturbing_output_dim(prototype_.kind); }
  std::vector<std::string> hidden_names() const override {
    return {prototype_.kind == TaskKind::reward_slope ? "slope" : "treadmill_speed"};
  }
  Eigen::MatrixXd sample_inputs(Index count, Rng& rng) const override;
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& hidden, const Eigen::MatrixXd& inputs) const override;

  GridTask task_for(double perturbation) const;

 protected:
  Eigen::VectorXd draw_hidden(Rng& rng) const override;

 private:
  GridTask prototype_;
  double lo_, hi_;
  std::vector<GridState> actionable_;
};

}  // namespace fenc::rl
