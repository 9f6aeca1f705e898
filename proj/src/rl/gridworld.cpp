#include "fenc/rl/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fenc::rl {

std::string to_string(TaskKind kind) {
  return kind == TaskKind::reward_slope ? "reward_slope" : "treadmill";
}

TaskKind parse_task_kind(const std::string& name) {
  if (name == "reward_slope") return TaskKind::reward_slope;
  if (name == "treadmill") return TaskKind::treadmill;
  throw std::invalid_argument("unknown task kind '" + name + "' (expected reward_slope|treadmill)");
}

std::string action_name(int action) {
  static const char* names[] = {"left", "right", "up", "down"};
  if (action < 0 || action >= num_actions) throw std::out_of_range("action_name: bad action");
  return names[action];
}

namespace {

bool inside(const GridTask& t, const GridState& s) {
  return s.x >= 0 && s.x < t.width && s.y >= 0 && s.y < t.height;
}

void check_action(int action) {
  if (action < 0 || action >= num_actions) throw std::out_of_range("action must be in [0, 4)");
}

constexpr int dx_of[] = {-1, 1, 0, 0};
constexpr int dy_of[] = {0, 0, 1, -1};

}  // namespace

void GridTask::validate() const {
  if (width < 3 || height < 3) throw std::invalid_argument("GridTask: grid must be at least 3x3");
  if (horizon < 1) throw std::invalid_argument("GridTask: horizon must be >= 1");
  if (!(gamma > 0 && gamma <= 1)) throw std::invalid_argument("GridTask: gamma must lie in (0, 1]");
  if (!std::isfinite(perturbation)) throw std::invalid_argument("GridTask: non-finite perturbation");
  if (!inside(*this, start)) throw std::invalid_argument("GridTask: start outside grid");
  if (kind == TaskKind::treadmill) {
    if (perturbation < 0) throw std::invalid_argument("GridTask: treadmill speed must be >= 0");
    if (treadmill_row <= 0 || treadmill_row >= height - 1)
      throw std::invalid_argument("GridTask: treadmill row must be interior");
    if (top_goal_row <= treadmill_row || top_goal_row >= height || bottom_goal_row < 0 ||
        bottom_goal_row >= treadmill_row - 1 || start.y >= treadmill_row || start.y <= bottom_goal_row)
      throw std::invalid_argument("GridTask: goals/start inconsistent with treadmill row");
  } else if (start.x <= 0 || start.x >= width - 1) {
    throw std::invalid_argument("GridTask: reward_slope start must be off the terminal columns");
  }
}

GridTask make_reward_slope(double slope) {
  GridTask t;
  t.kind = TaskKind::reward_slope;
  t.perturbation = slope;
  t.start = {t.width / 2, t.height / 2};
  t.validate();
  return t;
}

GridTask make_treadmill(double treadmill_speed) {
  GridTask t;
  t.kind = TaskKind::treadmill;
  t.perturbation = treadmill_speed;
  t.start = {t.width / 2, t.treadmill_row - 1};
  t.validate();
  return t;
}

bool is_terminal(const GridTask& task, const GridState& s) {
  if (task.kind == TaskKind::reward_slope) return s.x == 0 || s.x == task.width - 1;
  return s.y == task.top_goal_row || s.y == task.bottom_goal_row;
}

GridState next_state(const GridTask& task, const GridState& s, int action) {
  check_action(action);
  if (!inside(task, s)) throw std::out_of_range("next_state: state outside grid");
  auto clamp = [&](GridState n) {
    n.x = std::clamp(n.x, 0, task.width - 1);
    n.y = std::clamp(n.y, 0, task.height - 1);
    return n;
  };
  GridState n = clamp({s.x + dx_of[action], s.y + dy_of[action]});
  if (task.kind == TaskKind::treadmill && !task.treadmill_passable()) {
    // The belt carries anything on it back to the row below.
    if (s.y == task.treadmill_row) return clamp({s.x + dx_of[action], task.treadmill_row - 1});
    if (n.y == task.treadmill_row) return s;
  }
  return n;
}

double reward(const GridTask& task, const GridState& s, int action) {
  const GridState n = next_state(task, s, action);
  if (task.kind == TaskKind::reward_slope) return task.perturbation * (n.x - task.width / 2);
  if (n.y == task.top_goal_row) return task.top_reward;
  if (n.y == task.bottom_goal_row) return task.bottom_reward;
  return 0.0;
}

GridState env_reset(const GridTask& task) {
  task.validate();
  return task.start;
}

StepResult env_step(const GridTask& task, const GridState& s, int action) {
  if (is_terminal(task, s)) throw std::logic_error("env_step: episode already finished");
  StepResult r;
  r.next = next_state(task, s, action);
  r.reward = reward(task, s, action);
  r.done = is_terminal(task, r.next);
  return r;
}

Eigen::VectorXd encode_state_action(const GridTask& task, const GridState& s, int action) {
  check_action(action);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(probe_input_dim);
  x(0) = 2.0 * s.x / (task.width - 1) - 1.0;
  x(1) = 2.0 * s.y / (task.height - 1) - 1.0;
  x(2 + action) = 1.0;
  return x;
}

std::pair<GridState, int> decode_state_action(const GridTask& task, const Eigen::VectorXd& x) {
  if (x.size() != probe_input_dim) throw std::invalid_argument("decode_state_action: expected 6 values");
  GridState s{static_cast<int>(std::lround((x(0) + 1.0) * (task.width - 1) / 2.0)),
              static_cast<int>(std::lround((x(1) + 1.0) * (task.height - 1) / 2.0))};
  Eigen::Index a;
  x.tail(num_actions).maxCoeff(&a);
  if (!inside(task, s)) throw std::out_of_range("decode_state_action: state outside grid");
  return {s, static_cast<int>(a)};
}

Index perturbing_output_dim(TaskKind kind) { return kind == TaskKind::reward_slope ? 1 : 2; }

Eigen::VectorXd perturbing_function(const GridTask& task, const GridState& s, int action) {
  if (task.kind == TaskKind::reward_slope) return Eigen::VectorXd::Constant(1, reward(task, s, action));
  const GridState n = next_state(task, s, action);
  return Eigen::Vector2d(n.x - s.x, n.y - s.y);
}

namespace {

std::vector<GridState> actionable_states(const GridTask& task) {
  std::vector<GridState> out;
  for (int k = 0; k < task.num_states(); ++k)
    if (!is_terminal(task, task.state(k))) out.push_back(task.state(k));
  return out;
}

}  // namespace

FunctionDataset PerturbationDataset::to_function_dataset(const GridTask& task) const {
  if (task.kind != kind) throw std::invalid_argument("perturbation data belongs to another task kind");
  const Index m = perturbing_output_dim(kind);
  FunctionDataset d;
  d.inputs.resize(probe_input_dim, size());
  d.outputs.resize(m, size());
  for (Index k = 0; k < size(); ++k) {
    const auto& s = samples[k];
    d.inputs.col(k) = encode_state_action(task, s.state, s.action);
    if (kind == TaskKind::reward_slope)
      d.outputs(0, k) = s.reward;
    else
      d.outputs.col(k) = Eigen::Vector2d(s.next.x - s.state.x, s.next.y - s.state.y);
  }
  d.sampling = SamplingNote::uniform;
  return d;
}

PerturbationDataset collect_perturbation_data(const GridTask& task, Index size, std::uint64_t seed) {
  if (size < 1) throw std::invalid_argument("collect_perturbation_data: size must be >= 1");
  const auto states = actionable_states(task);
  Rng rng(derive_seed(seed, stream::probes));
  PerturbationDataset data;
  data.kind = task.kind;
  data.samples.reserve(size);
  for (Index k = 0; k < size; ++k) {
    const auto pick = rng.below(states.size() * num_actions);
    PerturbationSample s;
    s.state = states[pick / num_actions];
    s.action = static_cast<int>(pick % num_actions);
    s.next = next_state(task, s.state, s.action);
    s.reward = reward(task, s.state, s.action);
    data.samples.push_back(s);
  }
  return data;
}

Representation<double> encode_task(const BasisSet<double>& encoder, const GridTask& task,
                                   const PerturbationDataset& data) {
  return estimate_coefficients(encoder, data.to_function_dataset(task));
}

// ---------------------------------------------------------------------------

PerturbationSpace::PerturbationSpace(GridTask prototype, double lo, double hi, std::uint64_t master_seed)
    : FunctionSpace(master_seed), prototype_(prototype), lo_(lo), hi_(hi) {
  prototype_.validate();
  if (!(lo <= hi)) throw std::invalid_argument("PerturbationSpace: need lo <= hi");
  actionable_ = actionable_states(prototype_);
}

GridTask PerturbationSpace::task_for(double perturbation) const {
  GridTask t = prototype_;
  t.perturbation = perturbation;
  t.validate();
  return t;
}

Eigen::MatrixXd PerturbationSpace::sample_inputs(Index count, Rng& rng) const {
  Eigen::MatrixXd x(probe_input_dim, count);
  for (Index k = 0; k < count; ++k) {
    const auto pick = rng.below(actionable_.size() * num_actions);
    x.col(k) = encode_state_action(prototype_, actionable_[pick / num_actions],
                                   static_cast<int>(pick % num_actions));
  }
  return x;
}

Eigen::MatrixXd PerturbationSpace::evaluate(const Eigen::VectorXd& hidden,
                                            const Eigen::MatrixXd& inputs) const {
  if (hidden.size() != 1) throw std::invalid_argument("PerturbationSpace: expected one hidden value");
  if (inputs.rows() != probe_input_dim) throw std::invalid_argument("PerturbationSpace: bad input dim");
  const GridTask task = task_for(hidden(0));
  Eigen::MatrixXd out(output_dim(), inputs.cols());
  for (Index k = 0; k < inputs.cols(); ++k) {
    const auto [s, a] = decode_state_action(task, inputs.col(k));
    out.col(k) = perturbing_function(task, s, a);
  }
  return out;
}

Eigen::VectorXd PerturbationSpace::draw_hidden(Rng& rng) const {
  return Eigen::VectorXd::Constant(1, rng.uniform(lo_, hi_));
}

}  // namespace fenc::rl
