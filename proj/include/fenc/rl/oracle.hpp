#pragma once

#include <vector>

#include <Eigen/Core>

#include "fenc/rl/gridworld.hpp"

namespace fenc::rl {

/// Exact solution of a gridworld by value iteration.
struct OracleSolution {
  Eigen::MatrixXd q;           // num_states x 4
  Eigen::VectorXd v;           // num_states
  std::vector<int> policy;     // greedy action per state (lowest index on ties)
  double bellman_residual = 0; // max |T V - V| at termination
  int iterations = 0;

  int act(const GridTask& task, const GridState& s) const { return policy[task.index(s)]; }
};

/// Iterates to a Bellman residual below `tolerance`. Terminal states have
/// value zero.
OracleSolution solve_oracle(const GridTask& task, double tolerance = 1e-10, int max_iterations = 100000);

struct Rollout {
  double discounted_return = 0;
  int steps = 0;
  int first_action = -1;
  GridState final_state;
  bool terminated = false;
};

/// Follows `policy(state)` from the start state for at most task.horizon steps.
template <typename Policy>
Rollout rollout(const GridTask& task, Policy&& policy) {
  Rollout r;
  GridState s = env_reset(task);
  double discount = 1.0;
  for (int t = 0; t < task.horizon; ++t) {
    const int a = policy(s);
    if (t == 0) r.first_action = a;
    const auto step = env_step(task, s, a);
    r.discounted_return += discount * step.reward;
    discount *= task.gamma;
    s = step.next;
    ++r.steps;
    if (step.done) {
      r.terminated = true;
      break;
    }
  }
  r.final_state = s;
  return r;
}

/// Where an episode ended up: "top", "bottom", "left", "right" or "none".
std::string outcome_label(const GridTask& task, const Rollout& r);

}  // namespace fenc::rl
