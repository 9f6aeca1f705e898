#include "fenc/rl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fenc::rl {

OracleSolution solve_oracle(const GridTask& task, double tolerance, int max_iterations) {
  task.validate();
  if (!(task.gamma < 1)) throw std::invalid_argument("solve_oracle: needs gamma < 1");
  const int S = task.num_states();

  // Transition tables are fixed; precompute them once.
  std::vector<int> next(S * num_actions, 0);
  std::vector<double> rew(S * num_actions, 0.0);
  std::vector<char> terminal(S, 0);
  for (int k = 0; k < S; ++k) {
    const GridState s = task.state(k);
    terminal[k] = is_terminal(task, s);
    if (terminal[k]) continue;
    for (int a = 0; a < num_actions; ++a) {
      next[k * num_actions + a] = task.index(next_state(task, s, a));
      rew[k * num_actions + a] = reward(task, s, a);
    }
  }

  OracleSolution sol;
  sol.q = Eigen::MatrixXd::Zero(S, num_actions);
  sol.v = Eigen::VectorXd::Zero(S);
  auto backup = [&](const Eigen::VectorXd& v) {
    for (int k = 0; k < S; ++k) {
      if (terminal[k]) continue;
      for (int a = 0; a < num_actions; ++a) {
        const int n = next[k * num_actions + a];
        sol.q(k, a) = rew[k * num_actions + a] + (terminal[n] ? 0.0 : task.gamma * v(n));
      }
    }
  };

  double residual = INFINITY;
  int it = 0;
  while (residual >= tolerance) {
    if (it++ >= max_iterations) throw std::runtime_error("solve_oracle: value iteration did not converge");
    backup(sol.v);
    Eigen::VectorXd v = sol.q.rowwise().maxCoeff();
    for (int k = 0; k < S; ++k)
      if (terminal[k]) v(k) = 0;
    residual = (v - sol.v).cwiseAbs().maxCoeff();
    sol.v = std::move(v);
  }
  backup(sol.v);
  sol.bellman_residual = residual;
  sol.iterations = it;

  sol.policy.assign(S, 0);
  for (int k = 0; k < S; ++k) {
    int best = 0;
    for (int a = 1; a < num_actions; ++a)
      if (sol.q(k, a) > sol.q(k, best) + 1e-12) best = a;
    sol.policy[k] = best;
  }
  return sol;
}

std::string outcome_label(const GridTask& task, const Rollout& r) {
  if (!r.terminated) return "none";
  if (task.kind == TaskKind::treadmill) return r.final_state.y == task.top_goal_row ? "top" : "bottom";
  return r.final_state.x == 0 ? "left" : "right";
}

}  // namespace fenc::rl
