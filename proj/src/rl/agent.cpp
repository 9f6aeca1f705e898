#include "fenc/rl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>

#include "fenc/encoder/coefficients.hpp"

namespace fenc::rl {

std::string to_string(QHead head) { return head == QHead::plain ? "plain" : "bilinear"; }

QHead parse_q_head(const std::string& name) {
  if (name == "plain") return QHead::plain;
  if (name == "bilinear") return QHead::bilinear;
  throw std::invalid_argument("unknown Q head '" + name + "' (expected plain|bilinear)");
}

ConditionedQ::ConditionedQ(const GridTask& prototype, Index context_dim, QHead head,
                           std::vector<Index> hidden, std::uint64_t seed)
    : width_(prototype.width), height_(prototype.height), context_dim_(context_dim), head_(head) {
  if (context_dim < 1) throw std::invalid_argument("ConditionedQ: context_dim must be >= 1");
  arch_.input_dim = prototype.num_states() + context_dim;
  arch_.output_dim = 1;
  arch_.num_heads = head == QHead::plain ? num_actions : num_actions * context_dim;
  arch_.hidden = std::move(hidden);
  arch_.activation = nn::Activation::tanh;
  params_ = nn::init_params<double>(arch_, seed);
}

void ConditionedQ::set_params(nn::ParameterBlock<double> params) {
  if (!params.congruent(arch_)) throw std::invalid_argument("ConditionedQ: params do not match the network");
  params_ = std::move(params);
}

Eigen::VectorXd ConditionedQ::input(const GridState& s, const Eigen::VectorXd& context) const {
  if (context.size() != context_dim_) throw std::invalid_argument("ConditionedQ: context size mismatch");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(arch_.input_dim);
  x(s.y * width_ + s.x) = 1.0;
  x.tail(context_dim_) = context;
  return x;
}

Eigen::MatrixXd ConditionedQ::combine(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& contexts) const {
  if (head_ == QHead::plain) return raw;
  const Index k = context_dim_;
  Eigen::MatrixXd q(num_actions, raw.cols());
  for (Index c = 0; c < raw.cols(); ++c)
    for (int a = 0; a < num_actions; ++a) q(a, c) = raw.col(c).segment(a * k, k).dot(contexts.col(c));
  return q;
}

Eigen::MatrixXd ConditionedQ::q_batch(const nn::ParameterBlock<double>& params, const Eigen::MatrixXd& inputs,
                                      const Eigen::MatrixXd& contexts) const {
  return combine(nn::forward_batch(params, arch_, inputs), contexts);
}

Eigen::Vector4d ConditionedQ::q_values(const GridState& s, const Eigen::VectorXd& context) const {
  const Eigen::MatrixXd q = q_batch(params_, input(s, context), context);
  return q.col(0);
}

int ConditionedQ::greedy(const GridState& s, const Eigen::VectorXd& context) const {
  Eigen::Index a;
  q_values(s, context).maxCoeff(&a);
  return static_cast<int>(a);
}

// ---------------------------------------------------------------------------

void AgentConfig::validate() const {
  if (episodes < 0) throw std::invalid_argument("agent: episodes must be >= 0");
  if (batch_size < 1 || replay_capacity < batch_size)
    throw std::invalid_argument("agent: need 1 <= batch_size <= replay_capacity");
  if (warmup_transitions < batch_size) throw std::invalid_argument("agent: warmup must cover one batch");
  if (target_sync < 1) throw std::invalid_argument("agent: target_sync must be >= 1");
  if (!(epsilon_end >= 0 && epsilon_end <= epsilon_start && epsilon_start <= 1))
    throw std::invalid_argument("agent: need 0 <= epsilon_end <= epsilon_start <= 1");
  if (!(epsilon_decay_fraction > 0 && epsilon_decay_fraction <= 1))
    throw std::invalid_argument("agent: epsilon_decay_fraction must lie in (0, 1]");
  if (probe_size < 1) throw std::invalid_argument("agent: probe_size must be >= 1");
  if (baseline_episodes < 1) throw std::invalid_argument("agent: baseline_episodes must be >= 1");
  if (zero_context && head == QHead::bilinear)
    throw std::invalid_argument("agent: a bilinear head with a zero context is identically zero");
  optimizer.validate();
}

double AgentConfig::epsilon_at(int episode) const {
  const double horizon = std::max(1.0, epsilon_decay_fraction * episodes);
  const double t = std::min(1.0, episode / horizon);
  return epsilon_start + t * (epsilon_end - epsilon_start);
}

TaskSampler finite_task_sampler(const GridTask& prototype, std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("finite_task_sampler: no values");
  return [prototype, values = std::move(values)](int, Rng& rng) {
    GridTask t = prototype;
    t.perturbation = values[rng.below(values.size())];
    t.validate();
    return t;
  };
}

Eigen::VectorXd task_context(const BasisSet<double>& fe, const GridTask& task,
                             const PerturbationDataset& probes, bool zero_context) {
  const Index k = fe.num_basis() * fe.output_dim();
  if (zero_context) return Eigen::VectorXd::Zero(k);
  return encode_task(fe, task, probes).coefficients.reshaped();
}

namespace {

struct Transition {
  int state, action, next;
  double reward;
  bool done;
  int context;  // index into the per-episode context store
};

double random_baseline(const std::vector<GridTask>& tasks, int episodes, std::uint64_t seed) {
  if (tasks.empty()) return 0.0;
  double total = 0;
  int count = 0;
  for (std::size_t t = 0; t < tasks.size(); ++t)
    for (int e = 0; e < episodes; ++e) {
      Rng rng(derive_seed(seed, stream::exploration, t * 100003 + e));
      total += rollout(tasks[t], [&](const GridState&) { return static_cast<int>(rng.below(num_actions)); })
                   .discounted_return;
      ++count;
    }
  return total / count;
}

}  // namespace

AgentTrainResult train_agent(const BasisSet<double>& fe, const GridTask& prototype,
                             const TaskSampler& sampler, const std::vector<GridTask>& baseline_tasks,
                             const AgentConfig& config) {
  config.validate();
  prototype.validate();
  if (fe.input_dim() != probe_input_dim || fe.output_dim() != perturbing_output_dim(prototype.kind))
    throw std::invalid_argument("train_agent: encoder does not match the task's perturbing function");

  const Index k = fe.num_basis() * fe.output_dim();
  AgentTrainResult result;
  result.zero_context = config.zero_context;
  result.agent = ConditionedQ(prototype, k, config.head, config.hidden, config.seed);
  result.random_baseline = random_baseline(baseline_tasks, config.baseline_episodes, config.seed);

  ConditionedQ& agent = result.agent;
  auto target = agent.params();
  auto opt = nn::OptimizerState<double>::create(agent.arch(), config.optimizer);
  auto grads = nn::GradientBlock<double>::zeros(agent.arch());

  std::vector<Transition> replay;
  replay.reserve(config.replay_capacity);
  std::size_t replay_next = 0;
  std::vector<Eigen::VectorXd> contexts;

  Rng task_rng(derive_seed(config.seed, stream::episodes));
  Rng explore(derive_seed(config.seed, stream::exploration));
  Rng sample_rng(derive_seed(config.seed, stream::replay));

  const Index in_dim = agent.arch().input_dim;
  const int B = config.batch_size;
  Eigen::MatrixXd x(in_dim, B), xn(in_dim, B), ctx(k, B);
  std::vector<int> batch(B);

  auto update = [&]() {
    x.setZero();
    xn.setZero();
    for (int c = 0; c < B; ++c) {
      batch[c] = static_cast<int>(sample_rng.below(replay.size()));
      const auto& tr = replay[batch[c]];
      const auto& cv = contexts[tr.context];
      x(tr.state, c) = 1.0;
      xn(tr.next, c) = 1.0;
      x.col(c).tail(k) = cv;
      xn.col(c).tail(k) = cv;
      ctx.col(c) = cv;
    }
    const Eigen::MatrixXd qn = agent.q_batch(target, xn, ctx);
    const auto trace = nn::forward_trace(agent.params(), agent.arch(), x);
    const Eigen::MatrixXd q = agent.combine(trace.output(), ctx);
    Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(agent.arch().output_units(), B);
    for (int c = 0; c < B; ++c) {
      const auto& tr = replay[batch[c]];
      const double y = tr.reward + (tr.done ? 0.0 : prototype.gamma * qn.col(c).maxCoeff());
      const double g = 2.0 * (q(tr.action, c) - y) / B;
      if (agent.head() == QHead::plain)
        upstream(tr.action, c) = g;
      else
        upstream.col(c).segment(tr.action * k, k) = g * ctx.col(c);
    }
    grads.set_zero();
    nn::backward_batch(agent.params(), agent.arch(), trace, upstream, grads);
    nn::optimizer_step(opt, agent.params(), grads);
    if (++result.gradient_steps % config.target_sync == 0) target = agent.params();
  };

  for (int ep = 0; ep < config.episodes; ++ep) {
    const GridTask task = sampler(ep, task_rng);
    if (task.kind != prototype.kind) throw std::invalid_argument("train_agent: sampler changed task kind");
    const auto probes =
        collect_perturbation_data(task, config.probe_size, derive_seed(config.seed, stream::probes, ep));
    contexts.push_back(task_context(fe, task, probes, config.zero_context));
    const int cidx = static_cast<int>(contexts.size()) - 1;
    const double eps = config.epsilon_at(ep);

    GridState s = env_reset(task);
    double ret = 0, discount = 1;
    for (int t = 0; t < task.horizon; ++t) {
      int a;
      if (explore.bernoulli(eps))
        a = static_cast<int>(explore.below(num_actions));
      else
        a = agent.greedy(s, contexts[cidx]);
      const auto step = env_step(task, s, a);
      const Transition tr{task.index(s), a, task.index(step.next), step.reward, step.done, cidx};
      if (static_cast<int>(replay.size()) < config.replay_capacity)
        replay.push_back(tr);
      else
        replay[replay_next] = tr;
      replay_next = (replay_next + 1) % config.replay_capacity;

      ret += discount * step.reward;
      discount *= task.gamma;
      s = step.next;
      if (static_cast<int>(replay.size()) >= config.warmup_transitions) update();
      if (step.done) break;
    }
    result.episode_returns.push_back(ret);
  }
  return result;
}

std::vector<double> learning_curve(const std::vector<double>& returns, int window) {
  if (window < 1) throw std::invalid_argument("learning_curve: window must be >= 1");
  std::vector<double> out(returns.size());
  double sum = 0;
  for (std::size_t e = 0; e < returns.size(); ++e) {
    sum += returns[e];
    if (e >= static_cast<std::size_t>(window)) sum -= returns[e - window];
    out[e] = sum / std::min<double>(e + 1, window);
  }
  return out;
}

// ---------------------------------------------------------------------------

ActionSelector greedy_selector(const ConditionedQ& agent) {
  return [&agent](const GridTask&, const GridState& s, const Eigen::VectorXd& c) { return agent.greedy(s, c); };
}

ActionSelector oracle_selector() {
  auto cache = std::make_shared<std::map<std::pair<int, double>, OracleSolution>>();
  return [cache](const GridTask& task, const GridState& s, const Eigen::VectorXd&) {
    const auto key = std::make_pair(static_cast<int>(task.kind), task.perturbation);
    auto it = cache->find(key);
    if (it == cache->end()) it = cache->emplace(key, solve_oracle(task)).first;
    return it->second.act(task, s);
  };
}

double oracle_return(const GridTask& task) {
  const auto sol = solve_oracle(task);
  return rollout(task, [&](const GridState& s) { return sol.act(task, s); }).discounted_return;
}

double ZeroShotReport::mean_oracle_ratio() const {
  if (tasks.empty()) return 0.0;
  double total = 0;
  for (const auto& t : tasks) total += t.oracle_ratio;
  return total / tasks.size();
}

int ZeroShotReport::correct_decisions() const {
  return static_cast<int>(std::count_if(tasks.begin(), tasks.end(), [](const auto& t) { return t.correct_decision; }));
}

bool decision_correct(const GridTask& task, int first_action, const std::string& outcome) {
  if (task.kind == TaskKind::reward_slope) {
    if (task.perturbation > 0) return first_action == right;
    if (task.perturbation < 0) return first_action == left;
    return true;  // c = 0: every policy is optimal
  }
  return outcome == (task.treadmill_passable() ? "top" : "bottom");
}

namespace {

template <typename T>
T most_frequent(const std::vector<T>& xs) {
  std::map<T, int> counts;
  for (const auto& x : xs) ++counts[x];
  return std::max_element(counts.begin(), counts.end(),
                          [](const auto& a, const auto& b) { return a.second < b.second; })
      ->first;
}

}  // namespace

ZeroShotReport evaluate_policy(const ActionSelector& act, const ContextProvider& context,
                               const std::vector<GridTask>& tasks, const ZeroShotConfig& config) {
  if (config.episodes_per_task < 1) throw std::invalid_argument("evaluate: episodes_per_task must be >= 1");
  ZeroShotReport report;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const GridTask& task = tasks[t];
    TaskOutcome row;
    row.kind = task.kind;
    row.perturbation = task.perturbation;
    std::vector<int> firsts;
    std::vector<std::string> outcomes;
    double total = 0;
    for (int e = 0; e < config.episodes_per_task; ++e) {
      const auto probes = collect_perturbation_data(
          task, config.probe_size, derive_seed(config.seed, stream::heldout, t * 1000 + e));
      const Eigen::VectorXd c = context(task, probes);
      const auto r = rollout(task, [&](const GridState& s) { return act(task, s, c); });
      total += r.discounted_return;
      firsts.push_back(r.first_action);
      outcomes.push_back(outcome_label(task, r));
    }
    row.mean_return = total / config.episodes_per_task;
    row.oracle_return = oracle_return(task);
    row.oracle_ratio = row.mean_return / row.oracle_return;
    row.first_action = most_frequent(firsts);
    row.outcome = most_frequent(outcomes);
    row.correct_decision = decision_correct(task, row.first_action, row.outcome);
    report.tasks.push_back(row);
  }
  return report;
}

ZeroShotReport evaluate_zero_shot(const AgentTrainResult& trained, const BasisSet<double>& fe,
                                  const std::vector<GridTask>& held_out, const ZeroShotConfig& config) {
  const bool zero = trained.zero_context;
  return evaluate_policy(
      greedy_selector(trained.agent),
      [&](const GridTask& task, const PerturbationDataset& probes) { return task_context(fe, task, probes, zero); },
      held_out, config);
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_report_csv(const std::string& path, const ZeroShotReport& report) {
  auto out = open_out(path);
  out << "task_kind,perturbation_value,mean_return,oracle_return,oracle_ratio,first_action\n";
  for (const auto& t : report.tasks)
    out << to_string(t.kind) << ',' << num(t.perturbation) << ',' << num(t.mean_return) << ','
        << num(t.oracle_return) << ',' << num(t.oracle_ratio) << ',' << action_name(t.first_action) << '\n';
}

void write_learning_curve_csv(const std::string& path, const std::vector<double>& returns, int window) {
  auto out = open_out(path);
  out << "episode,mean_return\n";
  const auto curve = learning_curve(returns, window);
  for (std::size_t e = 0; e < curve.size(); ++e) out << e << ',' << num(curve[e]) << '\n';
}

}  // namespace fenc::rl
