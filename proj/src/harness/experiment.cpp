#include "fenc/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "fenc/encoder/coefficients.hpp"
#include "fenc/encoder/training.hpp"
#include "fenc/nn/checkpoint.hpp"

namespace fenc::harness {

namespace {

using Clock = std::chrono::steady_clock;

constexpr Index ortho_probe_count = 10000;
constexpr int curve_window = 50;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) { open_out(path) << text; }

void write_key_values(const fs::path& path, const std::map<std::string, std::string>& kv) {
  auto out = open_out(path);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

std::map<std::string, std::string> read_sidecar(const fs::path& path) {
  try {
    return read_key_values(path.string());
  } catch (const ConfigError& e) {
    throw std::runtime_error(std::string("bad sidecar: ") + e.what());
  }
}

fs::path seed_dir(const fs::path& root, std::uint64_t seed) { return root / ("seed_" + std::to_string(seed)); }

double mean_of(const std::vector<double>& xs, std::size_t first, std::size_t last) {
  double s = 0;
  for (std::size_t k = first; k < last; ++k) s += xs[k];
  return s / static_cast<double>(last - first);
}

void write_loss_curve(const fs::path& path, const std::vector<double>& loss,
                      const std::vector<double>* mean_loss = nullptr) {
  auto out = open_out(path);
  out << "step,loss" << (mean_loss ? ",mean_model_loss" : "") << '\n';
  for (std::size_t k = 0; k < loss.size(); ++k) {
    out << k << ',' << format_number(loss[k]);
    if (mean_loss) out << ',' << format_number((*mean_loss)[k]);
    out << '\n';
  }
}

void prepare_output(const ExperimentConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "config.txt", echo_config(cfg));
  std::ostringstream prov;
  prov << "version=" << FENC_VERSION << "\n"
       << "config_hash=" << config_hash(cfg) << "\n"
       << "benchmark=" << to_string(cfg.benchmark) << "\n";
  write_text(dir / "provenance.txt", prov.str());
}

/// Runs `body` once per seed; a throwing seed is recorded and skipped.
template <typename Body>
RunSummary for_each_seed(const ExperimentConfig& cfg, const fs::path& dir, const std::string& metrics_name,
                         Body&& body) {
  RunSummary summary;
  summary.config_hash = config_hash(cfg);
  summary.dir = dir;
  for (std::uint64_t seed : cfg.seeds) {
    const auto t0 = Clock::now();
    ResultsTable rows;
    try {
      fs::create_directories(seed_dir(dir, seed));
      body(seed, seed_dir(dir, seed), rows);
      summary.metrics.append(rows);
    } catch (const std::exception& e) {
      summary.failures.push_back({seed, e.what()});
    }
    summary.timings.add(summary.config_hash, seed, "wall_clock_seconds",
                        std::chrono::duration<double>(Clock::now() - t0).count());
  }
  summary.metrics.write_csv((dir / metrics_name).string());
  summary.timings.write_csv((dir / ("timings_" + metrics_name)).string());
  if (!summary.failures.empty()) {
    auto out = open_out(dir / "failures.log");
    for (const auto& f : summary.failures) out << "seed " << f.seed << ": " << f.what << '\n';
  }
  return summary;
}

std::unique_ptr<spaces::LinearSpanSpace> span_space(const ExperimentConfig& cfg, std::uint64_t seed) {
  std::unique_ptr<spaces::LinearSpanSpace> s;
  if (cfg.span_features == "legendre")
    s = std::make_unique<spaces::LinearSpanSpace>(spaces::LinearSpanSpace::legendre(cfg.span_dim, seed));
  else if (cfg.span_features == "trigonometric")
    s = std::make_unique<spaces::LinearSpanSpace>(spaces::LinearSpanSpace::trigonometric(cfg.span_dim, seed));
  else
    s = std::make_unique<spaces::LinearSpanSpace>(spaces::LinearSpanSpace::standard(cfg.span_dim, seed));
  if (cfg.halfspace_axis >= 0) s->restrict_to_halfspace(cfg.halfspace_axis, +1);
  return s;
}

Eigen::MatrixXd ortho_probes(const spaces::FunctionSpace& space, std::uint64_t seed) {
  Rng rng(derive_seed(seed, stream::probes));
  return space.sample_inputs(ortho_probe_count, rng);
}

void add_heldout(ResultsTable& rows, const std::string& hash, std::uint64_t seed, const std::string& suffix,
                 const HeldOutMetrics& m) {
  rows.add(hash, seed, "heldout_mse" + suffix, m.mse);
  rows.add(hash, seed, "heldout_relative_mse" + suffix, m.relative_mse);
}

std::map<std::string, std::string> encoder_meta(const ExperimentConfig& cfg, std::uint64_t seed) {
  return {{"benchmark", to_string(cfg.benchmark)},
          {"model", to_string(cfg.model)},
          {"b", std::to_string(cfg.num_basis)},
          {"example_fraction", format_number(cfg.example_fraction)},
          {"seed", std::to_string(seed)},
          {"config_hash", config_hash(cfg)}};
}

/// Trains and evaluates one encoder (plain or residual); returns the plain
/// basis for downstream use (the difference encoder for fe_residual).
BasisSet<double> train_encoder_seed(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& dir,
                                    ResultsTable& rows) {
  const std::string hash = config_hash(cfg);
  auto space = make_space(cfg, seed);
  const auto arch = cfg.encoder_arch(space->input_dim(), space->output_dim());
  const auto tc = cfg.train_config(seed);
  const auto hc = cfg.heldout_config(seed);
  const Eigen::MatrixXd probes = ortho_probes(*space, seed);
  auto meta = encoder_meta(cfg, seed);

  auto record_history = [&](const std::vector<double>& h) {
    if (h.empty()) return;
    const std::size_t w = std::min<std::size_t>(curve_window, h.size());
    rows.add(hash, seed, "initial_train_loss", mean_of(h, 0, w));
    rows.add(hash, seed, "final_train_loss", mean_of(h, h.size() - w, h.size()));
  };

  if (cfg.model == ModelKind::fe) {
    auto basis = BasisSet<double>::initialize(arch, seed);
    add_heldout(rows, hash, seed, "_initial", evaluate_heldout(basis, *space, hc));
    rows.add(hash, seed, "orthonormality_before", orthonormality_error(basis, probes));
    auto res = train(std::move(basis), *space, tc);
    record_history(res.history);
    add_heldout(rows, hash, seed, "", evaluate_heldout(res.basis, *space, hc));
    if (cfg.benchmark == Benchmark::linear_span && cfg.halfspace_axis >= 0) {
      auto other = span_space(cfg, seed);
      other->restrict_to_halfspace(cfg.halfspace_axis, -1);
      add_heldout(rows, hash, seed, "_ood", evaluate_heldout(res.basis, *other, hc));
    }
    rows.add(hash, seed, "orthonormality_after", orthonormality_error(res.basis, probes));
    write_loss_curve(dir / "loss_curve.csv", res.history);
    save_encoder(dir / "encoder.ckpt", res.basis, meta);
    return std::move(res.basis);
  }

  auto model = ResidualModel::initialize(arch, seed);
  add_heldout(rows, hash, seed, "_initial", evaluate_heldout(model, *space, hc));
  rows.add(hash, seed, "orthonormality_before", orthonormality_error(model.difference_encoder, probes));
  auto res = train_residual(std::move(model), *space, tc);
  record_history(res.history);
  add_heldout(rows, hash, seed, "", evaluate_heldout(res.model, *space, hc));
  rows.add(hash, seed, "orthonormality_after", orthonormality_error(res.model.difference_encoder, probes));
  write_loss_curve(dir / "loss_curve.csv", res.history, &res.mean_history);
  nn::save_checkpoint((dir / "mean.ckpt").string(), res.model.mean_arch, res.model.mean_params);
  save_encoder(dir / "encoder.ckpt", res.model.difference_encoder, meta);
  return std::move(res.model.difference_encoder);
}

ResidualModel load_residual(const fs::path& dir) {
  ResidualModel m;
  auto mean = nn::load_checkpoint((dir / "mean.ckpt").string());
  m.mean_arch = mean.arch;
  m.mean_params = std::move(mean.params);
  m.difference_encoder = load_encoder(dir / "encoder.ckpt");
  return m;
}

// --- rl -------------------------------------------------------------------

void train_rl_seed(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& dir, ResultsTable& rows) {
  const std::string hash = config_hash(cfg);
  const auto fe = train_encoder_seed(cfg, seed, dir, rows);
  const auto proto = rl_prototype(cfg.benchmark);
  const auto ac = agent_config(cfg, seed);
  const auto result = rl::train_agent(fe, proto, rl::finite_task_sampler(proto, cfg.rl_train_values),
                                      rl_tasks(cfg, cfg.rl_train_values), ac);
  nn::save_checkpoint((dir / "agent.ckpt").string(), result.agent.arch(), result.agent.params());
  write_key_values(dir / "agent.ckpt.meta",
                   {{"task_kind", rl::to_string(proto.kind)},
                    {"head", rl::to_string(result.agent.head())},
                    {"context_dim", std::to_string(result.agent.context_dim())},
                    {"zero_context", result.zero_context ? "true" : "false"},
                    {"encoder_id", fe.id()},
                    {"seed", std::to_string(seed)},
                    {"config_hash", hash}});
  rl::write_learning_curve_csv((dir / "learning_curve.csv").string(), result.episode_returns, curve_window);
  rows.add(hash, seed, "random_baseline", result.random_baseline);
  if (!result.episode_returns.empty())
    rows.add(hash, seed, "final_return", rl::learning_curve(result.episode_returns, curve_window).back());
  rows.add(hash, seed, "gradient_steps", static_cast<double>(result.gradient_steps));
}

void eval_rl_seed(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& dir, ResultsTable& rows) {
  const std::string hash = config_hash(cfg);
  const auto fe = load_encoder(dir / "encoder.ckpt");
  const auto meta = read_sidecar(dir / "agent.ckpt.meta");
  if (meta.at("encoder_id") != fe.id())
    throw std::runtime_error("agent checkpoint was trained against a different encoder");
  const auto ckpt = nn::load_checkpoint((dir / "agent.ckpt").string());
  const auto proto = rl_prototype(cfg.benchmark);
  rl::AgentTrainResult trained;
  trained.zero_context = meta.at("zero_context") == "true";
  trained.agent = rl::ConditionedQ(proto, std::stoll(meta.at("context_dim")), rl::parse_q_head(meta.at("head")),
                                   ckpt.arch.hidden, 0);
  trained.agent.set_params(ckpt.params);

  rl::ZeroShotConfig zc;
  zc.episodes_per_task = cfg.rl_episodes_per_task;
  zc.probe_size = cfg.rl_probe_size;
  zc.seed = derive_seed(seed, stream::heldout);
  const auto report = rl::evaluate_zero_shot(trained, fe, rl_tasks(cfg, cfg.rl_heldout_values), zc);
  rl::write_report_csv((dir / "report.csv").string(), report);
  {
    auto out = open_out(dir / "decisions.csv");
    out << "perturbation_value,first_action,outcome,correct\n";
    for (const auto& t : report.tasks)
      out << format_number(t.perturbation) << ',' << rl::action_name(t.first_action) << ',' << t.outcome << ','
          << (t.correct_decision ? 1 : 0) << '\n';
  }
  // The context each held-out task is conditioned on, for inspection.
  fs::create_directories(dir / "contexts");
  const auto held_out = rl_tasks(cfg, cfg.rl_heldout_values);
  for (std::size_t k = 0; k < held_out.size(); ++k) {
    const auto probes = rl::collect_perturbation_data(held_out[k], cfg.rl_probe_size, zc.seed + k);
    write_representation_csv(
        (dir / "contexts" / ("perturbation_" + format_number(held_out[k].perturbation) + ".csv")).string(),
        rl::encode_task(fe, held_out[k], probes));
  }
  rows.add(hash, seed, "mean_oracle_ratio", report.mean_oracle_ratio());
  rows.add(hash, seed, "correct_decisions", report.correct_decisions());
  rows.add(hash, seed, "num_heldout_tasks", static_cast<double>(report.tasks.size()));
  for (const auto& t : report.tasks) {
    const std::string at = "@perturbation=" + format_number(t.perturbation);
    rows.add(hash, seed, "oracle_ratio" + at, t.oracle_ratio);
    rows.add(hash, seed, "first_action" + at, t.first_action);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::unique_ptr<spaces::FunctionSpace> make_space(const ExperimentConfig& cfg, std::uint64_t seed) {
  switch (cfg.benchmark) {
    case Benchmark::linear_span:
      return span_space(cfg, seed);
    case Benchmark::sinusoid:
      return std::make_unique<spaces::SinusoidSpace>(seed);
    case Benchmark::hip_sysid:
      return std::make_unique<spaces::HipDynamicsSpace>(spaces::HipDynamicsSpec{}, seed);
    case Benchmark::rl_reward:
      return std::make_unique<rl::PerturbationSpace>(rl_prototype(cfg.benchmark), -1.0, 1.0, seed);
    case Benchmark::rl_treadmill:
      return std::make_unique<rl::PerturbationSpace>(rl_prototype(cfg.benchmark), 0.0, 2.0, seed);
  }
  throw ConfigError("unknown benchmark");
}

rl::GridTask rl_prototype(Benchmark b) {
  if (b == Benchmark::rl_reward) return rl::make_reward_slope(0.0);
  if (b == Benchmark::rl_treadmill) return rl::make_treadmill(0.0);
  throw ConfigError("not an rl benchmark: " + to_string(b));
}

rl::AgentConfig agent_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  rl::AgentConfig ac;
  ac.head = rl::parse_q_head(cfg.rl_head);
  ac.zero_context = cfg.rl_zero_context;
  ac.hidden = cfg.rl_hidden;
  ac.episodes = cfg.rl_episodes;
  ac.optimizer.learning_rate = cfg.rl_learning_rate;
  ac.probe_size = cfg.rl_probe_size;
  ac.seed = seed;
  return ac;
}

std::vector<rl::GridTask> rl_tasks(const ExperimentConfig& cfg, const std::vector<double>& values) {
  std::vector<rl::GridTask> tasks;
  for (double v : values) {
    auto t = rl_prototype(cfg.benchmark);
    t.perturbation = v;
    t.validate();
    tasks.push_back(t);
  }
  return tasks;
}

void save_encoder(const fs::path& path, const BasisSet<double>& basis,
                  const std::map<std::string, std::string>& extra) {
  nn::save_checkpoint(path.string(), basis.arch(), basis.params());
  auto meta = basis.metadata();
  for (const auto& [k, v] : extra) meta[k] = v;
  meta["basis_id"] = basis.id();
  meta["trained"] = basis.trained() ? "true" : "false";
  write_key_values(path.string() + ".meta", meta);
}

BasisSet<double> load_encoder(const fs::path& path) {
  auto ckpt = nn::load_checkpoint(path.string());
  BasisSet<double> basis(ckpt.arch, std::move(ckpt.params));
  const fs::path meta_path = path.string() + ".meta";
  if (fs::exists(meta_path)) {
    const auto meta = read_sidecar(meta_path);
    if (auto it = meta.find("basis_id"); it != meta.end() && it->second != basis.id())
      throw nn::CheckpointError(path.string() + ": parameters do not match the sidecar's basis_id");
    for (const auto& [k, v] : meta)
      if (k != "basis_id" && k != "trained") basis.metadata()[k] = v;
    if (auto it = meta.find("trained"); it != meta.end()) basis.mark_trained(it->second == "true");
  }
  return basis;
}

RunSummary run(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = cfg.output_dir;
  prepare_output(cfg, dir);
  if (is_rl(cfg.benchmark)) {
    return for_each_seed(cfg, dir, "metrics.csv", [&](std::uint64_t seed, const fs::path& sd, ResultsTable& rows) {
      train_rl_seed(cfg, seed, sd, rows);
      eval_rl_seed(cfg, seed, sd, rows);
    });
  }
  return for_each_seed(cfg, dir, "metrics.csv", [&](std::uint64_t seed, const fs::path& sd, ResultsTable& rows) {
    train_encoder_seed(cfg, seed, sd, rows);
  });
}

RunSummary evaluate_run(const ExperimentConfig& cfg) {
  cfg.validate();
  if (is_rl(cfg.benchmark)) return rl_eval(cfg);
  const fs::path dir = cfg.output_dir;
  if (!fs::exists(dir)) throw ConfigError("no run directory at " + dir.string());
  const std::string hash = config_hash(cfg);
  return for_each_seed(cfg, dir, "eval_metrics.csv", [&](std::uint64_t seed, const fs::path& sd, ResultsTable& rows) {
    auto space = make_space(cfg, seed);
    const auto hc = cfg.heldout_config(seed);
    if (cfg.model == ModelKind::fe_residual) {
      add_heldout(rows, hash, seed, "", evaluate_heldout(load_residual(sd), *space, hc));
      return;
    }
    const auto basis = load_encoder(sd / "encoder.ckpt");
    add_heldout(rows, hash, seed, "", evaluate_heldout(basis, *space, hc));
    if (cfg.benchmark == Benchmark::linear_span && cfg.halfspace_axis >= 0) {
      auto other = span_space(cfg, seed);
      other->restrict_to_halfspace(cfg.halfspace_axis, -1);
      add_heldout(rows, hash, seed, "_ood", evaluate_heldout(basis, *other, hc));
    }
  });
}

namespace {

/// min/median/max over seeds per (metric, axis value), recomputed from the
/// sweep table alone; a trailing `inversions` row per metric counts how often
/// the median rises between consecutive grid values.
void write_sweep_summary(const fs::path& path, const ResultsTable& table, const std::string& axis) {
  std::map<std::string, std::map<double, std::vector<double>>> cells;
  const std::string tag = "@" + axis + "=";
  for (const auto& r : table.rows()) {
    const auto at = r.metric.rfind(tag);
    if (at == std::string::npos) continue;
    cells[r.metric.substr(0, at)][std::stod(r.metric.substr(at + tag.size()))].push_back(r.value);
  }
  auto out = open_out(path);
  out << "metric," << axis << ",min,median,max,seeds\n";
  for (const auto& [metric, by_value] : cells) {
    int inversions = 0;
    double prev = 0;
    bool first = true;
    for (const auto& [v, xs] : by_value) {
      const double med = median(xs);
      out << metric << ',' << format_number(v) << ',' << format_number(*std::min_element(xs.begin(), xs.end()))
          << ',' << format_number(med) << ',' << format_number(*std::max_element(xs.begin(), xs.end())) << ','
          << xs.size() << '\n';
      if (!first && med > prev) ++inversions;
      prev = med;
      first = false;
    }
    out << metric << ",inversions,,"
        << inversions << ",,\n";
  }
}

}  // namespace

RunSummary sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.sweep_values.empty()) throw ConfigError("sweep_values is empty");
  // Validate every point before writing anything.
  std::vector<ExperimentConfig> points;
  const fs::path root = cfg.output_dir;
  for (double v : cfg.sweep_values) {
    auto c = with_sweep_value(cfg, cfg.sweep_axis, v);
    c.output_dir = (root / (cfg.sweep_axis + "_" + format_number(v))).string();
    points.push_back(std::move(c));
  }
  prepare_output(cfg, root);

  RunSummary all;
  all.config_hash = config_hash(cfg);
  all.dir = root;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto s = run(points[k]);
    const std::string at = "@" + cfg.sweep_axis + "=" + format_number(cfg.sweep_values[k]);
    for (const auto& r : s.metrics.rows()) all.metrics.add(all.config_hash, r.seed, r.metric + at, r.value);
    for (const auto& r : s.timings.rows()) all.timings.add(all.config_hash, r.seed, r.metric + at, r.value);
    for (const auto& f : s.failures) all.failures.push_back({f.seed, at + ": " + f.what});
  }
  all.metrics.write_csv((root / "sweep.csv").string());
  write_sweep_summary(root / "sweep_summary.csv", all.metrics, cfg.sweep_axis);
  all.timings.write_csv((root / "timings_sweep.csv").string());
  if (!all.failures.empty()) {
    auto out = open_out(root / "failures.log");
    for (const auto& f : all.failures) out << "seed " << f.seed << " " << f.what << '\n';
  }
  return all;
}

spaces::Theta nominal_theta() { return {1.0, 0.275, 1.25}; }

SimilarityGrid similarity_grid(const BasisSet<double>& fe, const spaces::FunctionSpace& space,
                               const std::string& param, const std::vector<double>& values,
                               const std::function<Eigen::VectorXd(double)>& hidden, Index points,
                               std::uint64_t seed) {
  if (!fe.trained()) throw std::logic_error("similarity grid needs a trained encoder");
  if (values.empty()) throw std::invalid_argument("similarity grid needs at least one value");
  Rng rng(derive_seed(seed, stream::probes));
  const Eigen::MatrixXd inputs = space.sample_inputs(points, rng);
  std::vector<Representation<double>> reps;
  for (double v : values) {
    FunctionDataset d{inputs, space.evaluate(hidden(v), inputs), SamplingNote::uniform};
    reps.push_back(estimate_coefficients(fe, d));
  }
  SimilarityGrid g{param, values, Eigen::MatrixXd(values.size(), values.size())};
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = 0; j < values.size(); ++j) g.cosine(i, j) = cosine_similarity(reps[i], reps[j]);
  return g;
}

SimilarityGrid similarity_grid(const BasisSet<double>& fe, const spaces::HipDynamicsSpace& space,
                               const std::string& param, const std::vector<double>& values, Index points,
                               std::uint64_t seed) {
  if (param != "mass" && param != "damping" && param != "gain")
    throw std::invalid_argument("similarity grid: unknown parameter '" + param + "'");
  auto hidden = [&](double v) -> Eigen::VectorXd {
    auto th = nominal_theta();
    (param == "mass" ? th.mass : param == "damping" ? th.damping : th.gain) = v;
    return Eigen::Vector3d(th.mass, th.damping, th.gain);
  };
  return similarity_grid(fe, space, param, values, hidden, points, seed);
}

namespace {

void write_grid_csv(const fs::path& path, const SimilarityGrid& g) {
  auto out = open_out(path);
  out << g.param;
  for (double v : g.values) out << ',' << format_number(v);
  out << '\n';
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    out << format_number(g.values[i]);
    for (std::size_t j = 0; j < g.values.size(); ++j) out << ',' << format_number(g.cosine(i, j));
    out << '\n';
  }
}

double nominal_value(const std::string& param) {
  const auto th = nominal_theta();
  if (param == "slope") return 1.0;
  return param == "mass" ? th.mass : param == "damping" ? th.damping : th.gain;
}

}  // namespace

RunSummary similarity(const ExperimentConfig& cfg, const std::optional<std::string>& checkpoint) {
  cfg.validate();
  const bool slope = cfg.similarity_param == "slope";
  if (cfg.benchmark != (slope ? Benchmark::rl_reward : Benchmark::hip_sysid))
    throw ConfigError(slope ? "similarity_param=slope needs benchmark=rl_reward"
                            : "similarity grids over oscillator parameters need benchmark=hip_sysid");
  if (slope)
    for (double v : cfg.similarity_values)
      if (v == 0) throw ConfigError("similarity_values: slope 0 has a zero representation");
  std::optional<BasisSet<double>> loaded;
  if (checkpoint) {
    loaded = load_encoder(*checkpoint);
    if (!loaded->trained()) throw ConfigError("similarity grid needs a trained encoder: " + *checkpoint);
  }
  const fs::path dir = cfg.output_dir;
  prepare_output(cfg, dir);
  const std::string hash = config_hash(cfg);
  // Reference column: the nominal value if it is on the grid, else the first.
  const auto& vals = cfg.similarity_values;
  std::size_t ref = 0;
  for (std::size_t k = 0; k < vals.size(); ++k)
    if (vals[k] == nominal_value(cfg.similarity_param)) ref = k;

  std::vector<Eigen::MatrixXd> grids;
  auto summary = for_each_seed(cfg, dir, "metrics.csv", [&](std::uint64_t seed, const fs::path& sd, ResultsTable& rows) {
    const BasisSet<double> fe = loaded ? *loaded : train_encoder_seed(cfg, seed, sd, rows);
    SimilarityGrid g;
    if (slope) {
      const auto space = make_space(cfg, seed);
      g = similarity_grid(
          fe, *space, "slope", vals, [](double v) { return Eigen::VectorXd::Constant(1, v); },
          cfg.similarity_points, seed);
    } else {
      spaces::HipDynamicsSpace space({}, seed);
      g = similarity_grid(fe, space, cfg.similarity_param, vals, cfg.similarity_points, seed);
    }
    write_grid_csv(sd / "similarity.csv", g);
    for (std::size_t k = 0; k < vals.size(); ++k)
      rows.add(hash, seed, "cosine@" + cfg.similarity_param + "=" + format_number(vals[k]), g.cosine(ref, k));
    grids.push_back(g.cosine);
  });
  if (!grids.empty()) {
    SimilarityGrid med{cfg.similarity_param, vals, Eigen::MatrixXd(vals.size(), vals.size())};
    for (std::size_t i = 0; i < vals.size(); ++i)
      for (std::size_t j = 0; j < vals.size(); ++j) {
        std::vector<double> xs;
        for (const auto& g : grids) xs.push_back(g(i, j));
        med.cosine(i, j) = median(xs);
      }
    write_grid_csv(dir / "similarity.csv", med);
  }
  return summary;
}

RunSummary rl_train(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!is_rl(cfg.benchmark)) throw ConfigError("rl-train needs benchmark=rl_reward|rl_treadmill");
  const fs::path dir = cfg.output_dir;
  prepare_output(cfg, dir);
  return for_each_seed(cfg, dir, "metrics.csv", [&](std::uint64_t seed, const fs::path& sd, ResultsTable& rows) {
    train_rl_seed(cfg, seed, sd, rows);
  });
}

RunSummary rl_eval(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!is_rl(cfg.benchmark)) throw ConfigError("rl-eval needs benchmark=rl_reward|rl_treadmill");
  const fs::path dir = cfg.output_dir;
  if (!fs::exists(dir)) throw ConfigError("no run directory at " + dir.string());
  return for_each_seed(cfg, dir, "eval_metrics.csv", [&](std::uint64_t seed, const fs::path& sd, ResultsTable& rows) {
    eval_rl_seed(cfg, seed, sd, rows);
  });
}

}  // namespace fenc::harness
