// fenc: train / evaluate function encoders and zero-shot gridworld agents.
//
// exit 0 ok, 2 bad configuration (nothing written), 3 runtime failure
// (whatever finished is on disk, see failures.log).

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fenc/harness/config.hpp"
#include "fenc/harness/experiment.hpp"
#include "fenc/harness/plots.hpp"

using namespace fenc::harness;

namespace {

constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

int report(const RunSummary& s) {
  std::cout << "config_hash " << s.config_hash << "\n";
  for (const auto& r : s.metrics.rows())
    std::cout << "seed " << r.seed << "  " << r.metric << " = " << format_number(r.value) << "\n";
  std::cout << "results in " << s.dir.string() << "\n";
  for (const auto& f : s.failures) std::cerr << "seed " << f.seed << " failed: " << f.what << "\n";
  return s.ok() ? 0 : exit_runtime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"function encoder experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  app.add_option("--config", config_path, "key=value experiment file");
  app.add_option("--seed", seed, "run only this seed (overrides `seeds`)");
  app.add_option("--out", out, "output directory (overrides `output_dir`)");

  auto* train = app.add_subcommand("train", "train encoders, evaluate on held-out functions");
  auto* eval = app.add_subcommand("eval", "re-evaluate checkpoints of a previous train run");
  auto* sweep_cmd = app.add_subcommand("sweep", "one run per sweep value");
  auto* sim = app.add_subcommand("similarity", "representation cosine-similarity grid (hip_sysid)");
  std::optional<std::string> checkpoint;
  sim->add_option("--checkpoint", checkpoint, "use this encoder instead of training one");
  auto* rl_train_cmd = app.add_subcommand("rl-train", "train encoder + conditioned agent");
  auto* rl_eval_cmd = app.add_subcommand("rl-eval", "zero-shot evaluation on held-out tasks");
  auto* plot = app.add_subcommand("plot", "SVG + CSV figures for a results directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (plot->parsed()) {
      std::string dir = out.value_or("");
      if (dir.empty() && !config_path.empty()) dir = load_config(config_path).output_dir;
      if (dir.empty()) throw ConfigError("plot needs --out DIR or --config");
      for (const auto& p : emit_plots(dir)) std::cout << p.string() << "\n";
      return 0;
    }

    if (config_path.empty()) throw ConfigError("--config is required");
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.seeds = {*seed};
    if (out) cfg.output_dir = *out;
    cfg.validate();

    if (train->parsed()) return report(run(cfg));
    if (eval->parsed()) return report(evaluate_run(cfg));
    if (sweep_cmd->parsed()) return report(sweep(cfg));
    if (sim->parsed()) return report(similarity(cfg, checkpoint));
    if (rl_train_cmd->parsed()) return report(rl_train(cfg));
    if (rl_eval_cmd->parsed()) return report(rl_eval(cfg));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
  return exit_config;
}
