// Acceptance run: one PASS/FAIL line per criterion (1-13).
//   acceptance            all criteria
//   acceptance 1 12 13    a subset
// Exit status is nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "fenc/encoder/coefficients.hpp"
#include "fenc/encoder/loss.hpp"
#include "fenc/harness/config.hpp"
#include "fenc/harness/experiment.hpp"
#include "fenc/random.hpp"
#include "fenc/spaces/quadrature.hpp"

using namespace fenc;
using namespace fenc::harness;
namespace fs = std::filesystem;

#ifndef FENC_SOURCE_DIR
#define FENC_SOURCE_DIR "."
#endif

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path work_root() { return fs::temp_directory_path() / "fenc_acceptance"; }

ExperimentConfig shipped(const std::string& name, const std::string& tag) {
  auto c = load_config(std::string(FENC_SOURCE_DIR) + "/configs/" + name + ".cfg");
  c.output_dir = (work_root() / tag).string();
  fs::remove_all(c.output_dir);
  return c;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

double med(const RunSummary& s, const std::string& metric) {
  const auto v = s.metrics.values(metric);
  if (v.empty()) throw std::runtime_error("no values for " + metric);
  return median(v);
}

std::vector<std::uint64_t> seeds_of(const RunSummary& s) {
  std::set<std::uint64_t> seeds;
  for (const auto& r : s.metrics.rows()) seeds.insert(r.seed);
  return {seeds.begin(), seeds.end()};
}

void require_ok(const RunSummary& s) {
  if (!s.ok()) throw std::runtime_error("seed " + std::to_string(s.failures[0].seed) + ": " + s.failures[0].what);
}

nn::Architecture random_arch(Rng& rng, Index max_params) {
  for (;;) {
    nn::Architecture a;
    a.input_dim = 1 + static_cast<Index>(rng.below(3));
    a.output_dim = 1 + static_cast<Index>(rng.below(3));
    a.num_heads = 1 + static_cast<Index>(rng.below(6));
    a.hidden.clear();
    const auto depth = 1 + rng.below(2);
    for (std::uint64_t l = 0; l < depth; ++l) a.hidden.push_back(2 + static_cast<Index>(rng.below(10)));
    a.activation = nn::Activation::tanh;
    if (a.parameter_count() <= max_params) return a;
  }
}

// 1. c(a f1 + b f2) = a c(f1) + b c(f2)
Outcome linearity() {
  Rng rng(101);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const auto arch = random_arch(rng, 2000);
    const auto basis = BasisSet<double>::initialize(arch, 1000 + t);
    const Index n = 10 + static_cast<Index>(rng.below(500));
    const Eigen::MatrixXd x = rng.uniform_matrix(arch.input_dim, n, -1, 1);
    const Eigen::MatrixXd y1 = rng.uniform_matrix(arch.output_dim, n, -3, 3);
    const Eigen::MatrixXd y2 = rng.uniform_matrix(arch.output_dim, n, -3, 3);
    const double a = rng.uniform(-5, 5), b = rng.uniform(-5, 5);
    const Eigen::MatrixXd c1 = estimate_coefficients(basis, {x, y1}).coefficients;
    const Eigen::MatrixXd c2 = estimate_coefficients(basis, {x, y2}).coefficients;
    const Eigen::MatrixXd c3 = estimate_coefficients(basis, {x, a * y1 + b * y2}).coefficients;
    worst = std::max(worst, (c3 - (a * c1 + b * c2)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12, "200 trials, max |diff| = " + num(worst)};
}

// 2. fe_loss gradient vs central differences
Outcome gradients() {
  Rng rng(202);
  double worst = 0;
  Index largest = 0;
  for (int t = 0; t < 50; ++t) {
    const auto arch = random_arch(rng, 500);
    largest = std::max(largest, arch.parameter_count());
    const auto basis = BasisSet<double>::initialize(arch, 2000 + t);
    const Index pts = 6 + static_cast<Index>(rng.below(15));
    const bool shared = rng.bernoulli(0.5);
    const Eigen::MatrixXd x0 = rng.uniform_matrix(arch.input_dim, pts, -1, 1);
    std::vector<FunctionDataset> batch;
    const auto nf = 1 + rng.below(4);
    for (std::uint64_t f = 0; f < nf; ++f)
      batch.push_back({shared ? x0 : Eigen::MatrixXd(rng.uniform_matrix(arch.input_dim, pts, -1, 1)),
                       rng.uniform_matrix(arch.output_dim, pts, -2, 2)});
    LossOptions opt;
    opt.example_fraction = rng.uniform(0.3, 0.7);
    const Eigen::VectorXd grad = fe_loss(basis, batch, opt).grads.flat();
    const Eigen::VectorXd flat = basis.params().flat();
    Eigen::VectorXd fd(flat.size());
    auto loss_at = [&](const Eigen::VectorXd& v) {
      auto p = basis.params();
      p.set_flat(v);
      return fe_loss(BasisSet<double>(arch, p), batch, opt).loss;
    };
    const double h = 1e-6;
    for (Index k = 0; k < flat.size(); ++k) {
      Eigen::VectorXd v = flat;
      v(k) += h;
      const double up = loss_at(v);
      v(k) -= 2 * h;
      fd(k) = (up - loss_at(v)) / (2 * h);
    }
    const double denom = std::max(fd.norm(), grad.norm());
    if (denom > 0) worst = std::max(worst, (fd - grad).norm() / denom);
  }
  return {worst < 1e-4, "50 instances (<= " + std::to_string(largest) + " params), max rel err = " + num(worst)};
}

// 3. Monte Carlo coefficients converge to the quadrature values
Outcome monte_carlo() {
  const auto basis = AnalyticBasis<double>::scalar(
      1,
      {[](const Eigen::VectorXd&) { return 1.0; },
       [](const Eigen::VectorXd& x) { return std::sqrt(3.0) * (2 * x(0) - 1); },
       [](const Eigen::VectorXd& x) { return std::sqrt(5.0) * (6 * x(0) * x(0) - 6 * x(0) + 1); }},
      "legendre01_3");
  auto f = [](double x) { return std::sin(3 * x) + 0.5 * x * x - 0.2; };
  const std::vector<std::function<double(double)>> g{
      [](double) { return 1.0; }, [](double x) { return std::sqrt(3.0) * (2 * x - 1); },
      [](double x) { return std::sqrt(5.0) * (6 * x * x - 6 * x + 1); }};
  Eigen::VectorXd truth(3);
  for (int i = 0; i < 3; ++i) truth(i) = spaces::inner_product(f, g[i], 0, 1);

  auto errors = [&](Index n) {
    std::vector<double> e;
    for (std::uint64_t s = 0; s < 20; ++s) {
      Rng rng(derive_seed(303, s, static_cast<std::uint64_t>(n)));
      const Eigen::MatrixXd x = rng.uniform_matrix(1, n, 0, 1);
      const Eigen::MatrixXd y = x.unaryExpr(f);
      e.push_back((estimate_coefficients(basis, {x, y}).coefficients.col(0) - truth).cwiseAbs().maxCoeff());
    }
    return e;
  };
  const auto small = errors(100), large = errors(10000);
  const double m_small = median(small), m_large = median(large);
  const double max_large = *std::max_element(large.begin(), large.end());
  return {m_large < m_small && m_large < 0.02,
          "median err |D|=1e2: " + num(m_small) + ", |D|=1e4: " + num(m_large) + " (max " + num(max_large) + ")"};
}

// 4 + 7 share the span-recovery runs.
RunSummary span_runs;

Outcome span_recovery() {
  span_runs = run(shipped("span_recovery", "c4"));
  require_ok(span_runs);
  const double m = med(span_runs, "heldout_relative_mse");
  return {m < 1e-2, "median held-out relative MSE = " + num(m)};
}

Outcome orthonormality() {
  if (span_runs.metrics.empty()) span_runs = run(shipped("span_recovery", "c4"));
  require_ok(span_runs);
  int better = 0, total = 0;
  std::string per;
  for (auto seed : seeds_of(span_runs)) {
    const double before = *span_runs.metrics.value("orthonormality_before", seed);
    const double after = *span_runs.metrics.value("orthonormality_after", seed);
    ++total;
    better += after < before;
    per += " " + num(before) + "->" + num(after);
  }
  return {total == 5 && better == total, std::to_string(better) + "/" + std::to_string(total) + " seeds:" + per};
}

Outcome halfspace() {
  const auto s = run(shipped("span_halfspace", "c5"));
  require_ok(s);
  const double in = med(s, "heldout_relative_mse"), ood = med(s, "heldout_relative_mse_ood");
  return {ood <= 3 * in, "median relative MSE in-dist " + num(in) + ", other half-space " + num(ood)};
}

Outcome biased_gradients() {
  std::string detail;
  bool ok = true;
  for (Index fps : {5, 1}) {
    auto c = shipped("span_recovery", "c6_fps" + std::to_string(fps));
    c.functions_per_step = fps;
    const auto s = run(c);
    require_ok(s);
    std::vector<double> ratio;
    for (auto seed : seeds_of(s))
      ratio.push_back(*s.metrics.value("heldout_relative_mse", seed) /
                      *s.metrics.value("heldout_relative_mse_initial", seed));
    const double m = median(ratio);
    ok = ok && (fps == 5 ? m < 0.1 : m >= 0.1);
    detail += "fps=" + std::to_string(fps) + ": median final/initial = " + num(m) + "  ";
  }
  return {ok, detail};
}

Outcome low_data_residual() {
  auto res = shipped("hip_lowdata", "c8_residual");
  auto plain = shipped("hip_lowdata", "c8_plain");
  plain.model = ModelKind::fe;
  const auto r = run(res), p = run(plain);
  require_ok(r);
  require_ok(p);
  const double mr = med(r, "heldout_mse"), mp = med(p, "heldout_mse");
  return {mr <= mp, "|D|=" + std::to_string(res.eval_example_points) + ": median test MSE FE+MLP " + num(mr) +
                        ", FE " + num(mp)};
}

Outcome basis_sweep() {
  const auto s = sweep(shipped("basis_sweep", "c9"));
  require_ok(s);
  std::string detail;
  for (int b : {2, 4, 8, 16, 32})
    detail += "b=" + std::to_string(b) + ":" + num(med(s, "heldout_mse@num_basis=" + std::to_string(b))) + " ";
  const double m2 = med(s, "heldout_mse@num_basis=2"), m32 = med(s, "heldout_mse@num_basis=32");
  return {m2 >= 5 * m32, detail + "ratio " + num(m2 / m32)};
}

Outcome zero_shot() {
  const auto r = run(shipped("rl_reward", "c10_reward"));
  const auto t = run(shipped("rl_treadmill", "c10_treadmill"));
  require_ok(r);
  require_ok(t);
  const double rc = med(r, "correct_decisions"), rn = med(r, "num_heldout_tasks"), ratio = med(r, "mean_oracle_ratio");
  const double tc = med(t, "correct_decisions"), tn = med(t, "num_heldout_tasks");
  const bool ok = rn == 20 && rc >= 19 && ratio >= 0.9 && tn == 10 && tc >= 9;
  return {ok, "reward: " + num(rc) + "/" + num(rn) + " correct, mean oracle ratio " + num(ratio) +
                  "; treadmill: " + num(tc) + "/" + num(tn) + " correct"};
}

Outcome context_necessity() {
  // Same plain Q head on both sides, so the only difference is the context.
  auto fe = shipped("rl_reward", "c11_fe");
  fe.rl_head = "plain";
  auto zero = shipped("rl_reward_nocontext", "c11_zero");
  fe.seeds = zero.seeds = {0, 1, 2, 3, 4};
  const auto a = run(fe), b = run(zero);
  require_ok(a);
  require_ok(b);
  const double ma = med(a, "mean_oracle_ratio"), mb = med(b, "mean_oracle_ratio");
  return {mb < ma, "median oracle ratio: FE context " + num(ma) + ", zero context " + num(mb)};
}

Outcome streaming() {
  Rng rng(1212);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const auto arch = random_arch(rng, 2000);
    const auto basis = BasisSet<double>::initialize(arch, 12000 + t);
    const Index n = 1 + static_cast<Index>(rng.below(400));
    const Eigen::MatrixXd x = rng.uniform_matrix(arch.input_dim, n, -1, 1);
    const Eigen::MatrixXd y = rng.uniform_matrix(arch.output_dim, n, -3, 3);
    StreamingCoefficients<double> s(arch.num_heads, arch.output_dim);
    for (Index k = 0; k < n; ++k) s.update(basis, x.col(k), y.col(k));
    const auto batch = estimate_coefficients(basis, {x, y});
    worst = std::max(worst, (s.finalize().coefficients - batch.coefficients).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12, "100 cases, max |diff| = " + num(worst)};
}

Outcome determinism() {
  // one small run per benchmark family, each done twice
  std::vector<ExperimentConfig> configs;
  auto span = shipped("span_recovery", "c13_span");
  span.steps = 200;
  span.seeds = {0, 7};
  configs.push_back(span);
  auto hip = shipped("hip_lowdata", "c13_hip");
  hip.steps = 100;
  hip.seeds = {3};
  configs.push_back(hip);
  auto rl = shipped("rl_treadmill", "c13_rl");
  rl.steps = 200;
  rl.rl_episodes = 100;
  configs.push_back(rl);
  int same = 0;
  for (auto c : configs) {
    run(c);
    const auto first = slurp(fs::path(c.output_dir) / "metrics.csv");
    c.output_dir += "_again";
    fs::remove_all(c.output_dir);
    run(c);
    same += !first.empty() && first == slurp(fs::path(c.output_dir) / "metrics.csv");
  }
  return {same == static_cast<int>(configs.size()),
          std::to_string(same) + "/" + std::to_string(configs.size()) + " reruns bit-identical"};
}

struct Criterion {
  int id;
  double budget_seconds;  // 0: no runtime bound
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, 10, linearity},          {2, 60, gradients},          {3, 30, monte_carlo},
      {4, 300, span_recovery},     {5, 300, halfspace},         {6, 600, biased_gradients},
      {7, 0, orthonormality},      {8, 600, low_data_residual}, {9, 900, basis_sweep},
      {10, 1200, zero_shot},       {11, 0, context_necessity},  {12, 5, streaming},
      {13, 0, determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = num(secs) + "s";
    if (c.budget_seconds > 0) {
      timing += " / " + num(c.budget_seconds) + "s";
      if (secs > c.budget_seconds) {
        o.pass = false;
        timing += " OVER BUDGET";
      }
    }
    failed += !o.pass;
    std::printf("criterion %d: %s  %s  [%s]\n", c.id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(work_root());
  return failed == 0 ? 0 : 1;
}
