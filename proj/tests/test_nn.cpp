#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fenc/nn/checkpoint.hpp"
#include "fenc/nn/mlp.hpp"
#include "fenc/nn/optimizer.hpp"

using namespace fenc;
using namespace fenc::nn;

namespace {

Architecture small_arch(Index n = 1, Index m = 1, Index b = 2, std::vector<Index> hidden = {4},
                        Activation act = Activation::tanh) {
  return {n, m, b, std::move(hidden), act};
}

// Straight-line evaluation, no Eigen products.
Eigen::MatrixXd naive_forward(const ParameterBlock<double>& p, const Architecture& arch, const Eigen::VectorXd& x) {
  std::vector<double> a(x.data(), x.data() + x.size());
  for (Index l = 0; l < arch.num_layers(); ++l) {
    std::vector<double> z(arch.layer_outputs(l));
    for (Index r = 0; r < arch.layer_outputs(l); ++r) {
      double s = p.bias(l)(r, 0);
      for (Index c = 0; c < arch.layer_inputs(l); ++c) s += p.weight(l)(r, c) * a[c];
      const bool last = l + 1 == arch.num_layers();
      z[r] = last ? s : arch.activation == Activation::tanh ? std::tanh(s) : std::max(0.0, s);
    }
    a = z;
  }
  Eigen::MatrixXd g(arch.num_heads, arch.output_dim);
  for (Index j = 0; j < arch.output_dim; ++j)
    for (Index i = 0; i < arch.num_heads; ++i) g(i, j) = a[i + j * arch.num_heads];
  return g;
}

double weighted_output(const ParameterBlock<double>& p, const Architecture& arch, const Eigen::VectorXd& x,
                       const Eigen::MatrixXd& u) {
  return forward(p, arch, x).cwiseProduct(u).sum();
}

}  // namespace

TEST_SUITE("nn_core") {

TEST_CASE("init_params is deterministic, seed-sensitive, zero-bias") {
  const auto arch = small_arch();
  const auto a = init_params(arch, 7), b = init_params(arch, 7), c = init_params(arch, 8);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  for (Index l = 0; l < arch.num_layers(); ++l) {
    CHECK(a.bias(l).isZero(0));
    const double bound = 1 / std::sqrt(double(arch.layer_inputs(l)));
    CHECK(a.weight(l).cwiseAbs().maxCoeff() <= bound);
  }
}

TEST_CASE("architecture rejects zero-sized dimensions") {
  CHECK_THROWS_AS(init_params(small_arch(0), 1), std::invalid_argument);
  CHECK_THROWS_AS(init_params(small_arch(1, 1, 0), 1), std::invalid_argument);
  CHECK_THROWS_AS(init_params(small_arch(1, 1, 2, {0}), 1), std::invalid_argument);
  CHECK_THROWS_AS(init_params(small_arch(1, 1, 2, {}), 1), std::invalid_argument);
}

TEST_CASE("forward: zero params give zero basis") {
  const auto arch = small_arch(3, 2, 4, {5, 5});
  const auto p = ParameterBlock<double>::zeros(arch);
  const auto g = forward(p, arch, Eigen::Vector3d(0.3, -2, 1));
  CHECK(g.rows() == 4);
  CHECK(g.cols() == 2);
  CHECK(g.isZero(0));
}

TEST_CASE("forward: hand-built relu unit") {
  const auto arch = small_arch(1, 1, 1, {1}, Activation::relu);
  auto p = ParameterBlock<double>::zeros(arch);
  p.weight(0)(0, 0) = 1;
  p.weight(1)(0, 0) = 1;
  CHECK(forward(p, arch, Eigen::VectorXd::Constant(1, 2.0))(0, 0) == 2.0);
  CHECK(forward(p, arch, Eigen::VectorXd::Constant(1, -1.0))(0, 0) == 0.0);
}

TEST_CASE("forward matches a naive loop; batch matches per-sample") {
  for (auto act : {Activation::tanh, Activation::relu}) {
    const auto arch = small_arch(3, 2, 3, {6, 4}, act);
    const auto p = init_params(arch, 11);
    Rng rng(5);
    const Eigen::MatrixXd xs = rng.uniform_matrix(3, 20, -2, 2);
    const auto batch = forward_batch(p, arch, xs);
    for (Index s = 0; s < xs.cols(); ++s) {
      const Eigen::VectorXd x = xs.col(s);
      const auto g = forward(p, arch, x);
      CHECK((g - naive_forward(p, arch, x)).cwiseAbs().maxCoeff() < 1e-14);
      CHECK((batch.col(s) - g.reshaped()).cwiseAbs().maxCoeff() == 0);
    }
  }
}

TEST_CASE("forward rejects dimension mismatch and non-finite input") {
  const auto arch = small_arch(2);
  const auto p = init_params(arch, 1);
  CHECK_THROWS_AS(forward(p, arch, Eigen::Vector3d(1, 2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(forward(p, arch, Eigen::Vector2d(1, NAN)), std::invalid_argument);
}

TEST_CASE("backward: zero upstream gives zero gradient") {
  const auto arch = small_arch(2, 2, 3, {5});
  const auto p = init_params(arch, 3);
  const auto g = backward(p, arch, Eigen::Vector2d(0.2, 0.7), Eigen::MatrixXd::Zero(3, 2));
  CHECK(g.squared_norm() == 0);
}

TEST_CASE("backward matches central finite differences") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto act = trial % 2 ? Activation::tanh : Activation::relu;
    const auto arch = small_arch(2, 2, 3, {5, 4}, act);
    REQUIRE(arch.parameter_count() <= 200);
    const auto p = init_params(arch, 100 + trial);
    const Eigen::VectorXd x = rng.uniform_matrix(2, 1, -1, 1);
    const Eigen::MatrixXd u = rng.uniform_matrix(3, 2, -1, 1);
    const auto g = backward(p, arch, x, u);
    const Eigen::VectorXd flat = p.flat(), grad = g.flat();
    const double h = 1e-5;
    for (Index k = 0; k < flat.size(); ++k) {
      auto plus = p, minus = p;
      Eigen::VectorXd f = flat;
      f(k) += h;
      plus.set_flat(f);
      f(k) -= 2 * h;
      minus.set_flat(f);
      const double fd = (weighted_output(plus, arch, x, u) - weighted_output(minus, arch, x, u)) / (2 * h);
      const double err = std::abs(fd - grad(k));
      const double scale = std::max(std::abs(fd), std::abs(grad(k)));
      CHECK((err < 1e-6 || err / scale < 1e-4));
    }
  }
}

TEST_CASE("backward is linear in the upstream and accumulates") {
  const auto arch = small_arch(2, 2, 3, {5});
  const auto p = init_params(arch, 4);
  Rng rng(8);
  const Eigen::VectorXd x = rng.uniform_matrix(2, 1, -1, 1);
  const Eigen::MatrixXd u1 = rng.uniform_matrix(3, 2, -1, 1), u2 = rng.uniform_matrix(3, 2, -1, 1);
  auto acc = GradientBlock<double>::zeros(arch);
  backward(p, arch, x, u1, acc);
  backward(p, arch, x, u2, acc);
  const auto once = backward(p, arch, x, Eigen::MatrixXd(u1 + u2));
  CHECK(acc.accumulated == 2);
  CHECK((acc.flat() - once.flat()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("clip_gradients") {
  const auto arch = small_arch();
  auto g = GradientBlock<double>::zeros(arch);
  g.weight(0)(0, 0) = 0.3;
  g.weight(0)(1, 0) = 0.4;
  CHECK(clip_gradients(g, 1.0).flat() == g.flat());
  CHECK(clip_gradients(g, unbounded).flat() == g.flat());

  g *= 20.0;  // norm 10
  const auto c = clip_gradients(g, 1.0);
  CHECK(global_norm(c) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK((c.flat() * 10 - g.flat()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(global_norm(c) <= global_norm(g));
  CHECK_THROWS_AS(clip_gradients(g, 0.0), std::invalid_argument);
}

TEST_CASE("optimizer_step: hand-computed first step") {
  const Architecture arch{1, 1, 1, {1}, Activation::tanh};
  auto p = ParameterBlock<double>::zeros(arch);
  p.weight(1)(0, 0) = 0.5;
  auto g = GradientBlock<double>::zeros(arch);
  g.weight(1)(0, 0) = 1.0;
  auto state = OptimizerState<double>::create(arch, {0.1, 0.9, 0.999, 1e-8, unbounded});
  optimizer_step(state, p, g);
  CHECK(state.step == 1);
  CHECK(p.weight(1)(0, 0) == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(p.weight(0)(0, 0) == 0);  // zero gradient leaves it put
}

TEST_CASE("optimizer_step: zero gradients keep params, decay moments") {
  const auto arch = small_arch();
  auto p = init_params(arch, 2);
  const auto p0 = p;
  auto state = OptimizerState<double>::create(arch);
  auto g = GradientBlock<double>::zeros(arch);
  g.weight(0).setConstant(1.0);
  optimizer_step(state, p, g);
  const double m1 = state.first_moment.weight(0)(0, 0);
  const auto p1 = p;
  optimizer_step(state, p, GradientBlock<double>::zeros(arch));
  CHECK(state.step == 2);
  CHECK(std::abs(state.first_moment.weight(0)(0, 0)) < std::abs(m1));
  CHECK(p.bias(0) == p1.bias(0));
  CHECK_FALSE(p1 == p0);
}

TEST_CASE("optimizer_step: non-finite gradient is an error and leaves state untouched") {
  const auto arch = small_arch();
  auto p = init_params(arch, 2);
  const auto before = p;
  auto state = OptimizerState<double>::create(arch);
  auto g = GradientBlock<double>::zeros(arch);
  g.weight(0)(0, 0) = NAN;
  CHECK_THROWS_AS(optimizer_step(state, p, g), NumericalError);
  CHECK(p == before);
  CHECK(state.step == 0);
}

TEST_CASE("optimizer trajectories are bit-identical") {
  const auto arch = small_arch(2, 1, 3, {4});
  auto run = [&] {
    auto p = init_params(arch, 5);
    auto state = OptimizerState<double>::create(arch);
    Rng rng(6);
    for (int t = 0; t < 30; ++t) {
      const Eigen::VectorXd x = rng.uniform_matrix(2, 1, -1, 1);
      const Eigen::MatrixXd u = rng.uniform_matrix(3, 1, -1, 1);
      optimizer_step(state, p, backward(p, arch, x, u));
    }
    return p;
  };
  CHECK(run() == run());
}

TEST_CASE("checkpoint round trip is bit-exact") {
  const auto arch = small_arch(3, 2, 4, {7, 5}, Activation::relu);
  auto p = init_params(arch, 12);
  p.bias(1)(2, 0) = 1.0 / 3.0;
  auto state = OptimizerState<double>::create(arch);
  optimizer_step(state, p, backward(p, arch, Eigen::Vector3d(1, 2, 3), Eigen::MatrixXd::Ones(4, 2)));

  std::stringstream ss;
  write_checkpoint(ss, arch, p, &state);
  const std::string text = ss.str();
  CHECK(text.rfind("FENC-CKPT v1\n3 2 4 [7,5] relu\n", 0) == 0);
  std::stringstream in(text);
  const auto ck = read_checkpoint(in);
  CHECK(ck.arch == arch);
  CHECK(ck.params == p);
  REQUIRE(ck.optimizer);
  CHECK(ck.optimizer->step == 1);
  CHECK(ck.optimizer->first_moment == state.first_moment);
  CHECK(ck.optimizer->second_moment == state.second_moment);

  std::stringstream bare;
  write_checkpoint(bare, arch, p);
  std::stringstream bare_in(bare.str());
  CHECK_FALSE(read_checkpoint(bare_in).optimizer);
}

TEST_CASE("checkpoint errors") {
  const auto arch = small_arch();
  const auto p = init_params(arch, 1);
  std::stringstream ss;
  write_checkpoint(ss, arch, p);
  const std::string text = ss.str();

  auto read = [](const std::string& s) {
    std::stringstream in(s);
    return read_checkpoint(in);
  };
  CHECK_THROWS_AS(read("NOT-A-CKPT\n" + text.substr(text.find('\n') + 1)), CheckpointError);
  CHECK_THROWS_AS(read("FENC-CKPT v2\n" + text.substr(text.find('\n') + 1)), CheckpointError);
  CHECK_THROWS_AS(read(""), CheckpointError);
  // truncated mid-tensor
  const auto cut = text.find("layer1.weight");
  CHECK_THROWS_AS(read(text.substr(0, cut - 5)), CheckpointError);
  // header disagrees with architecture
  std::string bad = text;
  bad.replace(bad.find("layer0.weight 4 1"), 17, "layer0.weight 3 1");
  CHECK_THROWS_AS(read(bad), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/x.ckpt"), CheckpointError);
}

}  // TEST_SUITE
