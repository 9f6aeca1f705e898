#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "fenc/encoder/coefficients.hpp"
#include "fenc/encoder/loss.hpp"
#include "fenc/encoder/training.hpp"
#include "fenc/spaces/quadrature.hpp"

using namespace fenc;

namespace {

nn::Architecture arch(Index n, Index m, Index b, std::vector<Index> hidden = {8}) {
  return {n, m, b, std::move(hidden), nn::Activation::tanh};
}

// {1, sqrt(3)(2x - 1)} on [0, 1]: orthonormal under the volume-free inner product.
AnalyticBasis<double> legendre01() {
  return AnalyticBasis<double>::scalar(
      1, {[](const Eigen::VectorXd&) { return 1.0; }, [](const Eigen::VectorXd& x) { return std::sqrt(3.0) * (2 * x(0) - 1); }},
      "legendre01");
}

Eigen::MatrixXd uniform_inputs(Index n, Index count, std::uint64_t seed, double lo = -1, double hi = 1) {
  Rng rng(seed);
  return rng.uniform_matrix(n, count, lo, hi);
}

}  // namespace

TEST_SUITE("function_encoder") {

TEST_CASE("estimate_coefficients: zero outputs give zero coefficients") {
  const auto basis = BasisSet<double>::initialize(arch(2, 3, 4), 1);
  const FunctionDataset d{uniform_inputs(2, 50, 2), Eigen::MatrixXd::Zero(3, 50)};
  const auto rep = estimate_coefficients(basis, d);
  CHECK(rep.coefficients.isZero(0));
  CHECK(rep.source_size == 50);
  CHECK(rep.basis_id == basis.id());
}

TEST_CASE("estimate_coefficients: analytic orthonormal basis recovers (0, 1)") {
  const auto basis = legendre01();
  const Eigen::MatrixXd x = uniform_inputs(1, 100000, 3, 0, 1);
  const FunctionDataset d{x, (std::sqrt(3.0) * (2 * x.array() - 1)).matrix()};
  const auto c = estimate_coefficients(basis, d).coefficients;
  CHECK(std::abs(c(0, 0)) < 0.02);
  CHECK(std::abs(c(1, 0) - 1) < 0.02);
  // and the quadrature oracle agrees that the pair is orthonormal
  auto g1 = [](double) { return 1.0; };
  auto g2 = [](double t) { return std::sqrt(3.0) * (2 * t - 1); };
  CHECK(spaces::inner_product(g1, g2, 0, 1) == doctest::Approx(0).epsilon(1e-9).scale(1));
  CHECK(spaces::inner_product(g2, g2, 0, 1) == doctest::Approx(1).epsilon(1e-9));
}

TEST_CASE("estimate_coefficients is linear in the outputs") {
  const auto basis = BasisSet<double>::initialize(arch(2, 2, 5), 4);
  const Eigen::MatrixXd x = uniform_inputs(2, 300, 5);
  Rng rng(6);
  const Eigen::MatrixXd y1 = rng.uniform_matrix(2, 300, -3, 3), y2 = rng.uniform_matrix(2, 300, -3, 3);
  const auto c1 = estimate_coefficients(basis, {x, y1}).coefficients;
  const auto c2 = estimate_coefficients(basis, {x, y2}).coefficients;
  const auto c3 = estimate_coefficients(basis, {x, 2 * y1 + 3 * y2}).coefficients;
  CHECK((c3 - (2 * c1 + 3 * c2)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("estimate_coefficients errors") {
  const auto basis = BasisSet<double>::initialize(arch(2, 1, 3), 1);
  CHECK_THROWS_AS(estimate_coefficients(basis, {Eigen::MatrixXd(2, 0), Eigen::MatrixXd(1, 0)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_coefficients(basis, {Eigen::MatrixXd::Zero(3, 4), Eigen::MatrixXd::Zero(1, 4)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_coefficients(basis, {Eigen::MatrixXd::Zero(2, 4), Eigen::MatrixXd::Zero(2, 4)}),
                  std::invalid_argument);
}

TEST_CASE("predict: zero, one-hot and naive double loop") {
  const auto basis = BasisSet<double>::initialize(arch(2, 3, 4), 7);
  const Eigen::Vector2d x(0.3, -0.6);
  const Eigen::MatrixXd g = basis.evaluate(x).reshaped(4, 3);
  Representation<double> rep{Eigen::MatrixXd::Zero(4, 3), 1, basis.id()};
  CHECK(predict(basis, rep, x).isZero(0));

  rep.coefficients(2, 1) = 1;
  const auto y = predict(basis, rep, x);
  CHECK(y(1) == g(2, 1));
  CHECK(y(0) == 0);
  CHECK(y(2) == 0);

  Rng rng(8);
  rep.coefficients = rng.uniform_matrix(4, 3, -1, 1);
  const auto yr = predict(basis, rep, x);
  for (Index j = 0; j < 3; ++j) {
    double s = 0;
    for (Index i = 0; i < 4; ++i) s += rep.coefficients(i, j) * g(i, j);
    CHECK(yr(j) == doctest::Approx(s).epsilon(1e-14));
  }
}

TEST_CASE("predict is linear in the representation") {
  const auto basis = BasisSet<double>::initialize(arch(1, 2, 3), 9);
  Rng rng(10);
  Representation<double> r1{rng.uniform_matrix(3, 2, -1, 1), 1, basis.id()};
  Representation<double> r2{rng.uniform_matrix(3, 2, -1, 1), 1, basis.id()};
  Representation<double> r3{2 * r1.coefficients - 0.5 * r2.coefficients, 1, basis.id()};
  const Eigen::MatrixXd x = uniform_inputs(1, 20, 11);
  const Eigen::MatrixXd lhs = predict_batch(basis, r3, x);
  const Eigen::MatrixXd rhs = 2 * predict_batch(basis, r1, x) - 0.5 * predict_batch(basis, r2, x);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("predict rejects a representation from another basis") {
  const auto a = BasisSet<double>::initialize(arch(1, 1, 3), 1);
  const auto b = BasisSet<double>::initialize(arch(1, 1, 3), 2);
  const auto rep = estimate_coefficients(a, {uniform_inputs(1, 10, 1), Eigen::MatrixXd::Ones(1, 10)});
  CHECK_THROWS_AS(predict(b, rep, Eigen::VectorXd::Zero(1)), BasisMismatch);
  CHECK_NOTHROW(predict(a, rep, Eigen::VectorXd::Zero(1)));
}

TEST_CASE("basis id depends on parameters, survives copies") {
  auto a = BasisSet<double>::initialize(arch(1, 1, 3), 1);
  const auto copy = a;
  CHECK(copy.id() == a.id());
  auto p = a.params();
  p.bias(0)(0, 0) += 1e-9;
  a.set_params(p);
  CHECK(copy.id() != a.id());
}

TEST_CASE("streaming equals batch; order barely matters") {
  const auto basis = BasisSet<double>::initialize(arch(2, 2, 4), 12);
  const Eigen::MatrixXd x = uniform_inputs(2, 100, 13);
  Rng rng(14);
  const Eigen::MatrixXd y = rng.uniform_matrix(2, 100, -2, 2);

  StreamingCoefficients<double> one(4, 2);
  one.update(basis, x.col(0), y.col(0));
  const Eigen::MatrixXd g0 = basis.evaluate(x.col(0)).reshaped(4, 2);
  CHECK((one.finalize().coefficients - g0 * y.col(0).asDiagonal()).cwiseAbs().maxCoeff() == 0);

  StreamingCoefficients<double> fwd(4, 2), rev(4, 2);
  for (Index s = 0; s < 100; ++s) fwd.update(basis, x.col(s), y.col(s));
  for (Index s = 100; s-- > 0;) rev.update(basis, x.col(s), y.col(s));
  const auto batch = estimate_coefficients(basis, {x, y});
  CHECK(fwd.count() == 100);
  CHECK((fwd.finalize().coefficients - batch.coefficients).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((rev.finalize().coefficients - fwd.finalize().coefficients).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(fwd.finalize().basis_id == basis.id());

  StreamingCoefficients<double> empty(4, 2);
  CHECK_THROWS_AS(empty.finalize(), std::logic_error);
}

TEST_CASE("cosine_similarity") {
  Representation<double> r{Eigen::MatrixXd(2, 2), 1, "b"};
  r.coefficients << 1, 2, -3, 0.5;
  auto scaled = r;
  scaled.coefficients *= 2;
  auto neg = r;
  neg.coefficients *= -1;
  Representation<double> ortho{Eigen::MatrixXd(2, 2), 1, "b"};
  ortho.coefficients << 2, -1, 0, 0;
  Representation<double> e1{Eigen::MatrixXd::Zero(2, 2), 1, "b"};
  e1.coefficients(0, 0) = 1;
  Representation<double> e2{Eigen::MatrixXd::Zero(2, 2), 1, "b"};
  e2.coefficients(1, 1) = 1;
  CHECK(cosine_similarity(r, scaled) == doctest::Approx(1.0));
  CHECK(cosine_similarity(r, neg) == doctest::Approx(-1.0));
  CHECK(cosine_similarity(e1, e2) == 0.0);
  CHECK(cosine_similarity(r, ortho) == cosine_similarity(ortho, r));
  CHECK(cosine_similarity(scaled, ortho) == doctest::Approx(cosine_similarity(r, ortho)));

  Representation<double> zero{Eigen::MatrixXd::Zero(2, 2), 1, "b"};
  CHECK_THROWS_AS(cosine_similarity(r, zero), std::invalid_argument);
  auto other = r;
  other.basis_id = "c";
  CHECK_THROWS_AS(cosine_similarity(r, other), BasisMismatch);
}

TEST_CASE("orthonormality_error: analytic orthonormal basis is near 0, scaled is not") {
  const Eigen::MatrixXd probes = uniform_inputs(1, 200000, 15, 0, 1);
  CHECK(orthonormality_error(legendre01(), probes) < 1e-4);
  const auto doubled = AnalyticBasis<double>::scalar(
      1, {[](const Eigen::VectorXd&) { return 2.0; }, [](const Eigen::VectorXd& x) { return x(0); }}, "bad");
  // gram ~ [[4, 1], [1, 1/3]] -> ((3)^2 + 1 + 1 + (2/3)^2) / 4
  CHECK(orthonormality_error(doubled, probes) == doctest::Approx((9 + 2 + 4.0 / 9) / 4).epsilon(0.01));
}

TEST_CASE("representation CSV round trip") {
  const auto path = (std::filesystem::temp_directory_path() / "fenc_rep_test.csv").string();
  Representation<double> r{Eigen::MatrixXd(3, 2), 7, "nn-00ff"};
  r.coefficients << 1.0 / 3, -2e-17, 5, 0.1, -7.25, 1e300;
  write_representation_csv(path, r);
  const auto back = read_representation_csv(path);
  CHECK(back.basis_id == r.basis_id);
  CHECK(back.coefficients == r.coefficients);
  std::filesystem::remove(path);
  CHECK_THROWS(read_representation_csv(path));
}

TEST_CASE("fe_loss: an exactly interpolating basis has zero loss and gradient") {
  // one head, constant 1: the coefficient of a constant function is the constant itself
  auto a = arch(1, 1, 1, {3});
  auto p = nn::ParameterBlock<double>::zeros(a);
  p.bias(1)(0, 0) = 1;
  const BasisSet<double> basis(a, p);
  const Eigen::MatrixXd x = uniform_inputs(1, 40, 16);
  std::vector<FunctionDataset> batch{{x, Eigen::MatrixXd::Constant(1, 40, 2.5)},
                                     {x, Eigen::MatrixXd::Constant(1, 40, -1.0)}};
  const auto [loss, grads] = fe_loss(basis, batch);
  CHECK(loss == 0);
  CHECK(grads.squared_norm() == 0);
}

TEST_CASE("fe_loss gradient matches central finite differences") {
  Rng rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    const bool shared = trial % 2 == 0;
    const auto a = arch(2, 2, 3, {6});
    REQUIRE(a.parameter_count() <= 500);
    const auto basis = BasisSet<double>::initialize(a, 200 + trial);
    std::vector<FunctionDataset> batch;
    const Eigen::MatrixXd x0 = rng.uniform_matrix(2, 12, -1, 1);
    for (int f = 0; f < 3; ++f)
      batch.push_back({shared ? x0 : Eigen::MatrixXd(rng.uniform_matrix(2, 12, -1, 1)),
                       rng.uniform_matrix(2, 12, -1, 1)});
    const auto [loss, grads] = fe_loss(basis, batch);
    const Eigen::VectorXd flat = basis.params().flat(), grad = grads.flat();
    auto loss_at = [&](const Eigen::VectorXd& v) {
      auto p = basis.params();
      p.set_flat(v);
      return fe_loss(BasisSet<double>(a, p), batch).loss;
    };
    double worst = 0;
    for (Index k = 0; k < flat.size(); ++k) {
      Eigen::VectorXd v = flat;
      v(k) += 1e-5;
      const double up = loss_at(v);
      v(k) -= 2e-5;
      const double fd = (up - loss_at(v)) / 2e-5;
      const double err = std::abs(fd - grad(k));
      if (err > 1e-7) worst = std::max(worst, err / std::max(std::abs(fd), std::abs(grad(k))));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("fe_loss errors") {
  const auto basis = BasisSet<double>::initialize(arch(1, 1, 2), 1);
  std::vector<FunctionDataset> empty;
  CHECK_THROWS_AS(fe_loss(basis, empty), std::invalid_argument);
  std::vector<FunctionDataset> single{{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)}};
  CHECK_THROWS_AS(fe_loss(basis, single), std::invalid_argument);
}

TEST_CASE("train: zero steps, determinism, and span recovery at small scale") {
  const auto space = spaces::LinearSpanSpace::legendre(3, 1);
  const auto basis = BasisSet<double>::initialize(arch(1, 1, 4, {32, 32}), 2);
  TrainConfig tc;
  tc.steps = 0;
  const auto none = train(basis, space, tc);
  CHECK(none.history.empty());
  CHECK(none.basis.params() == basis.params());
  CHECK_FALSE(none.basis.trained());

  tc.steps = 800;
  tc.functions_per_step = 10;
  tc.points_per_function = 200;
  tc.optimizer.learning_rate = 1e-2;
  tc.final_lr_fraction = 0.05;
  tc.seed = 3;
  const auto a = train(basis, space, tc);
  const auto b = train(basis, space, tc);
  CHECK(a.history == b.history);
  CHECK(a.history.size() == 800);
  CHECK(a.basis.trained());
  CHECK(a.basis.params() == b.basis.params());
  const HeldOutConfig hc{20, 2000, 200, 4};
  const double before = evaluate_heldout(basis, space, hc).relative_mse;
  const double after = evaluate_heldout(a.basis, space, hc).relative_mse;
  CHECK(after < 0.1 * before);
}

TEST_CASE("learning-rate schedule decays to the final fraction") {
  TrainConfig tc;
  tc.steps = 101;
  tc.optimizer.learning_rate = 1e-2;
  tc.final_lr_fraction = 0.1;
  CHECK(tc.learning_rate_at(0) == doctest::Approx(1e-2));
  CHECK(tc.learning_rate_at(100) == doctest::Approx(1e-3));
  for (int s = 1; s <= 100; ++s) CHECK(tc.learning_rate_at(s) <= tc.learning_rate_at(s - 1));
}

TEST_CASE("residual model: zeroed coefficients give the mean model exactly") {
  const auto model = ResidualModel::initialize(arch(3, 2, 4), 5);
  const Eigen::MatrixXd x = uniform_inputs(3, 10, 18);
  const Representation<double> zero{Eigen::MatrixXd::Zero(4, 2), 1, model.difference_encoder.id()};
  CHECK(model.predict(zero, x) == model.mean_prediction(x));
}

TEST_CASE("residual model: a one-function space leaves nothing for the difference encoder") {
  // coefficient box collapsed to a point: every sample is the same function
  spaces::LinearSpanSpace space({{"x", [](double t) { return t; }}, {"x2", [](double t) { return t * t; }}}, -1, 1,
                                0.8, 0.8, 1);
  TrainConfig tc;
  tc.steps = 600;
  tc.functions_per_step = 4;
  tc.points_per_function = 100;
  tc.optimizer.learning_rate = 1e-2;
  tc.final_lr_fraction = 0.1;
  const auto res = train_residual(ResidualModel::initialize(arch(1, 1, 3, {16}), 6), space, tc);
  CHECK(res.history.size() == 600);
  CHECK(res.mean_history.size() == 600);
  const Eigen::MatrixXd x = uniform_inputs(1, 500, 19);
  const Eigen::MatrixXd y = space.sample_function(0).evaluate(x);
  const double residual = (y - res.model.mean_prediction(x)).squaredNorm() / 500;
  const double signal = y.squaredNorm() / 500;
  CHECK(residual < 1e-2 * signal);
}

}  // TEST_SUITE
