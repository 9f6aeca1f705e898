#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fenc/encoder/dataset.hpp"
#include "fenc/random.hpp"

namespace fenc::spaces {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Axis-aligned input domain with finite positive volume.
struct Box {
  VectorXd lower;
  VectorXd upper;

  Index dim() const { return lower.size(); }
  double volume() const { return (upper - lower).prod(); }
  void validate() const;
  /// n x count matrix of i.i.d. uniform points.
  MatrixXd sample(Index count, Rng& rng) const;
};

class FunctionSpace;

/// One member of a function space, identified by its hidden parameters.
/// Holds a non-owning pointer; the space must outlive it.
struct SampledFunction {
  const FunctionSpace* space = nullptr;
  VectorXd hidden;
  std::uint64_t episode_seed = 0;

  /// m x N outputs for n x N inputs.
  MatrixXd evaluate(const MatrixXd& inputs) const;
  VectorXd operator()(const VectorXd& x) const;
};

/// A seeded generator of related functions over a common input domain.
class FunctionSpace {
 public:
  explicit FunctionSpace(std::uint64_t master_seed) : master_seed_(master_seed) {}
  virtual ~FunctionSpace() = default;

  virtual std::string kind() const = 0;
  virtual Index input_dim() const = 0;
  virtual Index output_dim() const = 0;
  virtual std::vector<std::string> hidden_names() const = 0;

  /// Uniform i.i.d. inputs over the domain, n x count.
  virtual MatrixXd sample_inputs(Index count, Rng& rng) const = 0;
  virtual MatrixXd evaluate(const VectorXd& hidden, const MatrixXd& inputs) const = 0;

  /// Deterministic in (master_seed, episode_seed).
  SampledFunction sample_function(std::uint64_t episode_seed) const {
    Rng rng(derive_seed(master_seed_, stream::functions, episode_seed));
    return {this, draw_hidden(rng), episode_seed};
  }

  SampledFunction function_with(VectorXd hidden) const { return {this, std::move(hidden), 0}; }

  std::uint64_t master_seed() const { return master_seed_; }

  /// Key/value description for sidecar files.
  virtual std::map<std::string, std::string> describe() const;

 protected:
  virtual VectorXd draw_hidden(Rng& rng) const = 0;

 private:
  std::uint64_t master_seed_;
};

/// Inputs are uniform over the space's domain; outputs are exact evaluations.
FunctionDataset sample_dataset(const SampledFunction& fn, Index count, std::uint64_t seed);

/// Writes `key=value` lines describing the function and the dataset seed.
void write_function_sidecar(const std::string& path, const SampledFunction& fn,
                            std::uint64_t dataset_seed);

// ---------------------------------------------------------------------------

struct Feature {
  std::string name;
  std::function<double(double)> eval;
};

/// Functions sum_k a_k phi_k(x) on a 1-D interval, a drawn uniformly from a box.
class LinearSpanSpace : public FunctionSpace {
 public:
  LinearSpanSpace(std::vector<Feature> features, double domain_lo, double domain_hi,
                  double coef_lo, double coef_hi, std::uint64_t master_seed);

  /// d = 5: {1, x, x^2, sin 3x, exp(-x^2)}; d = 8 adds {x^3, cos 3x, sin 5x}.
  /// Domain [-1, 1], coefficients uniform in [-1, 1].
  static LinearSpanSpace standard(int num_features, std::uint64_t master_seed);

  /// {1, sin(pi x), cos(pi x), sin(2 pi x), cos(2 pi x), ...} truncated to
  /// num_features on [-1, 1]; mutually orthogonal, so every direction of the
  /// span carries comparable variance.
  static LinearSpanSpace trigonometric(int num_features, std::uint64_t master_seed);

  /// Unit-norm Legendre polynomials sqrt(2k+1) P_k(x), k < num_features, on [-1, 1].
  static LinearSpanSpace legendre(int num_features, std::uint64_t master_seed);

  /// Only draw coefficient vectors with sign(a[axis]) == sign (by reflecting a[axis]).
  void restrict_to_halfspace(Index axis, int sign);
  void clear_halfspace() { halfspace_sign_ = 0; }

  std::string kind() const override { return "linear_span"; }
  Index input_dim() const override { return 1; }
  Index output_dim() const override { return 1; }
  std::vector<std::string> hidden_names() const override;
  MatrixXd sample_inputs(Index count, Rng& rng) const override;
  MatrixXd evaluate(const VectorXd& hidden, const MatrixXd& inputs) const override;
  std::map<std::string, std::string> describe() const override;

  Index num_features() const { return static_cast<Index>(features_.size()); }
  const std::vector<Feature>& features() const { return features_; }
  double domain_lo() const { return domain_.lower(0); }
  double domain_hi() const { return domain_.upper(0); }

 protected:
  VectorXd draw_hidden(Rng& rng) const override;

 private:
  std::vector<Feature> features_;
  Box domain_;
  double coef_lo_, coef_hi_;
  Index halfspace_axis_ = 0;
  int halfspace_sign_ = 0;
};

/// A sin(x - phase) on [-5, 5]; amplitude in [0.1, 5], phase in [0, pi].
class SinusoidSpace : public FunctionSpace {
 public:
  explicit SinusoidSpace(std::uint64_t master_seed);

  std::string kind() const override { return "sinusoid"; }
  Index input_dim() const override { return 1; }
  Index output_dim() const override { return 1; }
  std::vector<std::string> hidden_names() const override { return {"amplitude", "phase"}; }
  MatrixXd sample_inputs(Index count, Rng& rng) const override;
  MatrixXd evaluate(const VectorXd& hidden, const MatrixXd& inputs) const override;

 protected:
  VectorXd draw_hidden(Rng& rng) const override;

 private:
  Box domain_;
};

/// Damped driven oscillator with hidden (mass, damping, gain).
struct HipDynamicsSpec {
  double mass_lo = 0.5, mass_hi = 2.0;
  double damping_lo = 0.05, damping_hi = 0.5;
  double gain_lo = 0.5, gain_hi = 2.0;
  double dt = 0.1;
  /// Sampling box for (position, velocity, action).
  double state_bound = 1.0;
  double action_bound = 1.0;

  bool in_range(const VectorXd& theta) const;
};

/// Hidden parameter layout used throughout: (mass, damping, gain).
struct Theta {
  double mass, damping, gain;
};

/// One explicit Euler step:
///   p' = p + dt v,  v' = v + dt (gain a - damping v - p) / mass.
Eigen::Vector2d transition(const HipDynamicsSpec& spec, const Theta& theta, const Eigen::Vector2d& state,
                           double action);

/// Functions (p, v, a) -> (p', v') of the oscillator, one per theta.
class HipDynamicsSpace : public FunctionSpace {
 public:
  HipDynamicsSpace(HipDynamicsSpec spec, std::uint64_t master_seed);

  std::string kind() const override { return "hip_dynamics"; }
  Index input_dim() const override { return 3; }
  Index output_dim() const override { return 2; }
  std::vector<std::string> hidden_names() const override { return {"mass", "damping", "gain"}; }
  MatrixXd sample_inputs(Index count, Rng& rng) const override;
  MatrixXd evaluate(const VectorXd& hidden, const MatrixXd& inputs) const override;
  std::map<std::string, std::string> describe() const override;

  const HipDynamicsSpec& spec() const { return spec_; }

 protected:
  VectorXd draw_hidden(Rng& rng) const override;

 private:
  HipDynamicsSpec spec_;
  Box domain_;
};

}  // namespace fenc::spaces
