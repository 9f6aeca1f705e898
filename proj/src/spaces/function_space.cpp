#include "fenc/spaces/function_space.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fenc::spaces {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void Box::validate() const {
  if (lower.size() < 1 || lower.size() != upper.size())
    throw std::invalid_argument("Box: bounds must be non-empty and equally sized");
  if (!lower.allFinite() || !upper.allFinite() || !((upper - lower).array() > 0).all())
    throw std::invalid_argument("Box: each axis needs finite lower < upper");
}

MatrixXd Box::sample(Index count, Rng& rng) const {
  MatrixXd out(dim(), count);
  for (Index s = 0; s < count; ++s)
    for (Index k = 0; k < dim(); ++k) out(k, s) = rng.uniform(lower(k), upper(k));
  return out;
}

MatrixXd SampledFunction::evaluate(const MatrixXd& inputs) const {
  if (!space) throw std::logic_error("SampledFunction: no space");
  if (inputs.rows() != space->input_dim())
    throw std::invalid_argument("SampledFunction: input dimension mismatch");
  return space->evaluate(hidden, inputs);
}

VectorXd SampledFunction::operator()(const VectorXd& x) const { return evaluate(x).col(0); }

std::map<std::string, std::string> FunctionSpace::describe() const {
  std::map<std::string, std::string> kv;
  kv["space_kind"] = kind();
  kv["input_dim"] = std::to_string(input_dim());
  kv["output_dim"] = std::to_string(output_dim());
  kv["master_seed"] = std::to_string(master_seed_);
  return kv;
}

FunctionDataset sample_dataset(const SampledFunction& fn, Index count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_dataset: count must be >= 1");
  Rng rng(derive_seed(seed, stream::inputs));
  FunctionDataset data;
  data.inputs = fn.space->sample_inputs(count, rng);
  data.outputs = fn.evaluate(data.inputs);
  data.sampling = SamplingNote::uniform;
  return data;
}

void write_function_sidecar(const std::string& path, const SampledFunction& fn,
                            std::uint64_t dataset_seed) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (const auto& [k, v] : fn.space->describe()) out << k << '=' << v << '\n';
  const auto names = fn.space->hidden_names();
  for (Index k = 0; k < fn.hidden.size(); ++k) {
    const std::string name = k < static_cast<Index>(names.size()) ? names[k] : "h" + std::to_string(k);
    out << "hidden." << name << '=' << fmt(fn.hidden(k)) << '\n';
  }
  out << "episode_seed=" << fn.episode_seed << '\n' << "dataset_seed=" << dataset_seed << '\n';
}

// --- linear span -------------------------------------------------------------

LinearSpanSpace::LinearSpanSpace(std::vector<Feature> features, double domain_lo, double domain_hi,
                                 double coef_lo, double coef_hi, std::uint64_t master_seed)
    : FunctionSpace(master_seed),
      features_(std::move(features)),
      domain_{VectorXd::Constant(1, domain_lo), VectorXd::Constant(1, domain_hi)},
      coef_lo_(coef_lo),
      coef_hi_(coef_hi) {
  domain_.validate();
  if (features_.empty()) throw std::invalid_argument("LinearSpanSpace: no features");
  if (coef_hi_ < coef_lo_) throw std::invalid_argument("LinearSpanSpace: empty coefficient box");
}

LinearSpanSpace LinearSpanSpace::standard(int num_features, std::uint64_t master_seed) {
  std::vector<Feature> all{
      {"1", [](double) { return 1.0; }},
      {"x", [](double x) { return x; }},
      {"x^2", [](double x) { return x * x; }},
      {"sin(3x)", [](double x) { return std::sin(3 * x); }},
      {"exp(-x^2)", [](double x) { return std::exp(-x * x); }},
      {"x^3", [](double x) { return x * x * x; }},
      {"cos(3x)", [](double x) { return std::cos(3 * x); }},
      {"sin(5x)", [](double x) { return std::sin(5 * x); }},
  };
  if (num_features < 1 || num_features > static_cast<int>(all.size()))
    throw std::invalid_argument("LinearSpanSpace::standard: num_features must be in [1, 8]");
  all.resize(static_cast<std::size_t>(num_features));
  return LinearSpanSpace(std::move(all), -1.0, 1.0, -1.0, 1.0, master_seed);
}

LinearSpanSpace LinearSpanSpace::trigonometric(int num_features, std::uint64_t master_seed) {
  if (num_features < 1 || num_features > 15)
    throw std::invalid_argument("LinearSpanSpace::trigonometric: num_features must be in [1, 15]");
  std::vector<Feature> features{{"1", [](double) { return 1.0; }}};
  for (int k = 1; static_cast<int>(features.size()) < num_features; ++k) {
    const double w = k * std::numbers::pi;
    features.push_back({"sin(" + std::to_string(k) + "pi x)", [w](double x) { return std::sin(w * x); }});
    if (static_cast<int>(features.size()) < num_features)
      features.push_back({"cos(" + std::to_string(k) + "pi x)", [w](double x) { return std::cos(w * x); }});
  }
  return LinearSpanSpace(std::move(features), -1.0, 1.0, -1.0, 1.0, master_seed);
}

LinearSpanSpace LinearSpanSpace::legendre(int num_features, std::uint64_t master_seed) {
  if (num_features < 1 || num_features > 16)
    throw std::invalid_argument("LinearSpanSpace::legendre: num_features must be in [1, 16]");
  std::vector<Feature> features;
  for (int k = 0; k < num_features; ++k) {
    features.push_back({"P" + std::to_string(k), [k](double x) {
                          return std::sqrt(2.0 * k + 1.0) * std::legendre(static_cast<unsigned>(k), x);
                        }});
  }
  return LinearSpanSpace(std::move(features), -1.0, 1.0, -1.0, 1.0, master_seed);
}

void LinearSpanSpace::restrict_to_halfspace(Index axis, int sign) {
  if (axis < 0 || axis >= num_features() || (sign != 1 && sign != -1))
    throw std::invalid_argument("restrict_to_halfspace: bad axis or sign");
  halfspace_axis_ = axis;
  halfspace_sign_ = sign;
}

std::vector<std::string> LinearSpanSpace::hidden_names() const {
  std::vector<std::string> names;
  for (const auto& f : features_) names.push_back("a[" + f.name + "]");
  return names;
}

MatrixXd LinearSpanSpace::sample_inputs(Index count, Rng& rng) const { return domain_.sample(count, rng); }

MatrixXd LinearSpanSpace::evaluate(const VectorXd& hidden, const MatrixXd& inputs) const {
  if (hidden.size() != num_features()) throw std::invalid_argument("LinearSpanSpace: bad coefficient vector");
  MatrixXd out = MatrixXd::Zero(1, inputs.cols());
  for (Index s = 0; s < inputs.cols(); ++s) {
    double acc = 0;
    for (Index k = 0; k < num_features(); ++k) acc += hidden(k) * features_[k].eval(inputs(0, s));
    out(0, s) = acc;
  }
  return out;
}

VectorXd LinearSpanSpace::draw_hidden(Rng& rng) const {
  VectorXd a(num_features());
  for (Index k = 0; k < a.size(); ++k) a(k) = rng.uniform(coef_lo_, coef_hi_);
  if (halfspace_sign_ != 0 && a(halfspace_axis_) * halfspace_sign_ < 0) a(halfspace_axis_) *= -1;
  return a;
}

std::map<std::string, std::string> LinearSpanSpace::describe() const {
  auto kv = FunctionSpace::describe();
  std::string names;
  for (const auto& f : features_) names += (names.empty() ? "" : ";") + f.name;
  kv["features"] = names;
  kv["domain"] = "[" + fmt(domain_lo()) + "," + fmt(domain_hi()) + "]";
  kv["coefficient_box"] = "[" + fmt(coef_lo_) + "," + fmt(coef_hi_) + "]";
  if (halfspace_sign_ != 0)
    kv["halfspace"] = "axis=" + std::to_string(halfspace_axis_) + ",sign=" + std::to_string(halfspace_sign_);
  return kv;
}

// --- sinusoid ------------------------------------------------------------------

SinusoidSpace::SinusoidSpace(std::uint64_t master_seed)
    : FunctionSpace(master_seed), domain_{VectorXd::Constant(1, -5.0), VectorXd::Constant(1, 5.0)} {}

MatrixXd SinusoidSpace::sample_inputs(Index count, Rng& rng) const { return domain_.sample(count, rng); }

MatrixXd SinusoidSpace::evaluate(const VectorXd& hidden, const MatrixXd& inputs) const {
  if (hidden.size() != 2) throw std::invalid_argument("SinusoidSpace: expected (amplitude, phase)");
  return (hidden(0) * (inputs.array() - hidden(1)).sin()).matrix();
}

VectorXd SinusoidSpace::draw_hidden(Rng& rng) const {
  VectorXd h(2);
  h(0) = rng.uniform(0.1, 5.0);
  h(1) = rng.uniform(0.0, std::numbers::pi);
  return h;
}

// --- hidden-parameter oscillator ----------------------------------------------

bool HipDynamicsSpec::in_range(const VectorXd& theta) const {
  return theta.size() == 3 && theta(0) >= mass_lo && theta(0) <= mass_hi && theta(1) >= damping_lo &&
         theta(1) <= damping_hi && theta(2) >= gain_lo && theta(2) <= gain_hi;
}

Eigen::Vector2d transition(const HipDynamicsSpec& spec, const Theta& theta, const Eigen::Vector2d& state,
                           double action) {
  if (!spec.in_range(Eigen::Vector3d(theta.mass, theta.damping, theta.gain)))
    throw std::out_of_range("transition: hidden parameters outside declared ranges");
  const double p = state(0);
  const double v = state(1);
  return {p + spec.dt * v, v + spec.dt * (theta.gain * action - theta.damping * v - p) / theta.mass};
}

HipDynamicsSpace::HipDynamicsSpace(HipDynamicsSpec spec, std::uint64_t master_seed)
    : FunctionSpace(master_seed), spec_(spec) {
  if (!(spec_.mass_lo > 0) || spec_.mass_hi < spec_.mass_lo || spec_.damping_hi < spec_.damping_lo ||
      spec_.gain_hi < spec_.gain_lo || !(spec_.dt > 0))
    throw std::invalid_argument("HipDynamicsSpace: invalid spec");
  domain_.lower = Eigen::Vector3d(-spec_.state_bound, -spec_.state_bound, -spec_.action_bound);
  domain_.upper = -domain_.lower;
  domain_.validate();
}

MatrixXd HipDynamicsSpace::sample_inputs(Index count, Rng& rng) const { return domain_.sample(count, rng); }

MatrixXd HipDynamicsSpace::evaluate(const VectorXd& hidden, const MatrixXd& inputs) const {
  if (!spec_.in_range(hidden)) throw std::out_of_range("HipDynamicsSpace: theta out of range");
  const Theta theta{hidden(0), hidden(1), hidden(2)};
  MatrixXd out(2, inputs.cols());
  for (Index s = 0; s < inputs.cols(); ++s)
    out.col(s) = transition(spec_, theta, inputs.col(s).head<2>(), inputs(2, s));
  return out;
}

VectorXd HipDynamicsSpace::draw_hidden(Rng& rng) const {
  VectorXd theta(3);
  theta(0) = rng.uniform(spec_.mass_lo, spec_.mass_hi);
  theta(1) = rng.uniform(spec_.damping_lo, spec_.damping_hi);
  theta(2) = rng.uniform(spec_.gain_lo, spec_.gain_hi);
  return theta;
}

std::map<std::string, std::string> HipDynamicsSpace::describe() const {
  auto kv = FunctionSpace::describe();
  kv["mass_range"] = "[" + fmt(spec_.mass_lo) + "," + fmt(spec_.mass_hi) + "]";
  kv["damping_range"] = "[" + fmt(spec_.damping_lo) + "," + fmt(spec_.damping_hi) + "]";
  kv["gain_range"] = "[" + fmt(spec_.gain_lo) + "," + fmt(spec_.gain_hi) + "]";
  kv["dt"] = fmt(spec_.dt);
  return kv;
}

}  // namespace fenc::spaces
