#include "fenc/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "fenc/encoder/basis.hpp"

namespace fenc::harness {

std::string to_string(Benchmark b) {
  switch (b) {
    case Benchmark::linear_span: return "linear_span";
    case Benchmark::sinusoid: return "sinusoid";
    case Benchmark::hip_sysid: return "hip_sysid";
    case Benchmark::rl_reward: return "rl_reward";
    case Benchmark::rl_treadmill: return "rl_treadmill";
  }
  return "?";
}

std::string to_string(ModelKind m) { return m == ModelKind::fe ? "fe" : "fe_residual"; }

Benchmark parse_benchmark(const std::string& s) {
  for (auto b : {Benchmark::linear_span, Benchmark::sinusoid, Benchmark::hip_sysid, Benchmark::rl_reward,
                 Benchmark::rl_treadmill})
    if (to_string(b) == s) return b;
  throw ConfigError("benchmark: unknown value '" + s + "'");
}

ModelKind parse_model(const std::string& s) {
  if (s == "fe") return ModelKind::fe;
  if (s == "fe_residual") return ModelKind::fe_residual;
  throw ConfigError("model: unknown value '" + s + "' (expected fe|fe_residual)");
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true|false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& key, const std::string& v, F&& one) {
  std::vector<T> out;
  for (const auto& item : split_list(v)) out.push_back(one(key, item));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += ',';
    if constexpr (std::is_floating_point_v<T>)
      out += format_number(xs[k]);
    else
      out += std::to_string(xs[k]);
  }
  return out;
}

std::vector<double> symmetric(std::initializer_list<double> positive) {
  std::vector<double> out;
  for (auto it = std::rbegin(positive); it != std::rend(positive); ++it) out.push_back(-*it);
  for (double v : positive) out.push_back(v);
  return out;
}

}  // namespace

ExperimentConfig defaults_for(Benchmark b) {
  ExperimentConfig c;
  c.benchmark = b;
  switch (b) {
    case Benchmark::linear_span:
      break;
    case Benchmark::sinusoid:
      c.functions_per_step = 10;
      c.points_per_function = 400;
      break;
    case Benchmark::hip_sysid:
      c.steps = 1000;
      c.functions_per_step = 10;
      c.points_per_function = 200;
      c.eval_example_points = 50;
      break;
    case Benchmark::rl_reward:
    case Benchmark::rl_treadmill:
      c.num_basis = 4;
      c.steps = 1500;
      c.functions_per_step = 10;
      c.points_per_function = 400;
      c.eval_functions = 20;
      c.eval_example_points = 256;
      if (b == Benchmark::rl_reward) {
        c.rl_head = "bilinear";
        c.rl_episodes = 1500;
        c.rl_train_values = symmetric({0.15, 0.35, 0.55, 0.75, 0.95});
        c.rl_heldout_values = symmetric({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
      } else {
        c.rl_head = "plain";
        c.rl_episodes = 1000;
        c.rl_train_values = {0.0, 0.25, 0.5, 0.75, 1.25, 1.5, 1.75, 2.0};
        c.rl_heldout_values = {0.1, 0.3, 0.45, 0.6, 0.9, 1.1, 1.3, 1.6, 1.8, 1.95};
      }
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(num_basis >= 1, "num_basis must be >= 1");
  need(!hidden_layers.empty(), "hidden_layers must be non-empty");
  for (Index h : hidden_layers) need(h >= 1, "hidden_layers entries must be >= 1");
  need(span_features == "legendre" || span_features == "standard" || span_features == "trigonometric",
       "span_features must be legendre|standard|trigonometric");
  need(span_dim >= 1 && (span_features != "standard" || span_dim <= 8),
       "span_dim must be >= 1 (<= 8 for the standard features)");
  need(halfspace_axis < span_dim, "halfspace_axis must be < span_dim");
  need(steps >= 0, "steps must be >= 0");
  need(functions_per_step >= 1, "functions_per_step must be >= 1");
  need(points_per_function >= 2, "points_per_function must be >= 2");
  need(example_fraction > 0 && example_fraction < 1, "example_fraction must lie in (0, 1)");
  need(learning_rate > 0, "learning_rate must be > 0");
  need(final_lr_fraction > 0 && final_lr_fraction <= 1, "final_lr_fraction must lie in (0, 1]");
  need(clip_norm > 0, "clip_norm must be > 0");
  need(eval_functions >= 1 && eval_example_points >= 1 && eval_query_points >= 1,
       "eval_* counts must be >= 1");
  need(!seeds.empty(), "seeds must list at least one seed");
  need(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(), "seeds must be distinct");
  need(!output_dir.empty(), "output_dir must be non-empty");
  need(model == ModelKind::fe || !is_rl(benchmark), "fe_residual is not available for rl benchmarks");
  if (is_rl(benchmark)) {
    need(rl_head == "plain" || rl_head == "bilinear", "rl_head must be plain|bilinear");
    need(!(rl_zero_context && rl_head == "bilinear"), "rl_zero_context needs rl_head=plain");
    need(rl_episodes >= 0, "rl_episodes must be >= 0");
    need(!rl_hidden.empty(), "rl_hidden must be non-empty");
    need(rl_learning_rate > 0, "rl_learning_rate must be > 0");
    need(rl_probe_size >= 1, "rl_probe_size must be >= 1");
    need(rl_episodes_per_task >= 1, "rl_episodes_per_task must be >= 1");
    need(!rl_train_values.empty(), "rl_train_values must be non-empty");
    const bool reward = benchmark == Benchmark::rl_reward;
    for (double v : rl_train_values)
      need(reward ? (v >= -1 && v <= 1) : (v >= 0 && v <= 2), "rl_train_values out of range");
    for (double v : rl_heldout_values) {
      need(reward ? (v >= -1 && v <= 1) : (v >= 0 && v <= 2), "rl_heldout_values out of range");
      for (double t : rl_train_values)
        need(v != t, "rl_heldout_values must be disjoint from rl_train_values");
      need(!reward || v != 0, "rl_heldout_values: c = 0 has oracle return 0");
    }
  }
  need(sweep_axis == "num_basis" || sweep_axis == "num_example_points",
       "sweep_axis must be num_basis|num_example_points");
  for (double v : sweep_values) need(v >= 1 && v == std::floor(v), "sweep_values must be positive integers");
  for (std::size_t k = 1; k < sweep_values.size(); ++k)
    need(sweep_values[k] > sweep_values[k - 1], "sweep_values must be strictly increasing");
  need(similarity_param == "mass" || similarity_param == "damping" || similarity_param == "gain" ||
           similarity_param == "slope",
       "similarity_param must be mass|damping|gain|slope");
  need(!similarity_values.empty(), "similarity_values must be non-empty");
  need(similarity_points >= 1, "similarity_points must be >= 1");
}

nn::Architecture ExperimentConfig::encoder_arch(Index input_dim, Index output_dim) const {
  return {input_dim, output_dim, num_basis, hidden_layers, activation};
}

TrainConfig ExperimentConfig::train_config(std::uint64_t seed) const {
  TrainConfig t;
  t.steps = steps;
  t.functions_per_step = functions_per_step;
  t.points_per_function = points_per_function;
  t.loss.example_fraction = example_fraction;
  t.loss.detach_coefficients = detach_coefficients;
  t.optimizer.learning_rate = learning_rate;
  t.optimizer.max_grad_norm = clip_norm;
  t.final_lr_fraction = final_lr_fraction;
  t.seed = seed;
  return t;
}

HeldOutConfig ExperimentConfig::heldout_config(std::uint64_t seed) const {
  return {eval_functions, eval_example_points, eval_query_points, derive_seed(seed, stream::heldout)};
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

ExperimentConfig parse_config(const std::map<std::string, std::string>& kv) {
  Benchmark bench = Benchmark::linear_span;
  if (auto it = kv.find("benchmark"); it != kv.end()) bench = parse_benchmark(it->second);
  ExperimentConfig c = defaults_for(bench);

  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto index_list = [](const std::string& k, const std::string& v) {
    return parse_list<Index>(k, v, parse_integer<Index>);
  };
  auto real_list = [](const std::string& k, const std::string& v) { return parse_list<double>(k, v, parse_real); };
  const std::map<std::string, Setter> setters = {
      {"benchmark", [](auto&, auto&) {}},
      {"model", [&](auto&, auto& v) { c.model = parse_model(v); }},
      {"num_basis", [&](auto& k, auto& v) { c.num_basis = parse_integer<Index>(k, v); }},
      {"hidden_layers", [&](auto& k, auto& v) { c.hidden_layers = index_list(k, v); }},
      {"activation",
       [&](auto& k, auto& v) {
         try {
           c.activation = nn::parse_activation(v);
         } catch (const std::exception&) {
           throw ConfigError(k + ": expected relu|tanh");
         }
       }},
      {"span_features", [&](auto&, auto& v) { c.span_features = v; }},
      {"span_dim", [&](auto& k, auto& v) { c.span_dim = parse_integer<int>(k, v); }},
      {"halfspace_axis", [&](auto& k, auto& v) { c.halfspace_axis = parse_integer<int>(k, v); }},
      {"steps", [&](auto& k, auto& v) { c.steps = parse_integer<std::int64_t>(k, v); }},
      {"functions_per_step", [&](auto& k, auto& v) { c.functions_per_step = parse_integer<Index>(k, v); }},
      {"points_per_function", [&](auto& k, auto& v) { c.points_per_function = parse_integer<Index>(k, v); }},
      {"example_fraction", [&](auto& k, auto& v) { c.example_fraction = parse_real(k, v); }},
      {"detach_coefficients", [&](auto& k, auto& v) { c.detach_coefficients = parse_bool(k, v); }},
      {"learning_rate", [&](auto& k, auto& v) { c.learning_rate = parse_real(k, v); }},
      {"final_lr_fraction", [&](auto& k, auto& v) { c.final_lr_fraction = parse_real(k, v); }},
      {"clip_norm", [&](auto& k, auto& v) { c.clip_norm = parse_real(k, v); }},
      {"eval_functions", [&](auto& k, auto& v) { c.eval_functions = parse_integer<Index>(k, v); }},
      {"eval_example_points", [&](auto& k, auto& v) { c.eval_example_points = parse_integer<Index>(k, v); }},
      {"eval_query_points", [&](auto& k, auto& v) { c.eval_query_points = parse_integer<Index>(k, v); }},
      {"rl_head", [&](auto&, auto& v) { c.rl_head = v; }},
      {"rl_zero_context", [&](auto& k, auto& v) { c.rl_zero_context = parse_bool(k, v); }},
      {"rl_episodes", [&](auto& k, auto& v) { c.rl_episodes = parse_integer<int>(k, v); }},
      {"rl_hidden", [&](auto& k, auto& v) { c.rl_hidden = index_list(k, v); }},
      {"rl_learning_rate", [&](auto& k, auto& v) { c.rl_learning_rate = parse_real(k, v); }},
      {"rl_probe_size", [&](auto& k, auto& v) { c.rl_probe_size = parse_integer<Index>(k, v); }},
      {"rl_episodes_per_task", [&](auto& k, auto& v) { c.rl_episodes_per_task = parse_integer<int>(k, v); }},
      {"rl_train_values", [&](auto& k, auto& v) { c.rl_train_values = real_list(k, v); }},
      {"rl_heldout_values", [&](auto& k, auto& v) { c.rl_heldout_values = real_list(k, v); }},
      {"sweep_axis", [&](auto&, auto& v) { c.sweep_axis = v; }},
      {"sweep_values", [&](auto& k, auto& v) { c.sweep_values = real_list(k, v); }},
      {"similarity_param", [&](auto&, auto& v) { c.similarity_param = v; }},
      {"similarity_values", [&](auto& k, auto& v) { c.similarity_values = real_list(k, v); }},
      {"similarity_points", [&](auto& k, auto& v) { c.similarity_points = parse_integer<Index>(k, v); }},
      {"seeds",
       [&](auto& k, auto& v) { c.seeds = parse_list<std::uint64_t>(k, v, parse_integer<std::uint64_t>); }},
      {"output_dir", [&](auto&, auto& v) { c.output_dir = v; }},
  };
  for (const auto& [key, value] : kv) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_key_values(path)); }

namespace {

std::vector<std::pair<std::string, std::string>> echo_pairs(const ExperimentConfig& c) {
  return {
      {"benchmark", to_string(c.benchmark)},
      {"model", to_string(c.model)},
      {"num_basis", std::to_string(c.num_basis)},
      {"hidden_layers", join(c.hidden_layers)},
      {"activation", nn::to_string(c.activation)},
      {"span_features", c.span_features},
      {"span_dim", std::to_string(c.span_dim)},
      {"halfspace_axis", std::to_string(c.halfspace_axis)},
      {"steps", std::to_string(c.steps)},
      {"functions_per_step", std::to_string(c.functions_per_step)},
      {"points_per_function", std::to_string(c.points_per_function)},
      {"example_fraction", format_number(c.example_fraction)},
      {"detach_coefficients", c.detach_coefficients ? "true" : "false"},
      {"learning_rate", format_number(c.learning_rate)},
      {"final_lr_fraction", format_number(c.final_lr_fraction)},
      {"clip_norm", format_number(c.clip_norm)},
      {"eval_functions", std::to_string(c.eval_functions)},
      {"eval_example_points", std::to_string(c.eval_example_points)},
      {"eval_query_points", std::to_string(c.eval_query_points)},
      {"rl_head", c.rl_head},
      {"rl_zero_context", c.rl_zero_context ? "true" : "false"},
      {"rl_episodes", std::to_string(c.rl_episodes)},
      {"rl_hidden", join(c.rl_hidden)},
      {"rl_learning_rate", format_number(c.rl_learning_rate)},
      {"rl_probe_size", std::to_string(c.rl_probe_size)},
      {"rl_episodes_per_task", std::to_string(c.rl_episodes_per_task)},
      {"rl_train_values", join(c.rl_train_values)},
      {"rl_heldout_values", join(c.rl_heldout_values)},
      {"sweep_axis", c.sweep_axis},
      {"sweep_values", join(c.sweep_values)},
      {"similarity_param", c.similarity_param},
      {"similarity_values", join(c.similarity_values)},
      {"similarity_points", std::to_string(c.similarity_points)},
      {"seeds", join(c.seeds)},
      {"output_dir", c.output_dir},
  };
}

}  // namespace

std::string echo_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : echo_pairs(cfg)) out += k + "=" + v + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = detail::fnv1a(nullptr, 0);
  for (const auto& [k, v] : echo_pairs(cfg)) {
    if (k == "seeds" || k == "output_dir") continue;
    const std::string line = k + "=" + v + "\n";
    h = detail::fnv1a(line.data(), line.size(), h);
  }
  return detail::hex64(h);
}

ExperimentConfig with_sweep_value(const ExperimentConfig& cfg, const std::string& axis, double value) {
  ExperimentConfig c = cfg;
  const auto v = static_cast<Index>(value);
  if (axis == "num_basis") {
    c.num_basis = v;
  } else if (axis == "num_example_points") {
    // Train and evaluate with the same number of example points.
    c.eval_example_points = v;
    c.points_per_function = std::max<Index>(2, static_cast<Index>(std::llround(v / c.example_fraction)));
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
  c.validate();
  return c;
}

}  // namespace fenc::harness
