#include "fenc/nn/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace fenc::nn {

std::string to_string(Activation act) { return act == Activation::tanh ? "tanh" : "relu"; }

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_tensor(std::ostream& out, const std::string& name, const MatrixX<double>& t) {
  out << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
  for (Index r = 0; r < t.rows(); ++r) {
    for (Index c = 0; c < t.cols(); ++c) {
      if (c) out << ' ';
      out << format_double(t(r, c));
    }
    out << '\n';
  }
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size())
    throw CheckpointError("checkpoint: malformed number '" + token + "'");
  return v;
}

struct LineReader {
  std::istream& in;
  int line_no = 0;

  bool next(std::string& line) {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  }
};

struct NamedTensor {
  std::string name;
  MatrixX<double> value;
};

std::optional<NamedTensor> read_tensor(LineReader& reader) {
  std::string header;
  do {
    if (!reader.next(header)) return std::nullopt;
  } while (header.empty());
  std::istringstream hs(header);
  NamedTensor t;
  long long rows = -1, cols = -1;
  std::string extra;
  if (!(hs >> t.name >> rows >> cols) || (hs >> extra) || rows < 0 || cols < 0)
    throw CheckpointError("checkpoint: malformed tensor header at line " +
                          std::to_string(reader.line_no));
  t.value.resize(rows, cols);
  for (long long r = 0; r < rows; ++r) {
    std::string line;
    if (!reader.next(line))
      throw CheckpointError("checkpoint: truncated file inside tensor '" + t.name + "'");
    std::istringstream ls(line);
    std::string token;
    long long c = 0;
    while (ls >> token) {
      if (c >= cols)
        throw CheckpointError("checkpoint: tensor '" + t.name + "' row has more values than header");
      t.value(r, c++) = parse_double(token);
    }
    if (c != cols && reader.in.eof())
      throw CheckpointError("checkpoint: truncated file inside tensor '" + t.name + "'");
    if (c != cols)
      throw CheckpointError("checkpoint: tensor '" + t.name + "' row " + std::to_string(r) +
                            " has " + std::to_string(c) + " values, header says " +
                            std::to_string(cols));
  }
  return t;
}

}  // namespace

std::string format_architecture(const Architecture& arch) {
  std::ostringstream os;
  os << arch.input_dim << ' ' << arch.output_dim << ' ' << arch.num_heads << " [";
  for (std::size_t k = 0; k < arch.hidden.size(); ++k) os << (k ? "," : "") << arch.hidden[k];
  os << "] " << to_string(arch.activation);
  return os.str();
}

Architecture parse_architecture(const std::string& line) {
  std::istringstream is(line);
  Architecture arch;
  std::string hidden, act, extra;
  if (!(is >> arch.input_dim >> arch.output_dim >> arch.num_heads >> hidden >> act) || (is >> extra))
    throw CheckpointError("checkpoint: malformed architecture line '" + line + "'");
  if (hidden.size() < 2 || hidden.front() != '[' || hidden.back() != ']')
    throw CheckpointError("checkpoint: malformed hidden layer list '" + hidden + "'");
  arch.hidden.clear();
  std::stringstream hs(hidden.substr(1, hidden.size() - 2));
  std::string item;
  while (std::getline(hs, item, ',')) {
    Index width = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), width);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw CheckpointError("checkpoint: malformed hidden width '" + item + "'");
    arch.hidden.push_back(width);
  }
  try {
    arch.activation = parse_activation(act);
    arch.validate();
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
  return arch;
}

void write_checkpoint(std::ostream& out, const Architecture& arch, const ParameterBlock<double>& params,
                      const OptimizerState<double>* optimizer) {
  if (!params.congruent(arch)) throw std::invalid_argument("write_checkpoint: params do not match arch");
  out << checkpoint_magic << '\n' << format_architecture(arch) << '\n';
  for (Index k = 0; k < params.num_tensors(); ++k) write_tensor(out, tensor_name(k), params.tensors[k]);
  if (optimizer) {
    const auto& cfg = optimizer->config;
    MatrixX<double> hyper(1, 6);
    hyper << static_cast<double>(optimizer->step), cfg.learning_rate, cfg.beta1, cfg.beta2,
        cfg.epsilon, cfg.max_grad_norm;
    write_tensor(out, "adam.config", hyper);
    for (Index k = 0; k < params.num_tensors(); ++k)
      write_tensor(out, "adam.m." + tensor_name(k), optimizer->first_moment.tensors[k]);
    for (Index k = 0; k < params.num_tensors(); ++k)
      write_tensor(out, "adam.v." + tensor_name(k), optimizer->second_moment.tensors[k]);
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  LineReader reader{in};
  std::string line;
  if (!reader.next(line)) throw CheckpointError("checkpoint: empty file");
  if (line != checkpoint_magic) {
    if (line.rfind("FENC-CKPT ", 0) == 0)
      throw CheckpointError("checkpoint: unsupported version '" + line.substr(10) + "'");
    throw CheckpointError("checkpoint: bad magic string");
  }
  if (!reader.next(line)) throw CheckpointError("checkpoint: truncated file (missing architecture)");

  Checkpoint ckpt;
  ckpt.arch = parse_architecture(line);
  ckpt.params = ParameterBlock<double>::zeros(ckpt.arch);

  auto expect = [&](const std::string& name, MatrixX<double>& slot) {
    auto t = read_tensor(reader);
    if (!t) throw CheckpointError("checkpoint: truncated file (missing tensor '" + name + "')");
    if (t->name != name)
      throw CheckpointError("checkpoint: expected tensor '" + name + "', found '" + t->name + "'");
    if (t->value.rows() != slot.rows() || t->value.cols() != slot.cols())
      throw CheckpointError("checkpoint: tensor '" + name + "' shape disagrees with architecture");
    slot = std::move(t->value);
  };

  for (Index k = 0; k < ckpt.params.num_tensors(); ++k) expect(tensor_name(k), ckpt.params.tensors[k]);

  auto hyper = read_tensor(reader);
  if (hyper) {
    if (hyper->name != "adam.config" || hyper->value.rows() != 1 || hyper->value.cols() != 6)
      throw CheckpointError("checkpoint: unexpected trailing tensor '" + hyper->name + "'");
    const auto& h = hyper->value;
    AdamConfig cfg{h(0, 1), h(0, 2), h(0, 3), h(0, 4), h(0, 5)};
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw CheckpointError(std::string("checkpoint: ") + e.what());
    }
    auto state = OptimizerState<double>::create(ckpt.arch, cfg);
    state.step = static_cast<std::int64_t>(h(0, 0));
    for (Index k = 0; k < ckpt.params.num_tensors(); ++k)
      expect("adam.m." + tensor_name(k), state.first_moment.tensors[k]);
    for (Index k = 0; k < ckpt.params.num_tensors(); ++k)
      expect("adam.v." + tensor_name(k), state.second_moment.tensors[k]);
    ckpt.optimizer = std::move(state);
    if (read_tensor(reader)) throw CheckpointError("checkpoint: unexpected trailing data");
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Architecture& arch,
                     const ParameterBlock<double>& params, const OptimizerState<double>* optimizer) {
  std::ostringstream buffer;
  write_checkpoint(buffer, arch, params, optimizer);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot open '" + path + "' for writing");
  out << buffer.str();
  if (!out) throw CheckpointError("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace fenc::nn
