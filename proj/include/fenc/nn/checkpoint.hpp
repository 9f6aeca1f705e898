#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "fenc/nn/optimizer.hpp"
#include "fenc/nn/types.hpp"

namespace fenc::nn {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* checkpoint_magic = "FENC-CKPT v1";

struct Checkpoint {
  Architecture arch;
  ParameterBlock<double> params;
  std::optional<OptimizerState<double>> optimizer;
};

/// Text format: magic line, `n m b [h1,h2,...] activation`, then for each
/// tensor a `name rows cols` header followed by rows of 17-digit decimals.
void write_checkpoint(std::ostream& out, const Architecture& arch, const ParameterBlock<double>& params,
                      const OptimizerState<double>* optimizer = nullptr);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const Architecture& arch,
                     const ParameterBlock<double>& params,
                     const OptimizerState<double>* optimizer = nullptr);
Checkpoint load_checkpoint(const std::string& path);

std::string format_architecture(const Architecture& arch);
Architecture parse_architecture(const std::string& line);

}  // namespace fenc::nn
