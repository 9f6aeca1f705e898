#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace fenc {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based seed splitting: every (master, stream, index) triple maps to
/// its own seed, so no generator state is ever shared between consumers.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(mix64(master) ^ stream) + index);
}

/// Named stream identifiers for derive_seed.
namespace stream {
inline constexpr std::uint64_t init = 0x11;
inline constexpr std::uint64_t functions = 0x22;
inline constexpr std::uint64_t inputs = 0x33;
inline constexpr std::uint64_t heldout = 0x44;
inline constexpr std::uint64_t probes = 0x55;
inline constexpr std::uint64_t episodes = 0x66;
inline constexpr std::uint64_t exploration = 0x77;
inline constexpr std::uint64_t replay = 0x88;
}  // namespace stream

/// mt19937_64 with platform-independent real conversions (the standard
/// distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename Scalar = double>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> uniform_matrix(Eigen::Index rows,
                                                                       Eigen::Index cols,
                                                                       double lo, double hi) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = static_cast<Scalar>(uniform(lo, hi));
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fenc
