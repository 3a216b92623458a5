#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>

namespace wpcn {

/// Deterministic random source used throughout the simulator.
///
/// The engine is std::mt19937_64 seeded through std::seed_seq from the
/// 64-bit seed and a 64-bit stream id; both algorithms are fully specified
/// by the C++ standard. Uniform and Gaussian variates are derived here
/// (53-bit mantissa fill and Box-Muller) rather than through the
/// implementation-defined <random> distributions, so draws are identical
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal.
  double normal();
  /// Circularly-symmetric complex Gaussian with E|x|^2 = variance.
  std::complex<double> complex_normal(double variance);
  /// Uniform integer on [0, n).
  std::size_t index(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Per-trial seed: trials are independent streams keyed by base ^ index.
constexpr std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial) noexcept {
  return base ^ trial;
}

// Stream ids that partition one trial's randomness by purpose, so that
// consuming more draws for one purpose never shifts another.
namespace streams {
inline constexpr std::uint64_t placement = 1;
inline constexpr std::uint64_t channels = 2;
inline constexpr std::uint64_t cluster_head = 3;  // + repeat index
}  // namespace streams

}  // namespace wpcn
