#ifndef IRK_RANDOM_HPP
#define IRK_RANDOM_HPP

#include <cstdint>
#include <random>

#include "irk/types.hpp"

namespace irk {

/// SplitMix64 finaliser, used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Platform-stable generator: std::mt19937_64 seeded from
/// splitmix64(seed ^ splitmix64(stream)). Uniforms use the top 53 bits and
/// normals use Box-Muller, so output does not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  Vector normal_vector(Index n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace irk

#endif  // IRK_RANDOM_HPP
