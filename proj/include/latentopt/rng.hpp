#pragma once

#include <cstdint>
#include <vector>

namespace latentopt {

/// SplitMix64. Used wherever a sequence must be reproducible outside this
/// codebase (toy backend fixtures, fold assignment), since the standard
/// distributions are implementation-defined.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform();

  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

/// Fisher-Yates shuffle of 0..n-1 driven by SplitMix64::below, swapping
/// position i with a draw in [0, i] for i = n-1 down to 1.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace latentopt
