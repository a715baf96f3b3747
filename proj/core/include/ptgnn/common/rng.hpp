#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ptgnn {

/// Independent random streams derived from one run seed.
enum class Stream : std::uint64_t {
  Split = 1,
  Init = 2,
  Shuffle = 3,
  Synth = 4,
  GradCheck = 5,
};

/// Counter-based derivation: splitmix64 applied to seed mixed with the stream id.
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t counter = 0);

/// Thin wrapper over mt19937_64 with distribution code of our own, so a given seed
/// produces the same numbers under any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ptgnn
