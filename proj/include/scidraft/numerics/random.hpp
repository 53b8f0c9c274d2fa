#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "scidraft/numerics/tape.hpp"

namespace scidraft::numerics {

// Seeded generator with distribution mappings written out explicitly, so a
// seed reproduces the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double low, double high) { return low + (high - low) * uniform(); }
  // Uniform in [0, n).
  std::size_t index(std::size_t n);
  bool coin() { return (engine_() >> 63) != 0; }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

// Fills every parameter with values uniform in [-scale, scale].
void init_uniform(std::span<Parameter* const> params, Rng& rng, double scale);

}  // namespace scidraft::numerics
