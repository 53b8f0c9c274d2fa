#include "scidraft/numerics/random.hpp"

#include <limits>
#include <stdexcept>

namespace scidraft::numerics {

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::index on empty range");
  // Rejection sampling keeps the mapping unbiased and library independent.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return static_cast<std::size_t>(draw % n);
}

void init_uniform(std::span<Parameter* const> params, Rng& rng, double scale) {
  for (Parameter* p : params) {
    for (double& v : p->value.data()) v = rng.uniform(-scale, scale);
    p->zero_grad();
  }
}

}  // namespace scidraft::numerics
