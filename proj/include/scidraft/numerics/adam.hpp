#pragma once

#include <cstddef>
#include <vector>

#include "scidraft/numerics/tape.hpp"

namespace scidraft::numerics {

struct AdamOptions {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam over a fixed parameter list; step() consumes each Parameter::grad.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamOptions options = {});

  void step();
  void zero_grad();

  std::size_t steps_taken() const noexcept { return steps_; }

 private:
  std::vector<Parameter*> params_;
  AdamOptions options_;
  std::vector<Tensor> first_moment_;
  std::vector<Tensor> second_moment_;
  std::size_t steps_ = 0;
};

}  // namespace scidraft::numerics
