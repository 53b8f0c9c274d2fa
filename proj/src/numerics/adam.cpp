#include "scidraft/numerics/adam.hpp"

#include <cmath>

namespace scidraft::numerics {

Adam::Adam(std::vector<Parameter*> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (Parameter* p : params_) {
    first_moment_.emplace_back(p->value.shape());
    second_moment_.emplace_back(p->value.shape());
    p->zero_grad();
  }
}

void Adam::step() {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(options_.beta1, t);
  const double correction2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto value = params_[k]->value.data();
    auto grad = params_[k]->grad.data();
    auto m = first_moment_[k].data();
    auto v = second_moment_[k].data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * grad[i];
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

}  // namespace scidraft::numerics
