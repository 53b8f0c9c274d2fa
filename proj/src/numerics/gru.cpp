#include "scidraft/numerics/gru.hpp"

#include <stdexcept>

#include "scidraft/numerics/ops.hpp"

namespace scidraft::numerics {

GruParams::GruParams(const std::string& prefix, std::size_t input, std::size_t hidden)
    : input_dim(input),
      hidden_dim(hidden),
      w_update(prefix + ".w_update", {hidden, input}),
      u_update(prefix + ".u_update", {hidden, hidden}),
      b_update(prefix + ".b_update", {hidden}),
      w_reset(prefix + ".w_reset", {hidden, input}),
      u_reset(prefix + ".u_reset", {hidden, hidden}),
      b_reset(prefix + ".b_reset", {hidden}),
      w_candidate(prefix + ".w_candidate", {hidden, input}),
      u_candidate(prefix + ".u_candidate", {hidden, hidden}),
      b_candidate(prefix + ".b_candidate", {hidden}) {}

std::vector<Parameter*> GruParams::parameters() {
  return {&w_update, &u_update, &b_update, &w_reset, &u_reset, &b_reset, &w_candidate, &u_candidate, &b_candidate};
}

std::vector<const Parameter*> GruParams::parameters() const {
  return {&w_update, &u_update, &b_update, &w_reset, &u_reset, &b_reset, &w_candidate, &u_candidate, &b_candidate};
}

namespace {

template <class P>
GruBinding bind_impl(Tape& tape, P& p) {
  GruBinding b;
  b.input_dim = p.input_dim;
  b.hidden_dim = p.hidden_dim;
  b.w_update = tape.param(p.w_update);
  b.u_update = tape.param(p.u_update);
  b.b_update = tape.param(p.b_update);
  b.w_reset = tape.param(p.w_reset);
  b.u_reset = tape.param(p.u_reset);
  b.b_reset = tape.param(p.b_reset);
  b.w_candidate = tape.param(p.w_candidate);
  b.u_candidate = tape.param(p.u_candidate);
  b.b_candidate = tape.param(p.b_candidate);
  return b;
}

}  // namespace

GruBinding bind(Tape& tape, GruParams& p) { return bind_impl(tape, p); }
GruBinding bind(Tape& tape, const GruParams& p) { return bind_impl(tape, p); }

Var gru_cell(Var x, Var h_prev, const GruBinding& p) {
  if (x.size() != p.input_dim || h_prev.size() != p.hidden_dim) {
    throw std::invalid_argument("gru_cell: expected input " + std::to_string(p.input_dim) + " and hidden " +
                                std::to_string(p.hidden_dim) + ", got " + std::to_string(x.size()) + " and " +
                                std::to_string(h_prev.size()));
  }
  Var z = sigmoid(add(add(matvec(p.w_update, x), matvec(p.u_update, h_prev)), p.b_update));
  Var r = sigmoid(add(add(matvec(p.w_reset, x), matvec(p.u_reset, h_prev)), p.b_reset));
  Var n = tanh(add(add(matvec(p.w_candidate, x), matvec(p.u_candidate, mul(r, h_prev))), p.b_candidate));
  return add(h_prev, mul(z, sub(n, h_prev)));
}

Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const GruParams& p) {
  Tape tape;
  return gru_cell(tape.constant(x), tape.constant(h_prev), bind(tape, p)).value();
}

}  // namespace scidraft::numerics
