#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "scidraft/numerics/tape.hpp"

namespace scidraft::numerics {

// Gated recurrent unit, reset-before-candidate form:
//
//   z  = sigmoid(Wz x + Uz h + bz)
//   r  = sigmoid(Wr x + Ur h + br)
//   n  = tanh(Wn x + Un (r * h) + bn)
//   h' = (1 - z) * h + z * n
struct GruParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Parameter w_update, u_update, b_update;
  Parameter w_reset, u_reset, b_reset;
  Parameter w_candidate, u_candidate, b_candidate;

  GruParams() = default;
  GruParams(const std::string& prefix, std::size_t input, std::size_t hidden);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
};

// Binds a GRU's parameters to a tape once so repeated steps reuse the leaves.
struct GruBinding {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Var w_update, u_update, b_update;
  Var w_reset, u_reset, b_reset;
  Var w_candidate, u_candidate, b_candidate;
};

GruBinding bind(Tape& tape, GruParams& p);
GruBinding bind(Tape& tape, const GruParams& p);

Var gru_cell(Var x, Var h_prev, const GruBinding& p);

// Forward-only convenience on plain tensors.
Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const GruParams& p);

}  // namespace scidraft::numerics
