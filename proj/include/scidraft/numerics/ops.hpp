#pragma once

#include <cstddef>
#include <span>

#include "scidraft/numerics/tape.hpp"
#include "scidraft/numerics/tensor.hpp"

namespace scidraft::numerics {

// ---------------------------------------------------------------------------
// Plain-tensor activations. These reject non-finite input with
// std::domain_error naming the op and the offending index.
// ---------------------------------------------------------------------------

Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double alpha);
// Softmax over the last axis, computed with max subtraction.
Tensor softmax(const Tensor& x);

double sigmoid(double x);

// ---------------------------------------------------------------------------
// Differentiable ops. Scalars are single-element rank-1 tensors.
// ---------------------------------------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
Var one_minus(Var a);
// v * s where s holds one element.
Var mul_scalar(Var v, Var s);

Var tanh(Var x);
Var sigmoid(Var x);
Var leaky_relu(Var x, double alpha);
Var relu(Var x);
Var softmax(Var x);
Var log(Var x);
Var minimum(Var a, Var b);

// W[m,n] * x[n] -> [m]
Var matvec(Var w, Var x);
// X[l,n] * W[m,n]^T -> [l,m]
Var matmul_transposed(Var x, Var w);
// M[l,m] + row[m] broadcast over rows
Var add_row_broadcast(Var m, Var row);
// a[l] (outer) b[m] -> [l,m]
Var outer(Var a, Var b);
// w[n]^T M[n,d] -> [d]
Var vecmat(Var w, Var m);

Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
Var stack_rows(std::span<const Var> rows);
Var slice(Var x, std::size_t offset, std::size_t length);
// Row i of a matrix as a vector (embedding lookup).
Var row(Var m, std::size_t i);
Var pick(Var x, std::size_t i);

Var sum(Var x);
Var dot(Var a, Var b);
Var l2_norm(Var x);

// y[out_size] with y[to[k]] += weight[k] * x[from[k]] for every k.
Var scatter_add(Var x, std::span<const std::size_t> from, std::span<const std::size_t> to,
                std::span<const double> weight, std::size_t out_size);

}  // namespace scidraft::numerics
