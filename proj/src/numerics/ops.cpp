#include "scidraft/numerics/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace scidraft::numerics {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

ConstMatMap as_matrix(const Tensor& t) {
  return ConstMatMap(t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
MatMap as_matrix(Tensor& t) {
  return MatMap(t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
ConstVecMap as_vector(const Tensor& t) {
  return ConstVecMap(t.data().data(), static_cast<Eigen::Index>(t.size()));
}
VecMap as_vector(Tensor& t) { return VecMap(t.data().data(), static_cast<Eigen::Index>(t.size())); }

void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw std::invalid_argument(std::string(op) + ": " + what);
}

void require_same_shape(const char* op, Var a, Var b) {
  require(a.shape() == b.shape(), op,
          "shape mismatch " + shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
}

void require_finite(const char* op, const Tensor& x) {
  const std::size_t bad = x.first_non_finite();
  if (bad != x.size()) {
    throw std::domain_error(std::string(op) + ": non-finite input at index " + std::to_string(bad));
  }
}

void accumulate(Tensor* dst, const Tensor& src, double factor = 1.0) {
  if (!dst) return;
  auto d = dst->data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += factor * s[i];
}

template <class F>
Tensor map_values(const Tensor& x, F f) {
  Tensor y(x.shape());
  auto in = x.data();
  auto out = y.data();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return y;
}

// Elementwise unary op whose derivative is expressed through (x, y).
template <class F, class D>
Var unary(Var x, F f, D derivative) {
  Tensor y = map_values(x.value(), f);
  const std::size_t xi = x.index();
  return x.tape().record(std::move(y), {x}, [xi, derivative](Tape& tape, std::size_t self) {
    Tensor* gx = tape.grad_if_required(xi);
    if (!gx) return;
    const auto g = tape.grad(self).data();
    const auto xv = tape.value(xi).data();
    const auto yv = tape.value(self).data();
    auto out = gx->data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i] * derivative(xv[i], yv[i]);
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Plain tensors
// ---------------------------------------------------------------------------

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor tanh(const Tensor& x) {
  require_finite("tanh", x);
  return map_values(x, [](double v) { return std::tanh(v); });
}

Tensor sigmoid(const Tensor& x) {
  require_finite("sigmoid", x);
  return map_values(x, [](double v) { return sigmoid(v); });
}

Tensor leaky_relu(const Tensor& x, double alpha) {
  require_finite("leaky_relu", x);
  return map_values(x, [alpha](double v) { return v >= 0 ? v : alpha * v; });
}

Tensor softmax(const Tensor& x) {
  require_finite("softmax", x);
  if (x.empty()) return x;
  const std::size_t width = x.rank() == 0 ? x.size() : x.shape().back();
  Tensor y(x.shape());
  auto in = x.data();
  auto out = y.data();
  for (std::size_t start = 0; start < in.size(); start += width) {
    const double peak = *std::max_element(in.begin() + start, in.begin() + start + width);
    double total = 0.0;
    for (std::size_t i = start; i < start + width; ++i) {
      out[i] = std::exp(in[i] - peak);
      total += out[i];
    }
    for (std::size_t i = start; i < start + width; ++i) out[i] /= total;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Differentiable ops
// ---------------------------------------------------------------------------

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tensor y = a.value();
  accumulate(&y, b.value());
  const std::size_t ai = a.index(), bi = b.index();
  return a.tape().record(std::move(y), {a, b}, [ai, bi](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    accumulate(tape.grad_if_required(ai), g);
    accumulate(tape.grad_if_required(bi), g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  Tensor y = a.value();
  accumulate(&y, b.value(), -1.0);
  const std::size_t ai = a.index(), bi = b.index();
  return a.tape().record(std::move(y), {a, b}, [ai, bi](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    accumulate(tape.grad_if_required(ai), g);
    accumulate(tape.grad_if_required(bi), g, -1.0);
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Tensor y = a.value();
  {
    auto yv = y.data();
    auto bv = b.value().data();
    for (std::size_t i = 0; i < yv.size(); ++i) yv[i] *= bv[i];
  }
  const std::size_t ai = a.index(), bi = b.index();
  return a.tape().record(std::move(y), {a, b}, [ai, bi](Tape& tape, std::size_t self) {
    const auto g = tape.grad(self).data();
    const auto av = tape.value(ai).data();
    const auto bv = tape.value(bi).data();
    if (Tensor* ga = tape.grad_if_required(ai)) {
      auto out = ga->data();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i] * bv[i];
    }
    if (Tensor* gb = tape.grad_if_required(bi)) {
      auto out = gb->data();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor y = map_values(a.value(), [factor](double v) { return v * factor; });
  const std::size_t ai = a.index();
  return a.tape().record(std::move(y), {a}, [ai, factor](Tape& tape, std::size_t self) {
    accumulate(tape.grad_if_required(ai), tape.grad(self), factor);
  });
}

Var add_scalar(Var a, double offset) {
  Tensor y = map_values(a.value(), [offset](double v) { return v + offset; });
  const std::size_t ai = a.index();
  return a.tape().record(std::move(y), {a}, [ai](Tape& tape, std::size_t self) {
    accumulate(tape.grad_if_required(ai), tape.grad(self));
  });
}

Var one_minus(Var a) { return add_scalar(scale(a, -1.0), 1.0); }

Var mul_scalar(Var v, Var s) {
  require(s.size() == 1, "mul_scalar", "scale operand must hold one element");
  const double factor = s.item();
  Tensor y = map_values(v.value(), [factor](double x) { return x * factor; });
  const std::size_t vi = v.index(), si = s.index();
  return v.tape().record(std::move(y), {v, s}, [vi, si](Tape& tape, std::size_t self) {
    const auto g = tape.grad(self).data();
    if (Tensor* gv = tape.grad_if_required(vi)) {
      const double factor = tape.value(si)[0];
      auto out = gv->data();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i] * factor;
    }
    if (Tensor* gs = tape.grad_if_required(si)) {
      const auto vv = tape.value(vi).data();
      double total = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) total += g[i] * vv[i];
      (*gs)[0] += total;
    }
  });
}

Var tanh(Var x) {
  require_finite("tanh", x.value());
  return unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var x) {
  require_finite("sigmoid", x.value());
  return unary(
      x, [](double v) { return sigmoid(v); }, [](double, double y) { return y * (1.0 - y); });
}

Var leaky_relu(Var x, double alpha) {
  require_finite("leaky_relu", x.value());
  return unary(
      x, [alpha](double v) { return v >= 0 ? v : alpha * v; },
      [alpha](double v, double) { return v >= 0 ? 1.0 : alpha; });
}

Var relu(Var x) {
  return unary(
      x, [](double v) { return v > 0 ? v : 0.0; }, [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Var log(Var x) {
  return unary(x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var softmax(Var x) {
  Tensor y = softmax(x.value());
  const std::size_t xi = x.index();
  return x.tape().record(std::move(y), {x}, [xi](Tape& tape, std::size_t self) {
    Tensor* gx = tape.grad_if_required(xi);
    if (!gx) return;
    const Tensor& yt = tape.value(self);
    const auto g = tape.grad(self).data();
    const auto yv = yt.data();
    auto out = gx->data();
    const std::size_t width = yt.shape().back();
    for (std::size_t start = 0; start < yv.size(); start += width) {
      double inner = 0.0;
      for (std::size_t i = start; i < start + width; ++i) inner += g[i] * yv[i];
      for (std::size_t i = start; i < start + width; ++i) out[i] += yv[i] * (g[i] - inner);
    }
  });
}

Var minimum(Var a, Var b) {
  require_same_shape("minimum", a, b);
  Tensor y(a.shape());
  {
    auto av = a.value().data();
    auto bv = b.value().data();
    auto yv = y.data();
    for (std::size_t i = 0; i < yv.size(); ++i) yv[i] = std::min(av[i], bv[i]);
  }
  const std::size_t ai = a.index(), bi = b.index();
  return a.tape().record(std::move(y), {a, b}, [ai, bi](Tape& tape, std::size_t self) {
    const auto g = tape.grad(self).data();
    const auto av = tape.value(ai).data();
    const auto bv = tape.value(bi).data();
    Tensor* ga = tape.grad_if_required(ai);
    Tensor* gb = tape.grad_if_required(bi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (av[i] <= bv[i]) {
        if (ga) (*ga)[i] += g[i];
      } else if (gb) {
        (*gb)[i] += g[i];
      }
    }
  });
}

Var matvec(Var w, Var x) {
  const Tensor& wt = w.value();
  require(wt.rank() == 2, "matvec", "weight must be a matrix, got " + shape_to_string(wt.shape()));
  require(x.size() == wt.cols(), "matvec",
          "cannot multiply " + shape_to_string(wt.shape()) + " by vector of " + std::to_string(x.size()));
  Tensor y({wt.rows()});
  as_vector(y).noalias() = as_matrix(wt) * as_vector(x.value());
  const std::size_t wi = w.index(), xi = x.index();
  return w.tape().record(std::move(y), {w, x}, [wi, xi](Tape& tape, std::size_t self) {
    const auto g = as_vector(tape.grad(self));
    if (Tensor* gw = tape.grad_if_required(wi)) {
      as_matrix(*gw).noalias() += g * as_vector(tape.value(xi)).transpose();
    }
    if (Tensor* gx = tape.grad_if_required(xi)) {
      as_vector(*gx).noalias() += as_matrix(tape.value(wi)).transpose() * g;
    }
  });
}

Var matmul_transposed(Var x, Var w) {
  const Tensor& xt = x.value();
  const Tensor& wt = w.value();
  require(xt.rank() == 2 && wt.rank() == 2 && xt.cols() == wt.cols(), "matmul_transposed",
          "incompatible shapes " + shape_to_string(xt.shape()) + " and " + shape_to_string(wt.shape()));
  Tensor y({xt.rows(), wt.rows()});
  as_matrix(y).noalias() = as_matrix(xt) * as_matrix(wt).transpose();
  const std::size_t xi = x.index(), wi = w.index();
  return x.tape().record(std::move(y), {x, w}, [xi, wi](Tape& tape, std::size_t self) {
    const auto g = as_matrix(tape.grad(self));
    if (Tensor* gx = tape.grad_if_required(xi)) as_matrix(*gx).noalias() += g * as_matrix(tape.value(wi));
    if (Tensor* gw = tape.grad_if_required(wi)) {
      as_matrix(*gw).noalias() += g.transpose() * as_matrix(tape.value(xi));
    }
  });
}

Var add_row_broadcast(Var m, Var r) {
  const Tensor& mt = m.value();
  require(mt.rank() == 2 && r.size() == mt.cols(), "add_row_broadcast",
          "cannot broadcast " + shape_to_string(r.shape()) + " over " + shape_to_string(mt.shape()));
  Tensor y = mt;
  as_matrix(y).rowwise() += as_vector(r.value()).transpose();
  const std::size_t mi = m.index(), ri = r.index();
  return m.tape().record(std::move(y), {m, r}, [mi, ri](Tape& tape, std::size_t self) {
    const Tensor& g = tape.grad(self);
    accumulate(tape.grad_if_required(mi), g);
    if (Tensor* gr = tape.grad_if_required(ri)) {
      as_vector(*gr) += as_matrix(g).colwise().sum().transpose();
    }
  });
}

Var outer(Var a, Var b) {
  Tensor y({a.size(), b.size()});
  as_matrix(y).noalias() = as_vector(a.value()) * as_vector(b.value()).transpose();
  const std::size_t ai = a.index(), bi = b.index();
  return a.tape().record(std::move(y), {a, b}, [ai, bi](Tape& tape, std::size_t self) {
    const auto g = as_matrix(tape.grad(self));
    if (Tensor* ga = tape.grad_if_required(ai)) as_vector(*ga).noalias() += g * as_vector(tape.value(bi));
    if (Tensor* gb = tape.grad_if_required(bi)) {
      as_vector(*gb).noalias() += g.transpose() * as_vector(tape.value(ai));
    }
  });
}

Var vecmat(Var w, Var m) {
  const Tensor& mt = m.value();
  require(mt.rank() == 2 && w.size() == mt.rows(), "vecmat",
          "cannot combine weights of " + std::to_string(w.size()) + " with " + shape_to_string(mt.shape()));
  Tensor y({mt.cols()});
  as_vector(y).noalias() = as_matrix(mt).transpose() * as_vector(w.value());
  const std::size_t wi = w.index(), mi = m.index();
  return w.tape().record(std::move(y), {w, m}, [wi, mi](Tape& tape, std::size_t self) {
    const auto g = as_vector(tape.grad(self));
    if (Tensor* gw = tape.grad_if_required(wi)) as_vector(*gw).noalias() += as_matrix(tape.value(mi)) * g;
    if (Tensor* gm = tape.grad_if_required(mi)) {
      as_matrix(*gm).noalias() += as_vector(tape.value(wi)) * g.transpose();
    }
  });
}

Var concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var concat(std::span<const Var> parts) {
  require(!parts.empty(), "concat", "no operands");
  std::vector<double> values;
  std::vector<std::size_t> indices;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    offsets.push_back(values.size());
    indices.push_back(p.index());
    const auto v = p.value().data();
    values.insert(values.end(), v.begin(), v.end());
  }
  return parts.front().tape().record(
      Tensor::vector(std::move(values)), parts,
      [indices = std::move(indices), offsets = std::move(offsets)](Tape& tape, std::size_t self) {
        const auto g = tape.grad(self).data();
        for (std::size_t k = 0; k < indices.size(); ++k) {
          Tensor* gp = tape.grad_if_required(indices[k]);
          if (!gp) continue;
          auto out = gp->data();
          for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[offsets[k] + i];
        }
      });
}

Var stack_rows(std::span<const Var> rows) {
  require(!rows.empty(), "stack_rows", "no rows");
  const std::size_t width = rows.front().size();
  std::vector<double> values;
  values.reserve(width * rows.size());
  std::vector<std::size_t> indices;
  for (const Var& r : rows) {
    require(r.size() == width, "stack_rows", "ragged rows");
    indices.push_back(r.index());
    const auto v = r.value().data();
    values.insert(values.end(), v.begin(), v.end());
  }
  return rows.front().tape().record(
      Tensor::matrix(rows.size(), width, std::move(values)), rows,
      [indices = std::move(indices), width](Tape& tape, std::size_t self) {
        const auto g = tape.grad(self).data();
        for (std::size_t k = 0; k < indices.size(); ++k) {
          Tensor* gp = tape.grad_if_required(indices[k]);
          if (!gp) continue;
          auto out = gp->data();
          for (std::size_t i = 0; i < width; ++i) out[i] += g[k * width + i];
        }
      });
}

Var slice(Var x, std::size_t offset, std::size_t length) {
  require(offset + length <= x.size(), "slice", "range exceeds " + std::to_string(x.size()));
  const auto v = x.value().data();
  Tensor y = Tensor::vector(std::vector<double>(v.begin() + offset, v.begin() + offset + length));
  const std::size_t xi = x.index();
  return x.tape().record(std::move(y), {x}, [xi, offset](Tape& tape, std::size_t self) {
    Tensor* gx = tape.grad_if_required(xi);
    if (!gx) return;
    const auto g = tape.grad(self).data();
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[offset + i] += g[i];
  });
}

Var row(Var m, std::size_t i) {
  const Tensor& mt = m.value();
  require(mt.rank() == 2 && i < mt.rows(), "row",
          "row " + std::to_string(i) + " out of range for " + shape_to_string(mt.shape()));
  const auto r = mt.row(i);
  Tensor y = Tensor::vector(std::vector<double>(r.begin(), r.end()));
  const std::size_t mi = m.index();
  return m.tape().record(std::move(y), {m}, [mi, i](Tape& tape, std::size_t self) {
    Tensor* gm = tape.grad_if_required(mi);
    if (!gm) return;
    const auto g = tape.grad(self).data();
    auto out = gm->row(i);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += g[k];
  });
}

Var pick(Var x, std::size_t i) {
  require(i < x.size(), "pick", "index " + std::to_string(i) + " out of range " + std::to_string(x.size()));
  const std::size_t xi = x.index();
  return x.tape().record(Tensor::scalar(x.value()[i]), {x}, [xi, i](Tape& tape, std::size_t self) {
    if (Tensor* gx = tape.grad_if_required(xi)) (*gx)[i] += tape.grad(self)[0];
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  const std::size_t xi = x.index();
  return x.tape().record(Tensor::scalar(total), {x}, [xi](Tape& tape, std::size_t self) {
    Tensor* gx = tape.grad_if_required(xi);
    if (!gx) return;
    const double g = tape.grad(self)[0];
    for (double& v : gx->data()) v += g;
  });
}

Var dot(Var a, Var b) {
  require(a.size() == b.size(), "dot",
          "length mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  const double value = as_vector(a.value()).dot(as_vector(b.value()));
  const std::size_t ai = a.index(), bi = b.index();
  return a.tape().record(Tensor::scalar(value), {a, b}, [ai, bi](Tape& tape, std::size_t self) {
    const double g = tape.grad(self)[0];
    accumulate(tape.grad_if_required(ai), tape.value(bi), g);
    accumulate(tape.grad_if_required(bi), tape.value(ai), g);
  });
}

Var l2_norm(Var x) {
  const double value = as_vector(x.value()).norm();
  const std::size_t xi = x.index();
  return x.tape().record(Tensor::scalar(value), {x}, [xi](Tape& tape, std::size_t self) {
    const double norm = tape.value(self)[0];
    if (norm == 0.0) return;
    accumulate(tape.grad_if_required(xi), tape.value(xi), tape.grad(self)[0] / norm);
  });
}

Var scatter_add(Var x, std::span<const std::size_t> from, std::span<const std::size_t> to,
                std::span<const double> weight, std::size_t out_size) {
  require(from.size() == to.size() && to.size() == weight.size(), "scatter_add", "index lists differ in length");
  Tensor y({out_size});
  const auto xv = x.value().data();
  for (std::size_t k = 0; k < from.size(); ++k) {
    require(from[k] < xv.size() && to[k] < out_size, "scatter_add", "index out of range");
    y[to[k]] += weight[k] * xv[from[k]];
  }
  const std::size_t xi = x.index();
  return x.tape().record(
      std::move(y), {x},
      [xi, from = std::vector<std::size_t>(from.begin(), from.end()),
       to = std::vector<std::size_t>(to.begin(), to.end()),
       weight = std::vector<double>(weight.begin(), weight.end())](Tape& tape, std::size_t self) {
        Tensor* gx = tape.grad_if_required(xi);
        if (!gx) return;
        const auto g = tape.grad(self).data();
        for (std::size_t k = 0; k < from.size(); ++k) (*gx)[from[k]] += weight[k] * g[to[k]];
      });
}

}  // namespace scidraft::numerics
