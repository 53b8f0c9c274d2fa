#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "scidraft/error.hpp"
#include "scidraft/numerics/adam.hpp"
#include "scidraft/numerics/gru.hpp"
#include "scidraft/numerics/ops.hpp"
#include "scidraft/numerics/param_io.hpp"
#include "scidraft/numerics/random.hpp"
#include "support/finite_difference.hpp"

using namespace scidraft::numerics;
using scidraft::testing::check_gradients;

namespace {

double scalar_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar-by-scalar GRU recomputation, independent of the tape ops.
std::vector<double> gru_oracle(const std::vector<double>& x, const std::vector<double>& h, const GruParams& p) {
  const std::size_t n = p.hidden_dim, m = p.input_dim;
  auto affine = [&](const Parameter& w, const Parameter& u, const Parameter& b, const std::vector<double>& hv,
                    std::size_t i) {
    double acc = b.value[i];
    for (std::size_t j = 0; j < m; ++j) acc += w.value[i * m + j] * x[j];
    for (std::size_t j = 0; j < n; ++j) acc += u.value[i * n + j] * hv[j];
    return acc;
  };
  std::vector<double> z(n), r(n), rh(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = scalar_sigmoid(affine(p.w_update, p.u_update, p.b_update, h, i));
    r[i] = scalar_sigmoid(affine(p.w_reset, p.u_reset, p.b_reset, h, i));
  }
  for (std::size_t i = 0; i < n; ++i) rh[i] = r[i] * h[i];
  for (std::size_t i = 0; i < n; ++i) {
    const double cand = std::tanh(affine(p.w_candidate, p.u_candidate, p.b_candidate, rh, i));
    out[i] = (1.0 - z[i]) * h[i] + z[i] * cand;
  }
  return out;
}

}  // namespace

TEST_CASE("softmax analytic cases") {
  const Tensor y = softmax(Tensor::vector({0, 0, 0}));
  for (double v : y.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(1 + rng.index(12));
    for (double& v : logits) v = rng.uniform(-30, 30);
    const Tensor a = softmax(Tensor::vector(logits));
    for (double& v : logits) v += 17.25;
    const Tensor b = softmax(Tensor::vector(logits));
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] >= 0.0);
      CHECK(std::abs(a[i] - b[i]) <= 1e-9);
      total += a[i];
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);
  }
}

TEST_CASE("softmax normalises each row of a matrix") {
  const Tensor y = softmax(Tensor::matrix(2, 2, {0, 0, 1000, 0}));
  CHECK(y.at(0, 0) == doctest::Approx(0.5));
  CHECK(y.at(1, 0) == doctest::Approx(1.0));
  CHECK(y.at(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("activation identities") {
  CHECK(sigmoid(Tensor::scalar(0.0)).item() == 0.5);
  CHECK(tanh(Tensor::scalar(0.0)).item() == 0.0);
  CHECK(leaky_relu(Tensor::scalar(-2.0), 0.2).item() == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(leaky_relu(Tensor::scalar(3.0), 0.2).item() == 3.0);
  CHECK(leaky_relu(Tensor::scalar(0.0), 0.2).item() == 0.0);
}

TEST_CASE("non-finite input is rejected") {
  const Tensor bad = Tensor::vector({1.0, std::numeric_limits<double>::quiet_NaN()});
  CHECK_THROWS_WITH_AS(softmax(bad), "softmax: non-finite input at index 1", std::domain_error);
  CHECK_THROWS_AS(tanh(Tensor::scalar(std::numeric_limits<double>::infinity())), std::domain_error);
  CHECK_THROWS_AS(sigmoid(bad), std::domain_error);
  CHECK_THROWS_AS(leaky_relu(bad, 0.2), std::domain_error);
}

TEST_CASE("gru cell with zero parameters") {
  GruParams p("gru", 4, 3);
  const Tensor x = Tensor::vector({0.3, -1.0, 2.0, 0.5});
  CHECK(gru_cell(x, Tensor({3}), p) == Tensor({3}));

  const Tensor v = Tensor::vector({0.4, -0.8, 0.1});
  const Tensor out = gru_cell(x, v, p);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(0.5 * v[i]).epsilon(1e-15));
}

TEST_CASE("gru cell matches scalar recomputation") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    GruParams p("gru", 3, 3);
    init_uniform(p.parameters(), rng, 0.9);
    std::vector<double> x(3), h(3);
    for (double& v : x) v = rng.uniform(-1, 1);
    for (double& v : h) v = rng.uniform(-0.99, 0.99);
    const Tensor out = gru_cell(Tensor::vector(x), Tensor::vector(h), p);
    const auto expected = gru_oracle(x, h, p);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(out[i] == doctest::Approx(expected[i]).epsilon(1e-13));
      CHECK(std::abs(out[i]) < 1.0);
    }
  }
}

TEST_CASE("gru cell rejects mismatched dimensions") {
  GruParams p("gru", 2, 3);
  CHECK_THROWS_AS(gru_cell(Tensor({3}), Tensor({3}), p), std::invalid_argument);
  CHECK_THROWS_AS(gru_cell(Tensor({2}), Tensor({4}), p), std::invalid_argument);
}

TEST_CASE("analytic gradients") {
  SUBCASE("x*x at 3") {
    Parameter x("x", {1});
    x.value[0] = 3.0;
    Tape tape;
    Var xv = tape.param(x);
    const auto g = gradients(dot(xv, xv), std::vector<Parameter*>{&x});
    CHECK(g[0][0] == 6.0);
  }
  SUBCASE("softmax cross-entropy at uniform logits") {
    Parameter logits("logits", {2});
    Tape tape;
    Var loss = scale(log(pick(softmax(tape.param(logits)), 0)), -1.0);
    const auto g = gradients(loss, std::vector<Parameter*>{&logits});
    CHECK(g[0][0] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(g[0][1] == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("parameters off the path receive exact zero") {
  Parameter used("used", {2}), unused("unused", {2});
  used.value = Tensor::vector({1, 2});
  unused.value = Tensor::vector({5, 6});
  unused.grad = Tensor::vector({9, 9});
  Tape tape;
  tape.param(unused);
  const auto g = gradients(sum(tape.param(used)), std::vector<Parameter*>{&used, &unused});
  CHECK(g[1] == Tensor({2}));
  CHECK(g[0] == Tensor::vector({1, 1}));
}

TEST_CASE("backward rejects non-scalar roots") {
  Parameter p("p", {3});
  Tape tape;
  CHECK_THROWS_AS(tape.backward(tanh(tape.param(p))), std::invalid_argument);
}

TEST_CASE("shared nodes accumulate gradients") {
  Parameter p("p", {1});
  p.value[0] = 0.7;
  Tape tape;
  Var x = tape.param(p);
  Var y = tanh(x);
  Var loss = add(mul(y, y), y);  // y^2 + y
  const auto g = gradients(loss, std::vector<Parameter*>{&p});
  const double t = std::tanh(0.7);
  CHECK(g[0][0] == doctest::Approx((2 * t + 1) * (1 - t * t)).epsilon(1e-14));
}

TEST_CASE("composed graph matches central finite differences") {
  Rng rng(2024);
  Parameter w("w", {4, 3}), x("x", {3}), m("m", {5, 3}), e("e", {2, 3}), c("c", {5});
  GruParams gru("gru", 3, 4);
  std::vector<Parameter*> params{&w, &x, &m, &e, &c};
  for (Parameter* p : gru.parameters()) params.push_back(p);
  init_uniform(params, rng, 0.8);
  for (double& v : c.value.data()) v = std::abs(v) + 0.05;

  auto build = [&](Tape& tape) {
    Var wx = matvec(tape.param(w), tape.param(x));
    Var h = gru_cell(tape.param(x), tanh(wx), bind(tape, gru));
    Var scores = matvec(matmul_transposed(tape.param(m), tape.param(e)), slice(concat({h, wx}), 2, 2));
    Var att = softmax(leaky_relu(scores, 0.2));
    Var ctx = vecmat(att, tape.param(m));
    Var cov = minimum(att, tape.param(c));
    Var grid = tanh(add_row_broadcast(outer(att, ctx), ctx));
    Var spread = scatter_add(att, std::vector<std::size_t>{0, 1, 2, 3, 4}, std::vector<std::size_t>{0, 0, 1, 2, 2},
                             std::vector<double>{1.0, 0.5, 1.0, 2.0, 0.25}, 3);
    Var gate = sigmoid(dot(ctx, ctx));
    Var mix = add(mul_scalar(spread, gate), mul_scalar(slice(ctx, 0, 3), one_minus(gate)));
    Var total = add(sum(mul(mix, mix)), sum(cov));
    total = add(total, l2_norm(sub(row(tape.param(e), 1), slice(h, 0, 3))));
    total = add(total, sum(relu(add_scalar(ctx, 0.1))));
    total = add(total, pick(grid, 7));
    return add(total, scale(log(add_scalar(sigmoid(pick(ctx, 0)), 0.5)), -1.0));
  };
  const auto result = check_gradients(build, params);
  INFO("worst: ", result.worst_parameter, "[", result.worst_index, "] analytic ", result.analytic, " numeric ",
       result.numeric);
  CHECK(result.max_relative_error < 1e-4);
}

TEST_CASE("same seed reproduces values and gradients bit for bit") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    GruParams gru("gru", 3, 3);
    init_uniform(gru.parameters(), rng, 0.08);
    Tape tape;
    Var h = gru_cell(tape.constant(Tensor::vector({1, 2, 3})), tape.constant(Tensor({3})), bind(tape, gru));
    auto g = gradients(sum(mul(h, h)), gru.parameters());
    g.push_back(h.value());
    return g;
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}

TEST_CASE("adam first step moves each coordinate by the learning rate") {
  Parameter p("p", {2});
  p.value = Tensor::vector({1.0, -1.0});
  Adam adam({&p}, {.learning_rate = 0.01});
  p.grad = Tensor::vector({4.0, -0.5});
  adam.step();
  CHECK(p.value[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-9));
  CHECK(p.value[1] == doctest::Approx(-1.0 + 0.01).epsilon(1e-9));
}

TEST_CASE("parameter files round-trip and validate their manifest") {
  Rng rng(1);
  Parameter a("a", {2, 3}), b("b", {4});
  init_uniform(std::vector<Parameter*>{&a, &b}, rng, 1.0);
  std::stringstream buffer;
  write_parameter_file(buffer, "TESTPARM", 1, {{"note", "x"}}, std::vector<const Parameter*>{&a, &b});

  Parameter a2("a", {2, 3}), b2("b", {4});
  ParameterFileReader reader(buffer, "TESTPARM", 1);
  CHECK(reader.header()["note"] == "x");
  reader.read_values(std::vector<Parameter*>{&a2, &b2});
  CHECK(a2.value == a.value);
  CHECK(b2.value == b.value);

  std::stringstream again(buffer.str());
  CHECK_THROWS_AS(ParameterFileReader(again, "OTHERTAG", 1), scidraft::DataError);
  std::stringstream wrong(buffer.str());
  ParameterFileReader mismatched(wrong, "TESTPARM", 1);
  Parameter c("a", {3, 2}), d("b", {4});
  CHECK_THROWS_AS(mismatched.read_values(std::vector<Parameter*>{&c, &d}), scidraft::DataError);
}
