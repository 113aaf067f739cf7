#include "ggn/tensor.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

using namespace ggn;

namespace {

using BuildFn = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

// Central-difference gradient check of a scalar-valued tape program.
void check_grads(const std::vector<std::pair<std::vector<int>, Vec>>& leaves,
                 const BuildFn& build, double step = 1e-6, double tol = 1e-5) {
  auto eval = [&](const std::vector<Vec>& vals) {
    Tape tape;
    std::vector<Tensor> ls;
    for (std::size_t i = 0; i < leaves.size(); ++i)
      ls.push_back(tape.leaf(leaves[i].first, vals[i]));
    return build(tape, ls).scalar();
  };

  std::vector<Vec> vals;
  for (const auto& [shape, v] : leaves) vals.push_back(v);

  Tape tape;
  std::vector<Tensor> ls;
  for (std::size_t i = 0; i < leaves.size(); ++i)
    ls.push_back(tape.leaf(leaves[i].first, vals[i]));
  Tensor loss = build(tape, ls);
  tape.backward(loss);

  for (std::size_t i = 0; i < leaves.size(); ++i) {
    for (int j = 0; j < vals[i].size(); ++j) {
      std::vector<Vec> up = vals, dn = vals;
      up[i][j] += step;
      dn[i][j] -= step;
      const double fd = (eval(up) - eval(dn)) / (2.0 * step);
      const double ad = ls[i].grad()[j];
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(ad - fd) <= tol * std::max(1.0, std::abs(fd)));
    }
  }
}

Vec vec(std::initializer_list<double> v) {
  Vec out((int)v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("elementwise forward values") {
  Tape tape;
  Tensor a = tape.leaf({3}, vec({1.0, -2.0, 3.0}));
  Tensor b = tape.constant({3}, vec({4.0, 0.5, -1.0}));
  CHECK(tape.add(a, b).values().isApprox(vec({5.0, -1.5, 2.0})));
  CHECK(tape.sub(a, b).values().isApprox(vec({-3.0, -2.5, 4.0})));
  CHECK(tape.mul(a, b).values().isApprox(vec({4.0, -1.0, -3.0})));
  CHECK(tape.neg(a).values().isApprox(vec({-1.0, 2.0, -3.0})));
  CHECK(tape.scale(a, 2.5).values().isApprox(vec({2.5, -5.0, 7.5})));
  CHECK(tape.relu(a).values().isApprox(vec({1.0, 0.0, 3.0})));
  CHECK(tape.sum(a).scalar() == doctest::Approx(2.0));
  // softplus(0) = log 2; softplus is monotone and positive
  Tensor sp = tape.softplus(tape.constant({1}, vec({0.0})));
  CHECK(sp.scalar() == doctest::Approx(std::log(2.0)));
  // l2: sqrt(1 + 4 + 9)
  CHECK(tape.l2_norm(a).scalar() == doctest::Approx(std::sqrt(14.0)));
}

TEST_CASE("matmul against a hand-multiplied 2x2") {
  Tape tape;
  // [1 2; 3 4] * [5 6; 7 8] = [19 22; 43 50]
  Tensor a = tape.leaf({2, 2}, vec({1, 2, 3, 4}));
  Tensor b = tape.leaf({2, 2}, vec({5, 6, 7, 8}));
  CHECK(tape.matmul(a, b).values().isApprox(vec({19, 22, 43, 50})));

  Mat bc(2, 2);
  bc << 5, 6, 7, 8;
  CHECK(tape.matmul_const(a, bc).values().isApprox(vec({19, 22, 43, 50})));
}

TEST_CASE("gather, scatter_add and concat layouts") {
  Tape tape;
  Tensor x = tape.leaf({4}, vec({10, 20, 30, 40}));
  Tensor g = tape.gather(x, {3, 0, 0}, {3});
  CHECK(g.values().isApprox(vec({40, 10, 10})));

  Tensor s = tape.scatter_add(g, {1, 1, 2}, 4);
  CHECK(s.values().isApprox(vec({0, 50, 10, 0})));

  std::vector<Tensor> parts = {g, s};
  Tensor c = tape.concat(parts);
  CHECK(c.size() == 7);
  CHECK(c.values().head(3).isApprox(g.values()));
  CHECK(c.values().tail(4).isApprox(s.values()));
}

TEST_CASE("spmatmul and table_matvec forward values") {
  Tape tape;
  SpMat a(2, 2);
  a.insert(0, 1) = 1.0;
  a.insert(1, 0) = 1.0;
  a.makeCompressed();
  Tensor x = tape.leaf({2, 3}, vec({1, 2, 3, 4, 5, 6}));
  CHECK(tape.spmatmul(a, x).values().isApprox(vec({4, 5, 6, 1, 2, 3})));

  ElemTable t;
  Mat m0(2, 3), m1(2, 3);
  m0 << 1, 0, 0, 0, 1, 0;
  m1 << 0, 0, 1, 1, 1, 1;
  t.per_elem = {m0, m1};
  // row e of the output is T[e] applied to row e of x
  CHECK(tape.table_matvec(t, x).values().isApprox(vec({1, 2, 6, 15})));
}

TEST_CASE("gradients of every differentiable op match finite differences") {
  std::vector<int> s23 = {2, 3};
  const Vec x0 = vec({0.3, -1.2, 0.7, 2.1, -0.4, 0.9});
  const Vec y0 = vec({1.1, 0.2, -0.6, 0.4, 1.7, -0.8});

  check_grads({{s23, x0}, {s23, y0}}, [](Tape& t, const std::vector<Tensor>& l) {
    return t.l2_norm(t.add(t.mul(l[0], l[1]), t.neg(t.sub(l[0], t.scale(l[1], 0.5)))));
  });

  check_grads({{s23, x0}}, [](Tape& t, const std::vector<Tensor>& l) {
    return t.sum(t.softplus(t.relu(l[0])));
  });

  check_grads({{{2, 3}, x0}, {{3, 2}, y0}}, [](Tape& t, const std::vector<Tensor>& l) {
    return t.l2_norm(t.matmul(l[0], l[1]));
  });

  check_grads({{{1}, vec({0.7})}, {s23, x0}}, [](Tape& t, const std::vector<Tensor>& l) {
    return t.sum(t.scalar_mul(l[0], l[1]));
  });

  check_grads({{s23, x0}, {{3}, vec({0.5, -1.0, 2.0})}},
              [](Tape& t, const std::vector<Tensor>& l) {
                return t.l2_norm(t.add_rowvec(l[0], l[1]));
              });

  Mat bc(3, 2);
  bc << 1, -2, 0.5, 3, -1, 0.25;
  check_grads({{s23, x0}}, [bc](Tape& t, const std::vector<Tensor>& l) {
    return t.sum(t.matmul_const(l[0], bc));
  });

  SpMat a(2, 2);
  a.insert(0, 0) = 2.0;
  a.insert(0, 1) = -1.0;
  a.insert(1, 0) = -1.0;
  a.insert(1, 1) = 3.0;
  a.makeCompressed();
  check_grads({{s23, x0}}, [&a](Tape& t, const std::vector<Tensor>& l) {
    return t.l2_norm(t.spmatmul(a, l[0]));
  });

  ElemTable tab;
  Mat m0(2, 3), m1(2, 3);
  m0 << 1, 2, 3, 4, 5, 6;
  m1 << -1, 0.5, 2, 0, 1, -2;
  tab.per_elem = {m0, m1};
  check_grads({{s23, x0}}, [&tab](Tape& t, const std::vector<Tensor>& l) {
    return t.l2_norm(t.table_matvec(tab, l[0]));
  });

  check_grads({{{4}, vec({1, -2, 3, 0.5})}}, [](Tape& t, const std::vector<Tensor>& l) {
    Tensor g = t.gather(l[0], {2, 0, 2}, {3});
    Tensor s = t.scatter_add(g, {0, 1, 1}, 3);
    std::vector<Tensor> parts = {g, s};
    return t.l2_norm(t.concat(parts));
  });
}

TEST_CASE("l2 norm gradient is zero at the origin") {
  Tape tape;
  Tensor x = tape.leaf({3}, Vec::Zero(3));
  Tensor n = tape.l2_norm(x);
  tape.backward(n);
  CHECK(x.grad().norm() == 0.0);
}

TEST_CASE("constants never accumulate gradients") {
  Tape tape;
  Tensor a = tape.leaf({2}, vec({1.0, 2.0}));
  Tensor c = tape.constant({2}, vec({3.0, 4.0}));
  Tensor loss = tape.sum(tape.mul(a, c));
  tape.backward(loss);
  CHECK(a.grad().isApprox(vec({3.0, 4.0})));
  CHECK_FALSE(tape.node(c.id()).requires_grad);
}

TEST_CASE("adam takes a near-signed step with bias correction") {
  ParamSet ps;
  ps.add("w", {2}, vec({1.0, -1.0}));
  Tape tape;
  auto leaves = ps.make_leaves(tape);
  // loss = 2 w0 - 3 w1: constant gradient (2, -3)
  Tensor loss = tape.sum(tape.mul(leaves[0], tape.constant({2}, vec({2.0, -3.0}))));
  tape.backward(loss);
  AdamConfig cfg;
  cfg.lr = 0.1;
  ps.adam_step(leaves, cfg);
  CHECK(ps.value(0)[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(ps.value(0)[1] == doctest::Approx(-0.9).epsilon(1e-6));
  CHECK(ps.step_count() == 1);
}

TEST_CASE("parameter checkpoints round-trip") {
  ParamSet ps;
  ps.add("a", {2, 2}, vec({1.5, -2.25, 0.125, 3.0}));
  ps.add("b", {3}, vec({-0.5, 0.0, 42.0}));
  const std::string path = "params_roundtrip.txt";
  ps.save(path);

  ParamSet loaded;
  loaded.add("a", {2, 2}, Vec::Zero(4));
  loaded.add("b", {3}, Vec::Zero(3));
  loaded.load(path);
  CHECK(loaded.value(0).isApprox(ps.value(0)));
  CHECK(loaded.value(1).isApprox(ps.value(1)));
}

TEST_CASE("non-finite gradients are rejected by name") {
  ParamSet ps;
  ps.add("w", {1}, vec({0.0}));
  Tape tape;
  auto leaves = ps.make_leaves(tape);
  // d/dw sqrt(w) at w = 0 is infinite through l2_norm's subgradient path;
  // force a NaN instead via 0 * inf
  Tensor loss = tape.mul(leaves[0], tape.constant({1}, vec({std::numeric_limits<double>::infinity()})));
  tape.backward(tape.sum(loss));
  CHECK_THROWS_WITH_AS(ps.adam_step(leaves, {}), doctest::Contains("w"), std::runtime_error);
}

TEST_CASE("backward visits shared subexpressions once (values accumulate)") {
  Tape tape;
  Tensor x = tape.leaf({2}, vec({3.0, 5.0}));
  Tensor y = tape.add(x, x);  // dy/dx = 2
  tape.backward(tape.sum(y));
  CHECK(x.grad().isApprox(vec({2.0, 2.0})));
}
