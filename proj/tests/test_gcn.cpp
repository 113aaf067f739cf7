#include "ggn/gcn.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace ggn;

namespace {

SpMat graph_laplacian(int n_elems_nodes) {
  const Mesh mesh = make_square_quads(2, 2, 1, {"b", "r", "t", "l"});
  (void)n_elems_nodes;
  return build_graph_operators(mesh).scaled_laplacian;
}

Mat coords() {
  const Mesh mesh = make_square_quads(2, 2, 1, {"b", "r", "t", "l"});
  return normalize_coords(mesh.nodes);
}

}  // namespace

TEST_CASE("normalize_coords: zero column mean, unit max-abs") {
  const Mat x = coords();
  CHECK(x.colwise().mean().cwiseAbs().maxCoeff() < 1e-14);
  CHECK(x.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("chebyshev basis: K = 1 returns the input") {
  const SpMat lhat = graph_laplacian(9);
  const Mat x = coords();
  Tape tape;
  Tensor xt = tape.constant({(int)x.rows(), (int)x.cols()},
                            Eigen::Map<const Vec>(x.data(), x.size()));
  const auto z = cheb_basis(tape, lhat, xt, 1);
  CHECK(z.size() == 1);
  CHECK((z[0].values() - Eigen::Map<const Vec>(x.data(), x.size())).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("chebyshev basis on a zero laplacian is [X, 0, -X]") {
  const int n = 5;
  SpMat zero(n, n);
  zero.setZero();
  Vec xv(n);
  xv << 1, -2, 3, 0.5, 4;
  Tape tape;
  Tensor xt = tape.constant({n, 1}, xv);
  const auto z = cheb_basis(tape, zero, xt, 3);
  CHECK((z[0].values() - xv).cwiseAbs().maxCoeff() == 0.0);
  CHECK(z[1].values().cwiseAbs().maxCoeff() == 0.0);
  CHECK((z[2].values() + xv).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("chebyshev basis matches dense T_k(Lhat) X up to K = 6") {
  const SpMat lhat = graph_laplacian(9);
  const int n = (int)lhat.rows();
  const Mat x = coords();
  Tape tape;
  Tensor xt = tape.constant({n, 2}, Eigen::Map<const Vec>(x.data(), x.size()));
  const auto z = cheb_basis(tape, lhat, xt, 6);

  const Eigen::MatrixXd dense = Eigen::MatrixXd(lhat);
  std::vector<Eigen::MatrixXd> t(6);
  t[0] = Eigen::MatrixXd::Identity(n, n);
  t[1] = dense;
  for (int k = 2; k < 6; ++k) t[k] = 2.0 * dense * t[k - 1] - t[k - 2];
  for (int k = 0; k < 6; ++k) {
    const Eigen::MatrixXd ref = t[k] * x;
    Mat zk(n, 2);
    std::copy(z[k].values().data(), z[k].values().data() + n * 2, zk.data());
    CHECK((Eigen::MatrixXd(zk) - ref).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("zeroed thetas leave only the bias") {
  const SpMat lhat = graph_laplacian(9);
  const int n = (int)lhat.rows();
  GcnConfig cfg;
  cfg.cheb_order = 3;
  cfg.hidden = {};
  cfg.out_dim = 1;
  GcnNet net("u", 2, lhat, cfg);
  ParamSet params;
  net.register_params(params, 1);
  for (int i = 0; i < params.count(); ++i)
    if (params.name(i).find(".b") == std::string::npos) params.value(i).setZero();
  const int bias = params.index_of("u.l0.b");
  REQUIRE(bias >= 0);
  params.value(bias)[0] = 0.75;

  Tape tape;
  const auto leaves = params.make_leaves(tape);
  const Mat x = coords();
  Tensor xt = tape.constant({n, 2}, Eigen::Map<const Vec>(x.data(), x.size()));
  const Vec y = net.forward(tape, leaves, xt).values();
  for (int i = 0; i < n; ++i) CHECK(y[i] == 0.75);
}

TEST_CASE("K = 1 single layer reduces to a dense linear map of the features") {
  const SpMat lhat = graph_laplacian(9);
  const int n = (int)lhat.rows();
  GcnConfig cfg;
  cfg.cheb_order = 1;
  cfg.hidden = {};
  GcnNet net("u", 2, lhat, cfg);
  ParamSet params;
  net.register_params(params, 3);
  const Mat x = coords();
  Tape tape;
  const auto leaves = params.make_leaves(tape);
  Tensor xt = tape.constant({n, 2}, Eigen::Map<const Vec>(x.data(), x.size()));
  const Vec y = net.forward(tape, leaves, xt).values();

  const int th = params.index_of("u.l0.t0");
  REQUIRE(th >= 0);
  const Vec& w = params.value(th);  // 2 x 1
  for (int i = 0; i < n; ++i)
    CHECK(y[i] == doctest::Approx(x(i, 0) * w[0] + x(i, 1) * w[1]).epsilon(1e-14));
}

TEST_CASE("permutation equivariance of the full network") {
  const Mesh mesh = make_square_quads(2, 2, 1, {"b", "r", "t", "l"});
  const int n = mesh.node_count();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(19);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<int>> conn2 = mesh.elements;
  for (auto& e : conn2)
    for (int& v : e) v = perm[v];

  const SpMat l1 = build_graph_operators(mesh.elements, n).scaled_laplacian;
  const SpMat l2 = build_graph_operators(conn2, n).scaled_laplacian;
  const Mat x1 = normalize_coords(mesh.nodes);
  Mat x2(n, 2);
  for (int i = 0; i < n; ++i) x2.row(perm[i]) = x1.row(i);

  GcnConfig cfg;
  cfg.cheb_order = 5;
  cfg.hidden = {16, 16};
  auto eval = [&](const SpMat& lhat, const Mat& x) {
    GcnNet net("u", 2, lhat, cfg);
    ParamSet params;
    net.register_params(params, 42);
    Tape tape;
    const auto leaves = params.make_leaves(tape);
    Tensor xt = tape.constant({n, 2}, Eigen::Map<const Vec>(x.data(), x.size()));
    return net.forward(tape, leaves, xt).values();
  };
  const Vec y1 = eval(l1, x1);
  const Vec y2 = eval(l2, x2);
  for (int i = 0; i < n; ++i) CHECK(y2[perm[i]] == doctest::Approx(y1[i]).epsilon(1e-11));
}

TEST_CASE("initialization: seeded determinism and He-uniform bounds") {
  const SpMat lhat = graph_laplacian(9);
  GcnConfig cfg;  // default architecture, K = 10
  GcnNet net("u", 2, lhat, cfg);
  ParamSet a, b, c;
  net.register_params(a, 7);
  net.register_params(b, 7);
  net.register_params(c, 8);
  bool any_diff = false;
  for (int i = 0; i < a.count(); ++i) {
    CHECK((a.value(i) - b.value(i)).cwiseAbs().maxCoeff() == 0.0);
    if ((a.value(i) - c.value(i)).cwiseAbs().maxCoeff() > 0) any_diff = true;
    if (a.name(i).find(".b") != std::string::npos) {
      CHECK(a.value(i).cwiseAbs().maxCoeff() == 0.0);  // biases start at zero
    }
  }
  CHECK(any_diff);
  // First-layer thetas respect the He-uniform bound sqrt(6 / (K * fan_in)).
  const double bound = std::sqrt(6.0 / (cfg.cheb_order * 2));
  for (int k = 0; k < cfg.cheb_order; ++k) {
    const int i = a.index_of("u.l0.t" + std::to_string(k));
    REQUIRE(i >= 0);
    CHECK(a.value(i).cwiseAbs().maxCoeff() <= bound);
  }
}
