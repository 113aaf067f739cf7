#include "ggn/cases.hpp"
#include "ggn/oracle.hpp"

#include <doctest.h>

#include <Eigen/Cholesky>

#include <cmath>
#include <memory>
#include <random>

using namespace ggn;

namespace {

struct Problem {
  Mesh mesh;
  std::unique_ptr<ResidualAssembler> assembler;
};

Problem poisson_problem(int nx, int order, double f) {
  Problem pr;
  pr.mesh = make_square_quads(nx, nx, order, {"b", "r", "t", "l"});
  pr.mesh.validate();
  std::vector<FeSpace> spaces{make_space(pr.mesh, order)};
  auto model = std::make_shared<PoissonModel>(f);
  std::vector<EssentialBc> bcs{{"b", 0, 0.0}, {"r", 0, 0.0}, {"t", 0, 0.0}, {"l", 0, 0.0}};
  DofMap dm = partition_dofs(pr.mesh, spaces, {{"u", 0}}, bcs, {}, false);
  pr.assembler =
      std::make_unique<ResidualAssembler>(pr.mesh, std::move(spaces), model, std::move(dm));
  return pr;
}

Problem stokes_like_problem(double nu) {
  Problem pr;
  pr.mesh = make_square_quads(2, 2, 2, {"b", "r", "t", "l"});
  pr.mesh.validate();
  std::vector<FeSpace> spaces{make_space(pr.mesh, 2), make_space(pr.mesh, 1)};
  auto model = std::make_shared<NavierStokesModel>(2, nu);
  std::vector<EssentialBc> bcs{{"b", 0, 0.0}, {"b", 1, 0.0}, {"r", 0, 0.0}, {"r", 1, 0.0},
                               {"l", 0, 0.0}, {"l", 1, 0.0}, {"t", 0, 1.0}, {"t", 1, 0.0}};
  const int nv = spaces[0].node_count();
  DofMap dm = partition_dofs(pr.mesh, spaces, {{"v1", 0}, {"v2", 0}, {"p", 1}}, bcs, {}, false,
                             {{2 * nv, 0.0}});
  pr.assembler =
      std::make_unique<ResidualAssembler>(pr.mesh, std::move(spaces), model, std::move(dm));
  return pr;
}

// Series solution of f + laplace(u) = 0 on the unit square, zero boundary.
double poisson_series(double x, double y, double f) {
  double u = 0.0;
  for (int m = 1; m <= 199; m += 2)
    for (int n = 1; n <= 199; n += 2)
      u += 16.0 * f / (M_PI * M_PI * M_PI * M_PI * m * n * (m * m + n * n)) *
           std::sin(m * M_PI * x) * std::sin(n * M_PI * y);
  return u;
}

}  // namespace

TEST_CASE("assembled jacobian matches finite differences of the residual") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int which = 0; which < 2; ++which) {
    Problem pr = which == 0 ? poisson_problem(1, 2, 2.0) : stokes_like_problem(0.1);
    const int n = pr.assembler->dofmap().n_dofs;
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = 0.5 * nd(rng);
    const Eigen::MatrixXd jac = assemble_jacobian(*pr.assembler, u);
    const double h = 1e-6;
    for (int j = 0; j < n; ++j) {
      Vec up = u, um = u;
      up[j] += h;
      um[j] -= h;
      const Vec col = (pr.assembler->assemble_plain(up) - pr.assembler->assemble_plain(um)) /
                      (2 * h);
      CHECK((jac.col(j) - col).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("poisson jacobian is symmetric") {
  Problem pr = poisson_problem(2, 3, 1.0);
  const Eigen::MatrixXd jac =
      assemble_jacobian(*pr.assembler, Vec::Zero(pr.assembler->dofmap().n_dofs));
  CHECK((jac - jac.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("condensed elasticity operator is symmetric positive definite") {
  auto p = make_case("elasticity_square", RunMode::Forward);
  const DofMap& dm = p->dofmap;
  const Eigen::MatrixXd jac = assemble_jacobian(*p->assembler, Vec::Zero(dm.n_dofs));
  const int nf = (int)dm.unconstrained.size();
  Eigen::MatrixXd kff(nf, nf);  // stiffness = -dR/dU on the free block
  for (int i = 0; i < nf; ++i)
    for (int j = 0; j < nf; ++j) kff(i, j) = -jac(dm.unconstrained[i], dm.unconstrained[j]);
  CHECK((kff - kff.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(kff).info() == Eigen::Success);
}

TEST_CASE("solve_linear equals newton on a linear problem") {
  Problem pr = poisson_problem(2, 3, 2.0);
  const Vec direct = solve_linear(*pr.assembler);
  const NewtonResult nres = solve_newton(*pr.assembler);
  CHECK(nres.converged);
  CHECK(nres.iters <= 1);
  CHECK((direct - nres.state).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("navier-stokes approaches the stokes limit at large viscosity") {
  Problem pr = stokes_like_problem(1e3);
  NewtonConfig cfg;
  const NewtonResult res = solve_newton(*pr.assembler, cfg);
  CHECK(res.converged);
  CHECK(res.iters <= 2);  // convection is negligible, the problem is nearly linear
}

TEST_CASE("poisson square: max principle and the series solution at the center") {
  auto p = make_case("poisson_square", RunMode::Forward);
  const Vec& u = p->reference_state;
  CHECK(u.minCoeff() >= -1e-12);  // positive source, zero boundary
  CHECK(u.maxCoeff() <= poisson_series(0.5, 0.5, 1.0) * 1.01);
  const FeSpace& sp = p->spaces[0];
  for (int i = 0; i < sp.node_count(); ++i)
    if (std::abs(sp.nodes(i, 0) - 0.5) < 1e-12 && std::abs(sp.nodes(i, 1) - 0.5) < 1e-12)
      CHECK(u[i] == doctest::Approx(poisson_series(0.5, 0.5, 1.0)).epsilon(1e-3));
}

TEST_CASE("refinement improves the poisson solution at order + 1 ish") {
  auto nodal_error = [](int nx) {
    Problem pr = poisson_problem(nx, 2, 1.0);
    const Vec u = solve_linear(*pr.assembler);
    const FeSpace& sp = pr.assembler->spaces()[0];
    Vec ref(sp.node_count());
    for (int i = 0; i < sp.node_count(); ++i)
      ref[i] = poisson_series(sp.nodes(i, 0), sp.nodes(i, 1), 1.0);
    return (u - ref).norm() / ref.norm();
  };
  const double e2 = nodal_error(2);
  const double e4 = nodal_error(4);
  const double rate = std::log2(e2 / e4);
  CHECK(rate >= 2.5);  // Q2 elements: superconvergent nodal rate ~ p + 1
}

TEST_CASE("disk oracle matches the analytic solution at the nodes") {
  auto p = make_case("poisson_disk", RunMode::Forward);
  const Vec fe = solve_newton(*p->assembler).state;
  CHECK((fe - p->reference_state).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("cavity oracle: bounded velocity and a sane center value") {
  auto p = make_case("ns_cavity", RunMode::Forward);
  const Vec& u = p->reference_state;
  const FeSpace& sp = p->spaces[0];
  const DofMap& dm = p->dofmap;
  double vmax = 0.0;
  for (int i = 0; i < sp.node_count(); ++i)
    vmax = std::max(vmax, std::hypot(u[dm.dof(0, i)], u[dm.dof(1, i)]));
  CHECK(vmax <= 1.02);  // driven by a unit lid
  for (int i = 0; i < sp.node_count(); ++i)
    if (std::abs(sp.nodes(i, 0) - 0.5) < 1e-12 && std::abs(sp.nodes(i, 1) - 0.5) < 1e-12)
      CHECK(std::abs(u[dm.dof(0, i)] - (-0.2058)) < 0.05);  // Re 100 reference, coarse grid
}

TEST_CASE("stenosis oracle conserves mass between inlet and outlet") {
  auto p = make_case("ns_stenosis", RunMode::Forward);
  const Vec& u = p->reference_state;
  const DofMap& dm = p->dofmap;
  const FeSpace& sp = p->spaces[0];
  double net_flux = 0.0;
  for (const auto& f : p->mesh.facets) {
    if (f.tag != "inlet" && f.tag != "outlet") continue;
    const FacetQuadrature fq = facet_quadrature(p->mesh, sp, f, 5);
    for (int q = 0; q < fq.weights.size(); ++q) {
      double vn = 0.0;
      for (int l = 0; l < (int)fq.elem_space_nodes.size(); ++l) {
        const int node = fq.elem_space_nodes[l];
        vn += fq.phi(q, l) * (u[dm.dof(0, node)] * fq.normals(q, 0) +
                              u[dm.dof(1, node)] * fq.normals(q, 1));
      }
      net_flux += fq.weights[q] * vn;
    }
  }
  CHECK(std::abs(net_flux) < 1e-6);
}

TEST_CASE("zero traction elasticity has the zero solution") {
  Problem pr;
  pr.mesh = make_square_quads(2, 2, 2, {"b", "r", "t", "l"});
  pr.mesh.validate();
  std::vector<FeSpace> spaces{make_space(pr.mesh, 2), make_space(pr.mesh, 2)};
  auto model = std::make_shared<ElasticityModel>(2, 1.0, 1.0);
  std::vector<EssentialBc> bcs{{"l", 0, 0.0}, {"l", 1, 0.0}};
  DofMap dm = partition_dofs(pr.mesh, spaces, {{"u1", 0}, {"u2", 1}}, bcs, {}, false);
  pr.assembler =
      std::make_unique<ResidualAssembler>(pr.mesh, std::move(spaces), model, std::move(dm));
  const Vec u = solve_linear(*pr.assembler);
  CHECK(u.cwiseAbs().maxCoeff() < 1e-12);
}
