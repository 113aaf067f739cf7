#include "ggn/oracle.hpp"

#include <Eigen/LU>

#include <cmath>
#include <stdexcept>

namespace ggn {

Eigen::MatrixXd assemble_jacobian(const ResidualAssembler& assembler, const Vec& state) {
  const DofMap& dm = assembler.dofmap();
  const auto& spaces = assembler.spaces();
  const PdeModel& model = assembler.model();
  const int nc = (int)dm.components.size();
  const int dim = model.dim();
  const Eigen::VectorXd mu = model.mu_values();

  const int nq = assembler.table(0).nq;
  const int ne = (int)spaces[0].conn.size();

  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dm.n_dofs, dm.n_dofs);

  Eigen::VectorXd u(nc);
  Eigen::MatrixXd gu(nc, dim);
  std::vector<double> dF_du, dF_dgu, dS_du, dS_dgu;

  for (int e = 0; e < ne; ++e) {
    for (int q = 0; q < nq; ++q) {
      const double w = assembler.table(dm.components[0].space).wdetj[e * nq + q];
      for (int c = 0; c < nc; ++c) {
        const BasisTable& tb = assembler.table(dm.components[c].space);
        const auto& conn = spaces[dm.components[c].space].conn[e];
        double val = 0.0;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
        for (int l = 0; l < (int)conn.size(); ++l) {
          const double s = state[dm.dof(c, conn[l])];
          val += tb.phi(q, l) * s;
          for (int k = 0; k < dim; ++k) g[k] += tb.grad[k].per_elem[e](q, l) * s;
        }
        u[c] = val;
        gu.row(c) = g;
      }
      model.flux_jacobian(u, gu, mu, dF_du, dF_dgu);
      model.source_jacobian(u, gu, mu, dS_du, dS_dgu);

      // R = surf - int(grad(phi_i).F_c + phi_i S_c); differentiate the volume part.
      for (int c = 0; c < nc; ++c) {
        const BasisTable& tbr = assembler.table(dm.components[c].space);
        const auto& conn_r = spaces[dm.components[c].space].conn[e];
        for (int c2 = 0; c2 < nc; ++c2) {
          const BasisTable& tbc = assembler.table(dm.components[c2].space);
          const auto& conn_c = spaces[dm.components[c2].space].conn[e];
          for (int i = 0; i < (int)conn_r.size(); ++i) {
            const int row = dm.dof(c, conn_r[i]);
            for (int j = 0; j < (int)conn_c.size(); ++j) {
              const int col = dm.dof(c2, conn_c[j]);
              double acc = 0.0;
              for (int k = 0; k < dim; ++k) {
                const double dphi_i = tbr.grad[k].per_elem[e](q, i);
                double dflux = dF_du[(c * dim + k) * nc + c2] * tbc.phi(q, j);
                for (int k2 = 0; k2 < dim; ++k2)
                  dflux += dF_dgu[((c * dim + k) * nc + c2) * dim + k2] *
                           tbc.grad[k2].per_elem[e](q, j);
                acc += dphi_i * dflux;
              }
              double dsrc = dS_du[c * nc + c2] * tbc.phi(q, j);
              for (int k2 = 0; k2 < dim; ++k2)
                dsrc += dS_dgu[(c * nc + c2) * dim + k2] * tbc.grad[k2].per_elem[e](q, j);
              acc += tbr.phi(q, i) * dsrc;
              jac(row, col) -= w * acc;
            }
          }
        }
      }
    }
  }
  return jac;
}

NewtonResult solve_newton(const ResidualAssembler& assembler, const NewtonConfig& cfg) {
  const DofMap& dm = assembler.dofmap();
  const auto& free_dofs = dm.unconstrained;
  const int nf = (int)free_dofs.size();

  NewtonResult res;
  res.state = Vec::Zero(dm.n_dofs);
  for (int d : dm.essential) res.state[d] = dm.prescribed[d];
  for (int d : dm.observed) res.state[d] = dm.prescribed[d];

  auto free_residual = [&](const Vec& state) {
    const Vec r = assembler.assemble_plain(state);
    Vec rf(nf);
    for (int i = 0; i < nf; ++i) rf[i] = r[free_dofs[i]];
    return rf;
  };

  Vec rf = free_residual(res.state);
  res.residual_norm = rf.norm();
  for (res.iters = 0; res.iters < cfg.max_iters; ++res.iters) {
    if (res.residual_norm < cfg.tol) {
      res.converged = true;
      return res;
    }
    const Eigen::MatrixXd jac = assemble_jacobian(assembler, res.state);
    Eigen::MatrixXd jff(nf, nf);
    for (int i = 0; i < nf; ++i)
      for (int j = 0; j < nf; ++j) jff(i, j) = jac(free_dofs[i], free_dofs[j]);
    const Vec delta = Eigen::PartialPivLU<Eigen::MatrixXd>(jff).solve(-rf);
    if (!delta.allFinite()) throw std::runtime_error("newton: singular tangent matrix");

    double step = 1.0;
    Vec trial;
    Vec rtrial;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      trial = res.state;
      for (int i = 0; i < nf; ++i) trial[free_dofs[i]] += step * delta[i];
      rtrial = free_residual(trial);
      if (rtrial.norm() < res.residual_norm || h == cfg.max_halvings) break;
      step *= 0.5;
    }
    res.state = trial;
    rf = rtrial;
    res.residual_norm = rf.norm();
  }
  res.converged = res.residual_norm < cfg.tol;
  return res;
}

Vec solve_linear(const ResidualAssembler& assembler) {
  const DofMap& dm = assembler.dofmap();
  const auto& free_dofs = dm.unconstrained;
  const int nf = (int)free_dofs.size();

  Vec state = Vec::Zero(dm.n_dofs);
  for (int d : dm.essential) state[d] = dm.prescribed[d];
  for (int d : dm.observed) state[d] = dm.prescribed[d];

  const Vec r0 = assembler.assemble_plain(state);
  Vec rf(nf);
  for (int i = 0; i < nf; ++i) rf[i] = r0[free_dofs[i]];

  const Eigen::MatrixXd jac = assemble_jacobian(assembler, state);
  Eigen::MatrixXd jff(nf, nf);
  for (int i = 0; i < nf; ++i)
    for (int j = 0; j < nf; ++j) jff(i, j) = jac(free_dofs[i], free_dofs[j]);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(jff);
  const Vec delta = lu.solve(-rf);
  if (!delta.allFinite()) throw std::runtime_error("solve_linear: singular system");
  for (int i = 0; i < nf; ++i) state[free_dofs[i]] += delta[i];

  const Vec r1 = assembler.assemble_plain(state);
  double rn = 0.0;
  for (int i = 0; i < nf; ++i) rn += r1[free_dofs[i]] * r1[free_dofs[i]];
  if (std::sqrt(rn) > 1e-8 * (1.0 + rf.norm()))
    throw std::runtime_error("solve_linear: residual is not linear in the state");
  return state;
}

}  // namespace ggn
