#include "ggn/residual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ggn {

ResidualAssembler::ResidualAssembler(const Mesh& mesh, std::vector<FeSpace> spaces,
                                     std::shared_ptr<const PdeModel> model, DofMap dofmap)
    : mesh_(mesh), spaces_(std::move(spaces)), model_(std::move(model)),
      dofmap_(std::move(dofmap)) {
  if ((int)dofmap_.components.size() != model_->n_components())
    throw std::invalid_argument("residual: component count does not match the model");
  if (mesh_.dim != model_->dim())
    throw std::invalid_argument("residual: mesh/model dimension mismatch");

  int p = mesh_.geom_order;
  for (const auto& s : spaces_) p = std::max(p, s.order);
  vol_degree_ = 2 * p + 2;
  surf_degree_ = 2 * p + 1;

  const QuadratureRule vol = quadrature_rule(mesh_.kind, vol_degree_);
  tables_.reserve(spaces_.size());
  for (const auto& s : spaces_) tables_.push_back(precompute_tables(mesh_, s, vol));

  const int nc = (int)dofmap_.components.size();
  elem_dof_idx_.resize(nc);
  net_gather_idx_.resize(nc);
  net_scatter_dof_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const FeSpace& sp = spaces_[dofmap_.components[c].space];
    elem_dof_idx_[c].reserve(mesh_.elem_count() * (sp.conn.empty() ? 0 : sp.conn[0].size()));
    for (const auto& elem : sp.conn)
      for (int n : elem) elem_dof_idx_[c].push_back(dofmap_.dof(c, n));
    for (int n = 0; n < sp.node_count(); ++n) {
      const int d = dofmap_.dof(c, n);
      if (dofmap_.cls[d] == DofMap::Unconstrained) {
        net_gather_idx_[c].push_back(n);
        net_scatter_dof_[c].push_back(d);
      }
    }
  }

  clamped_base_ = Vec::Zero(dofmap_.n_dofs);
  for (int d : dofmap_.essential) clamped_base_[d] = dofmap_.prescribed[d];
  for (int d : dofmap_.observed) clamped_base_[d] = dofmap_.prescribed[d];
  for (int d : dofmap_.trainable_essential) clamped_base_[d] = 0.0;

  build_surface_load();
}

void ResidualAssembler::build_surface_load() {
  surface_load_ = Vec::Zero(dofmap_.n_dofs);
  const int nc = (int)dofmap_.components.size();
  for (const auto& facet : mesh_.facets) {
    if (!model_->has_natural(facet.tag)) continue;
    // One surface rule per distinct space of the components.
    std::vector<FacetQuadrature> fq(spaces_.size());
    std::vector<bool> have(spaces_.size(), false);
    for (int c = 0; c < nc; ++c) {
      const int s = dofmap_.components[c].space;
      if (!have[s]) {
        fq[s] = facet_quadrature(mesh_, spaces_[s], facet, surf_degree_);
        have[s] = true;
      }
      const FacetQuadrature& q = fq[s];
      for (int iq = 0; iq < (int)q.weights.size(); ++iq) {
        const Eigen::VectorXd h =
            model_->natural_flux(facet.tag, q.points.row(iq), q.normals.row(iq));
        if (h[c] == 0.0) continue;
        for (int l = 0; l < (int)q.elem_space_nodes.size(); ++l)
          surface_load_[dofmap_.dof(c, q.elem_space_nodes[l])] +=
              q.weights[iq] * q.phi(iq, l) * h[c];
      }
    }
  }
}

Tensor ResidualAssembler::build_state(Tape& tape, const std::vector<Tensor>& net_out,
                                      const Tensor* trainable_bc) const {
  const int nc = (int)dofmap_.components.size();
  if ((int)net_out.size() != nc)
    throw std::invalid_argument("build_state: one network output per component expected");
  if (!dofmap_.trainable_essential.empty() && trainable_bc == nullptr)
    throw std::invalid_argument("build_state: trainable boundary values missing");

  Tensor state = tape.constant({dofmap_.n_dofs}, clamped_base_);
  for (int c = 0; c < nc; ++c) {
    if (net_gather_idx_[c].empty()) continue;
    Tensor g = tape.gather(net_out[c], net_gather_idx_[c], {(int)net_gather_idx_[c].size()});
    state = tape.add(state, tape.scatter_add(g, net_scatter_dof_[c], dofmap_.n_dofs));
  }
  if (trainable_bc != nullptr && !dofmap_.trainable_essential.empty()) {
    if (trainable_bc->size() != (int)dofmap_.trainable_essential.size())
      throw std::invalid_argument("build_state: trainable boundary tensor has the wrong size");
    state = tape.add(state,
                     tape.scatter_add(*trainable_bc, dofmap_.trainable_essential, dofmap_.n_dofs));
  }
  return state;
}

Tensor ResidualAssembler::assemble(Tape& tape, Tensor state,
                                   const std::vector<Tensor>& mu) const {
  const int nc = (int)dofmap_.components.size();
  const int ne = mesh_.elem_count();
  const int dim = mesh_.dim;
  const int nq = tables_.empty() ? 0 : tables_[0].nq;

  TapeFields fields;
  fields.dim = dim;
  fields.ones = tape.constant({ne, nq}, Vec::Ones(ne * nq));
  fields.u.resize(nc);
  fields.grad.resize(nc);

  std::vector<Tensor> elem_vals(nc);
  for (int c = 0; c < nc; ++c) {
    const int s = dofmap_.components[c].space;
    const int nloc = (int)spaces_[s].conn[0].size();
    elem_vals[c] = tape.gather(state, elem_dof_idx_[c], {ne, nloc});
    fields.u[c] = tape.matmul_const(elem_vals[c], tables_[s].phi_t);
    for (int k = 0; k < dim; ++k)
      fields.grad[c][k] = tape.table_matvec(tables_[s].grad[k], elem_vals[c]);
  }

  std::vector<std::array<Tensor, 3>> flux(nc);
  std::vector<Tensor> source(nc);
  model_->eval_tape(tape, fields, mu, flux, source);

  Tensor volume;
  for (int c = 0; c < nc; ++c) {
    const int s = dofmap_.components[c].space;
    Tensor wq = tape.constant({ne, nq}, tables_[s].wdetj);
    Tensor local;
    for (int k = 0; k < dim; ++k) {
      if (!flux[c][k].valid()) continue;
      Tensor t = tape.table_matvec(tables_[s].grad_t[k], tape.mul(flux[c][k], wq));
      local = local.valid() ? tape.add(local, t) : t;
    }
    if (source[c].valid()) {
      Tensor t = tape.matmul_const(tape.mul(source[c], wq), tables_[s].phi);
      local = local.valid() ? tape.add(local, t) : t;
    }
    if (!local.valid()) continue;
    Tensor global = tape.scatter_add(local, elem_dof_idx_[c], dofmap_.n_dofs);
    volume = volume.valid() ? tape.add(volume, global) : global;
  }

  Tensor surf = tape.constant({dofmap_.n_dofs}, surface_load_);
  return volume.valid() ? tape.sub(surf, volume) : surf;
}

Tensor ResidualAssembler::condense(Tape& tape, Tensor residual) const {
  return tape.gather(residual, dofmap_.kept, {(int)dofmap_.kept.size()});
}

Tensor ResidualAssembler::loss(Tape& tape, Tensor state, const std::vector<Tensor>& mu) const {
  return tape.l2_norm(condense(tape, assemble(tape, state, mu)));
}

Vec ResidualAssembler::assemble_plain(const Vec& state) const {
  Tape tape;
  Tensor st = tape.constant({(int)state.size()}, state);
  const Eigen::VectorXd muv = model_->mu_values();
  std::vector<Tensor> mu;
  mu.reserve(muv.size());
  for (int i = 0; i < (int)muv.size(); ++i) mu.push_back(tape.constant_scalar(muv[i]));
  return assemble(tape, st, mu).values();
}

Vec ResidualAssembler::condensed_plain(const Vec& state) const {
  const Vec r = assemble_plain(state);
  Vec out((int)dofmap_.kept.size());
  for (int i = 0; i < (int)dofmap_.kept.size(); ++i) out[i] = r[dofmap_.kept[i]];
  return out;
}

double relative_error(const Vec& a, const Vec& b) {
  const double nb = b.norm();
  if (nb == 0.0) throw std::invalid_argument("relative_error: reference vector is zero");
  return (a - b).norm() / nb;
}

}  // namespace ggn
