#include "ggn/space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace ggn {

namespace {

// Local indices of the element corners in the reference-node ordering.
std::vector<int> corner_locals(ElemKind kind, int p) {
  switch (kind) {
    case ElemKind::Quad: return {0, p, p * (p + 1), (p + 1) * (p + 1) - 1};
    case ElemKind::Hex: {
      const int w = p + 1;
      const int z = p * w * w;
      return {0, p, p * w, p * w + p, z, z + p, z + p * w, z + p * w + p};
    }
    case ElemKind::Simplex: {
      int off = 0;
      for (int k = 0; k < p; ++k) off += p + 1 - k;
      return {0, p, off};
    }
  }
  return {};
}

}  // namespace

FeSpace make_space(const Mesh& mesh, int order) {
  FeSpace sp;
  sp.kind = mesh.kind;
  sp.order = order;
  if (order == mesh.geom_order) {
    sp.nodes = mesh.nodes;
    sp.conn = mesh.elements;
    sp.mesh_node.resize(mesh.node_count());
    sp.space_node_of_mesh.resize(mesh.node_count());
    for (int i = 0; i < mesh.node_count(); ++i) {
      sp.mesh_node[i] = i;
      sp.space_node_of_mesh[i] = i;
    }
    return sp;
  }
  if (order != 1)
    throw std::invalid_argument(
        "make_space: only order == geometric order or order 1 (corner subset) supported");

  const std::vector<int> corners = corner_locals(mesh.kind, mesh.geom_order);
  std::set<int> used;
  for (const auto& el : mesh.elements)
    for (int loc : corners) used.insert(el[loc]);

  sp.space_node_of_mesh.assign(mesh.node_count(), -1);
  sp.nodes.resize((int)used.size(), mesh.dim);
  int n = 0;
  for (int mid : used) {
    sp.space_node_of_mesh[mid] = n;
    sp.mesh_node.push_back(mid);
    sp.nodes.row(n) = mesh.nodes.row(mid);
    ++n;
  }
  for (const auto& el : mesh.elements) {
    std::vector<int> c;
    for (int loc : corners) c.push_back(sp.space_node_of_mesh[el[loc]]);
    sp.conn.push_back(std::move(c));
  }
  return sp;
}

BasisTable precompute_tables(const Mesh& mesh, const FeSpace& space,
                             const QuadratureRule& vol_rule) {
  const ReferenceElement geom(mesh.kind, mesh.geom_order);
  const ReferenceElement sol(space.kind, space.order);
  const int nq = (int)vol_rule.points.rows();
  const int nloc = sol.node_count();
  const int dim = mesh.dim;
  const int ne = mesh.elem_count();

  BasisTable t;
  t.nq = nq;
  t.phi.resize(nq, nloc);
  Eigen::VectorXd phi;
  Eigen::MatrixXd dphi;
  for (int q = 0; q < nq; ++q) {
    sol.eval(vol_rule.points.row(q).transpose(), phi, dphi);
    t.phi.row(q) = phi.transpose();
  }
  t.phi_t = t.phi.transpose();

  t.grad.resize(dim);
  t.grad_t.resize(dim);
  for (int d = 0; d < dim; ++d) {
    t.grad[d].per_elem.resize(ne);
    t.grad_t[d].per_elem.resize(ne);
  }
  t.wdetj.resize(ne * nq);
  t.qpoints.resize(ne * nq, dim);

  for (int e = 0; e < ne; ++e) {
    const Eigen::MatrixXd coords = mesh.elem_coords(e);
    for (int d = 0; d < dim; ++d) t.grad[d].per_elem[e].resize(nq, nloc);
    for (int q = 0; q < nq; ++q) {
      const MapPoint mp =
          isoparametric_map(geom, coords, sol, vol_rule.points.row(q).transpose(), e);
      t.wdetj[e * nq + q] = mp.det_jac * vol_rule.weights[q];
      t.qpoints.row(e * nq + q) = mp.x.transpose();
      for (int d = 0; d < dim; ++d)
        t.grad[d].per_elem[e].row(q) = mp.dphi_phys.col(d).transpose();
    }
    for (int d = 0; d < dim; ++d)
      t.grad_t[d].per_elem[e] = t.grad[d].per_elem[e].transpose();
  }
  if (!t.wdetj.allFinite())
    throw std::runtime_error("precompute_tables: non-finite entries");
  return t;
}

FacetQuadrature facet_quadrature(const Mesh& mesh, const FeSpace& space,
                                 const BoundaryFacet& facet, int target_degree) {
  if (facet.owner_elem < 0)
    throw std::invalid_argument("facet_quadrature: facet not resolved to an owning element "
                                "(run Mesh::validate)");
  const ReferenceElement geom(mesh.kind, mesh.geom_order);
  const ReferenceElement sol(space.kind, space.order);
  const int dim = mesh.dim;
  const QuadratureRule rule = dim == 2 ? gauss_legendre_1d(target_degree / 2 + 1)
                                       : quadrature_rule(ElemKind::Quad, target_degree);
  const int nq = (int)rule.points.rows();
  const Eigen::MatrixXd coords = mesh.elem_coords(facet.owner_elem);
  // Reference-domain centroid; orientation is decided per quadrature point from
  // the local Jacobian (a global element centroid misorients curved faces).
  const Eigen::VectorXd xi_c = mesh.kind == ElemKind::Simplex
                                   ? Eigen::VectorXd::Constant(dim, 1.0 / 3.0)
                                   : Eigen::VectorXd::Zero(dim);

  FacetQuadrature fq;
  fq.owner = facet.owner_elem;
  fq.elem_space_nodes = space.conn[facet.owner_elem];
  fq.phi.resize(nq, sol.node_count());
  fq.points.resize(nq, dim);
  fq.normals.resize(nq, dim);
  fq.weights.resize(nq);

  Eigen::VectorXd phi_g, phi_s;
  Eigen::MatrixXd dphi_g, dphi_s;
  for (int q = 0; q < nq; ++q) {
    const Eigen::VectorXd s = rule.points.row(q).transpose();
    const Eigen::VectorXd xi = geom.face_point(facet.local_face, s);
    const Eigen::MatrixXd dxi_ds = geom.face_jacobian(facet.local_face, s);
    geom.eval(xi, phi_g, dphi_g);
    sol.eval(xi, phi_s, dphi_s);
    fq.phi.row(q) = phi_s.transpose();
    const Eigen::VectorXd x = coords.transpose() * phi_g;
    fq.points.row(q) = x.transpose();
    const Eigen::MatrixXd jac = coords.transpose() * dphi_g;  // dim x dim
    const Eigen::MatrixXd tang = jac * dxi_ds;                // dim x (dim-1)
    Eigen::VectorXd n(dim);
    double surf = 0.0;
    if (dim == 2) {
      n << tang(1, 0), -tang(0, 0);
      surf = tang.col(0).norm();
    } else {
      const Eigen::Vector3d c = Eigen::Vector3d(tang.col(0)).cross(Eigen::Vector3d(tang.col(1)));
      n = c;
      surf = c.norm();
    }
    if (surf <= 0.0) throw std::runtime_error("facet_quadrature: degenerate facet");
    n /= n.norm();
    if (n.dot(jac * (xi - xi_c)) < 0.0) n = -n;  // orient out of the owning element
    fq.normals.row(q) = n.transpose();
    fq.weights[q] = surf * rule.weights[q];
  }
  return fq;
}

DofMap partition_dofs(const Mesh& mesh, const std::vector<FeSpace>& spaces,
                      const std::vector<ComponentSpec>& components,
                      const std::vector<EssentialBc>& bcs,
                      const std::vector<Observation>& observations, bool hard_observations,
                      const std::vector<std::pair<int, double>>& pinned_dofs) {
  DofMap dm;
  dm.components = components;
  dm.offset.resize(components.size());
  int total = 0;
  for (std::size_t c = 0; c < components.size(); ++c) {
    dm.offset[c] = total;
    total += spaces.at(components[c].space).node_count();
  }
  dm.n_dofs = total;
  dm.cls.assign(total, DofMap::Unconstrained);
  dm.prescribed = Vec::Zero(total);
  std::vector<std::int8_t> trainable(total, 0);

  std::set<std::string> tags;
  for (const auto& f : mesh.facets) tags.insert(f.tag);

  for (const auto& bc : bcs) {
    if (!tags.count(bc.tag))
      throw std::invalid_argument("partition_dofs: essential tag '" + bc.tag +
                                  "' does not exist on the mesh");
    const FeSpace& sp = spaces.at(components.at(bc.component).space);
    for (const auto& f : mesh.facets) {
      if (f.tag != bc.tag) continue;
      for (int mid : f.nodes) {
        const int sn = sp.space_node_of_mesh[mid];
        if (sn < 0) continue;  // geometric node not carried by this space
        const int d = dm.dof(bc.component, sn);
        dm.cls[d] = DofMap::Essential;
        dm.prescribed[d] = bc.value;
        trainable[d] = bc.trainable ? 1 : 0;
      }
    }
  }

  for (const auto& [d, v] : pinned_dofs) {
    dm.cls.at(d) = DofMap::Essential;
    dm.prescribed[d] = v;
    trainable[d] = 0;
  }

  for (const auto& ob : observations) {
    const int d = dm.dof(ob.component, ob.node);
    if (dm.cls.at(d) == DofMap::Essential)
      throw std::invalid_argument("partition_dofs: observation at component " +
                                  std::to_string(ob.component) + ", node " +
                                  std::to_string(ob.node) +
                                  " conflicts with an essential BC (over-constrained)");
    if (hard_observations) {
      dm.cls[d] = DofMap::Observed;
      dm.prescribed[d] = ob.value;
    }
  }

  for (int d = 0; d < total; ++d) {
    switch (dm.cls[d]) {
      case DofMap::Unconstrained:
        dm.unconstrained.push_back(d);
        dm.kept.push_back(d);
        break;
      case DofMap::Essential:
        dm.essential.push_back(d);
        if (trainable[d]) dm.trainable_essential.push_back(d);
        break;
      case DofMap::Observed:
        dm.observed.push_back(d);
        dm.kept.push_back(d);
        break;
    }
  }
  return dm;
}

}  // namespace ggn
