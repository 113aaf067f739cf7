#pragma once

#include "ggn/fe.hpp"
#include "ggn/mesh.hpp"
#include "ggn/tensor.hpp"

#include <string>
#include <vector>

namespace ggn {

// Scalar solution space of given order over the mesh elements. Space nodes are
// the mesh nodes (order == geometric order) or the element corners (order 1
// under a higher-order geometry, e.g. the pressure space of a Taylor-Hood pair).
struct FeSpace {
  ElemKind kind;
  int order;
  Eigen::MatrixXd nodes;                   // M x dim
  std::vector<int> mesh_node;              // space node -> mesh node
  std::vector<int> space_node_of_mesh;     // mesh node -> space node or -1
  std::vector<std::vector<int>> conn;      // E x nloc (space-local ids)

  int node_count() const { return (int)nodes.rows(); }
};

FeSpace make_space(const Mesh& mesh, int order);

// Constant tensors of the weak form, precomputed once per space before
// training: basis values, physical gradients and det(J)-scaled weights at the
// shared volume quadrature points.
struct BasisTable {
  int nq = 0;
  Mat phi;                      // nq x nloc
  Mat phi_t;                    // nloc x nq
  std::vector<ElemTable> grad;    // [dim]: per elem nq x nloc
  std::vector<ElemTable> grad_t;  // [dim]: per elem nloc x nq
  Vec wdetj;                    // (E*nq) flattened row-major
  Eigen::MatrixXd qpoints;      // (E*nq) x dim physical points
};

// quad_degree applies to the shared volume rule of the mesh element kind.
BasisTable precompute_tables(const Mesh& mesh, const FeSpace& space,
                             const QuadratureRule& vol_rule);

// Surface quadrature of one boundary facet: physical points, unit outward
// normals and Jacobian-scaled weights, plus the owning element's solution-space
// basis values at the surface points.
struct FacetQuadrature {
  int owner = -1;
  std::vector<int> elem_space_nodes;  // space-local ids of the owner element
  Mat phi;                            // nq_s x nloc
  Eigen::MatrixXd points;             // nq_s x dim
  Eigen::MatrixXd normals;            // nq_s x dim
  Vec weights;                        // nq_s
};

FacetQuadrature facet_quadrature(const Mesh& mesh, const FeSpace& space,
                                 const BoundaryFacet& facet, int target_degree);

struct ComponentSpec {
  std::string name;
  int space = 0;  // index into the problem's space list
};

struct EssentialBc {
  std::string tag;
  int component = 0;
  double value = 0.0;
  bool trainable = false;  // value learned jointly with the network (BC inversion)
};

struct Observation {
  int node = 0;       // space node of the component's space
  int component = 0;
  double value = 0.0;
};

// Disjoint, exhaustive partition of the global DOFs. Global dof of component c
// at space node n is offset[c] + n.
struct DofMap {
  enum Class : std::int8_t { Unconstrained = 0, Essential = 1, Observed = 2 };

  std::vector<ComponentSpec> components;
  std::vector<int> offset;
  int n_dofs = 0;
  std::vector<Class> cls;
  Vec prescribed;                        // essential values / hard-clamped observations
  std::vector<int> unconstrained;        // ascending dof ids
  std::vector<int> essential;
  std::vector<int> observed;
  std::vector<int> trainable_essential;  // subset of essential, ascending
  std::vector<int> kept;                 // unconstrained + observed, ascending

  int dof(int comp, int node) const { return offset[comp] + node; }
};

// Later essential declarations override earlier ones on shared nodes (corner
// conflicts are resolved by declaration order). Observations on essential DOFs
// are rejected as over-constrained. When hard_observations is set, observed
// DOFs are clamped; their residual rows stay in the condensed system either way.
DofMap partition_dofs(const Mesh& mesh, const std::vector<FeSpace>& spaces,
                      const std::vector<ComponentSpec>& components,
                      const std::vector<EssentialBc>& bcs,
                      const std::vector<Observation>& observations, bool hard_observations,
                      const std::vector<std::pair<int, double>>& pinned_dofs = {});

}  // namespace ggn
