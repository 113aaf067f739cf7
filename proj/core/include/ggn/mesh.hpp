#pragma once

#include "ggn/fe.hpp"
#include "ggn/tensor.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <string>
#include <vector>

namespace ggn {

struct BoundaryFacet {
  std::string tag;
  std::vector<int> nodes;   // geometric nodes of the face, as stored in the file
  int owner_elem = -1;      // filled by validate()
  int local_face = -1;
};

// Unstructured mesh with a single element kind/order block. Nodes are the
// geometric nodes (isoparametric order == geom_order).
struct Mesh {
  int dim = 2;
  Eigen::MatrixXd nodes;                   // N x dim
  ElemKind kind = ElemKind::Quad;
  int geom_order = 1;
  std::vector<std::vector<int>> elements;  // E x nloc, reference-node ordering
  std::vector<BoundaryFacet> facets;

  int node_count() const { return (int)nodes.rows(); }
  int elem_count() const { return (int)elements.size(); }

  // Checks index ranges, non-empty tags, and that every boundary facet is a
  // face of exactly one element; fills facet owner/local_face.
  void validate();
  Eigen::VectorXd elem_centroid(int e) const;
  Eigen::MatrixXd elem_coords(int e) const;  // nloc x dim
};

Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);

struct GraphOperators {
  SpMat adjacency;          // symmetric 0/1, zero diagonal
  Vec degree;
  SpMat scaled_laplacian;   // L - I with L = I - D^{-1/2} A D^{-1/2}
};

// Two nodes are adjacent iff they appear together in at least one element of
// the connectivity. Throws on isolated nodes (degree normalization undefined).
GraphOperators build_graph_operators(const std::vector<std::vector<int>>& conn, int n_nodes);
GraphOperators build_graph_operators(const Mesh& mesh);

// Built-in case geometries.
Mesh make_square_quads(int nx, int ny, int order, const std::vector<std::string>& side_tags);
Mesh make_disk_quads(int order);  // unit disk, 2x2 mapped quads, tag "boundary"
Mesh make_cylinder_hexes();       // hollow cylinder, 40 second-order hexes, 440 nodes

}  // namespace ggn
