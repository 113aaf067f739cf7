#pragma once

#include <Eigen/Dense>

#include <vector>

namespace ggn {

enum class ElemKind { Quad, Simplex, Hex };

int elem_dim(ElemKind kind);
int elem_node_count(ElemKind kind, int order);
const char* elem_kind_name(ElemKind kind);

// Lagrange reference element. Basis coefficients are computed once from the
// generalized Vandermonde system over the monomial set of the element, so the
// delta property holds to machine precision for every kind/order in use.
class ReferenceElement {
 public:
  ReferenceElement(ElemKind kind, int order);

  ElemKind kind() const { return kind_; }
  int order() const { return order_; }
  int dim() const { return dim_; }
  int node_count() const { return (int)ref_nodes_.rows(); }
  const Eigen::MatrixXd& ref_nodes() const { return ref_nodes_; }  // nloc x dim

  // phi: nloc values; dphi: nloc x dim reference-coordinate gradients.
  // Throws if xi lies outside the reference domain (tolerance 1e-12).
  void eval(const Eigen::VectorXd& xi, Eigen::VectorXd& phi, Eigen::MatrixXd& dphi) const;

  // Faces as ordered lists of local node indices; the ordering parametrizes the
  // face as a (dim-1)-dimensional Lagrange element of the same order.
  const std::vector<std::vector<int>>& faces() const { return faces_; }
  // Reference coordinates of face f evaluated at face-local coordinates s.
  Eigen::VectorXd face_point(int f, const Eigen::VectorXd& s) const;
  // d(xi)/d(s): dim x (dim-1).
  Eigen::MatrixXd face_jacobian(int f, const Eigen::VectorXd& s) const;

  bool contains(const Eigen::VectorXd& xi, double tol = 1e-12) const;

 private:
  void build_nodes();
  void build_basis();
  void build_faces();

  ElemKind kind_;
  int order_;
  int dim_;
  Eigen::MatrixXd ref_nodes_;
  Eigen::MatrixXi monomials_;   // n_mono x dim exponent table
  Eigen::MatrixXd coeffs_;      // nloc x n_mono; phi_i = coeffs_.row(i) . m(xi)
  std::vector<std::vector<int>> faces_;
};

struct QuadratureRule {
  Eigen::MatrixXd points;   // nq x dim
  Eigen::VectorXd weights;  // nq, all positive, summing to the reference measure
  int degree = 0;           // polynomial exactness actually provided
};

// Gauss-Legendre (tensorized for quad/hex) or symmetric simplex rules, exact at
// least to target_degree. target_degree <= 10.
QuadratureRule quadrature_rule(ElemKind kind, int target_degree);
QuadratureRule gauss_legendre_1d(int n);

double reference_measure(ElemKind kind);

// Isoparametric mapping data at a single reference point.
struct MapPoint {
  Eigen::VectorXd x;       // physical point
  Eigen::MatrixXd jac;     // dim x dim
  double det_jac = 0.0;
  Eigen::MatrixXd dphi_phys;  // nloc x dim physical gradients of the *solution* basis
};

// geom: geometry element; coords: geometry nodes of the element (nloc_geom x dim);
// sol: solution-space element evaluated at the same reference point.
// Throws on det J <= 0, naming the element via elem_label.
MapPoint isoparametric_map(const ReferenceElement& geom, const Eigen::MatrixXd& coords,
                           const ReferenceElement& sol, const Eigen::VectorXd& xi,
                           int elem_label = -1);

}  // namespace ggn
