#include "ggn/fe.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ggn {

int elem_dim(ElemKind kind) {
  switch (kind) {
    case ElemKind::Quad: return 2;
    case ElemKind::Simplex: return 2;
    case ElemKind::Hex: return 3;
  }
  return 0;
}

int elem_node_count(ElemKind kind, int order) {
  const int p = order;
  switch (kind) {
    case ElemKind::Quad: return (p + 1) * (p + 1);
    case ElemKind::Simplex: return (p + 1) * (p + 2) / 2;
    case ElemKind::Hex: return (p + 1) * (p + 1) * (p + 1);
  }
  return 0;
}

const char* elem_kind_name(ElemKind kind) {
  switch (kind) {
    case ElemKind::Quad: return "quad";
    case ElemKind::Simplex: return "simplex";
    case ElemKind::Hex: return "hex";
  }
  return "?";
}

ReferenceElement::ReferenceElement(ElemKind kind, int order)
    : kind_(kind), order_(order), dim_(elem_dim(kind)) {
  if (order < 1 || order > 3)
    throw std::invalid_argument("ReferenceElement: order must be in 1..3, got " +
                                std::to_string(order));
  build_nodes();
  build_basis();
  build_faces();
}

void ReferenceElement::build_nodes() {
  const int p = order_;
  if (kind_ == ElemKind::Quad) {
    ref_nodes_.resize((p + 1) * (p + 1), 2);
    monomials_.resize((p + 1) * (p + 1), 2);
    int n = 0;
    for (int b = 0; b <= p; ++b)
      for (int a = 0; a <= p; ++a, ++n) {
        ref_nodes_(n, 0) = -1.0 + 2.0 * a / p;
        ref_nodes_(n, 1) = -1.0 + 2.0 * b / p;
        monomials_(n, 0) = a;
        monomials_(n, 1) = b;
      }
  } else if (kind_ == ElemKind::Hex) {
    const int nn = (p + 1) * (p + 1) * (p + 1);
    ref_nodes_.resize(nn, 3);
    monomials_.resize(nn, 3);
    int n = 0;
    for (int c = 0; c <= p; ++c)
      for (int b = 0; b <= p; ++b)
        for (int a = 0; a <= p; ++a, ++n) {
          ref_nodes_(n, 0) = -1.0 + 2.0 * a / p;
          ref_nodes_(n, 1) = -1.0 + 2.0 * b / p;
          ref_nodes_(n, 2) = -1.0 + 2.0 * c / p;
          monomials_(n, 0) = a;
          monomials_(n, 1) = b;
          monomials_(n, 2) = c;
        }
  } else {
    const int nn = (p + 1) * (p + 2) / 2;
    ref_nodes_.resize(nn, 2);
    monomials_.resize(nn, 2);
    int n = 0;
    for (int j = 0; j <= p; ++j)
      for (int i = 0; i <= p - j; ++i, ++n) {
        ref_nodes_(n, 0) = (double)i / p;
        ref_nodes_(n, 1) = (double)j / p;
        monomials_(n, 0) = i;
        monomials_(n, 1) = j;
      }
  }
}

void ReferenceElement::build_basis() {
  const int nn = node_count();
  Eigen::MatrixXd vand(nn, nn);
  for (int i = 0; i < nn; ++i)
    for (int m = 0; m < nn; ++m) {
      double v = 1.0;
      for (int d = 0; d < dim_; ++d) v *= std::pow(ref_nodes_(i, d), monomials_(m, d));
      vand(i, m) = v;
    }
  coeffs_ = vand.fullPivLu().solve(Eigen::MatrixXd::Identity(nn, nn)).transpose();
}

bool ReferenceElement::contains(const Eigen::VectorXd& xi, double tol) const {
  if (kind_ == ElemKind::Simplex)
    return xi.minCoeff() >= -tol && xi.sum() <= 1.0 + tol;
  return xi.cwiseAbs().maxCoeff() <= 1.0 + tol;
}

void ReferenceElement::eval(const Eigen::VectorXd& xi, Eigen::VectorXd& phi,
                            Eigen::MatrixXd& dphi) const {
  if (!contains(xi))
    throw std::invalid_argument("ReferenceElement::eval: point outside reference domain");
  const int nn = node_count();
  Eigen::VectorXd mono(nn);
  Eigen::MatrixXd dmono(nn, dim_);
  for (int m = 0; m < nn; ++m) {
    double v = 1.0;
    for (int d = 0; d < dim_; ++d) v *= std::pow(xi[d], monomials_(m, d));
    mono[m] = v;
    for (int d = 0; d < dim_; ++d) {
      const int e = monomials_(m, d);
      if (e == 0) {
        dmono(m, d) = 0.0;
      } else {
        double g = e * std::pow(xi[d], e - 1);
        for (int d2 = 0; d2 < dim_; ++d2)
          if (d2 != d) g *= std::pow(xi[d2], monomials_(m, d2));
        dmono(m, d) = g;
      }
    }
  }
  phi.noalias() = coeffs_ * mono;
  dphi.noalias() = coeffs_ * dmono;
}

void ReferenceElement::build_faces() {
  const int p = order_;
  faces_.clear();
  auto grid2 = [&](int a, int b) { return b * (p + 1) + a; };
  if (kind_ == ElemKind::Quad) {
    std::vector<int> bottom, right, top, left;
    for (int a = 0; a <= p; ++a) bottom.push_back(grid2(a, 0));
    for (int b = 0; b <= p; ++b) right.push_back(grid2(p, b));
    for (int a = 0; a <= p; ++a) top.push_back(grid2(a, p));
    for (int b = 0; b <= p; ++b) left.push_back(grid2(0, b));
    faces_ = {bottom, right, top, left};
  } else if (kind_ == ElemKind::Simplex) {
    // Node n at lattice (i,j): n = offset(j) + i with offset(j) = sum_{k<j}(p+1-k).
    auto tri = [&](int i, int j) {
      int off = 0;
      for (int k = 0; k < j; ++k) off += p + 1 - k;
      return off + i;
    };
    std::vector<int> e0, e1, e2;
    for (int i = 0; i <= p; ++i) e0.push_back(tri(i, 0));          // (0,0)->(1,0)
    for (int j = 0; j <= p; ++j) e1.push_back(tri(p - j, j));      // (1,0)->(0,1)
    for (int j = 0; j <= p; ++j) e2.push_back(tri(0, p - j));      // (0,1)->(0,0)
    faces_ = {e0, e1, e2};
  } else {
    auto grid3 = [&](int a, int b, int c) { return (c * (p + 1) + b) * (p + 1) + a; };
    std::vector<std::vector<int>> fs(6);
    for (int c = 0; c <= p; ++c)
      for (int b = 0; b <= p; ++b) {
        fs[0].push_back(grid3(0, b, c));   // xi = -1
        fs[1].push_back(grid3(p, b, c));   // xi = +1
      }
    for (int c = 0; c <= p; ++c)
      for (int a = 0; a <= p; ++a) {
        fs[2].push_back(grid3(a, 0, c));   // eta = -1
        fs[3].push_back(grid3(a, p, c));   // eta = +1
      }
    for (int b = 0; b <= p; ++b)
      for (int a = 0; a <= p; ++a) {
        fs[4].push_back(grid3(a, b, 0));   // zeta = -1
        fs[5].push_back(grid3(a, b, p));   // zeta = +1
      }
    faces_ = fs;
  }
}

Eigen::VectorXd ReferenceElement::face_point(int f, const Eigen::VectorXd& s) const {
  const auto& face = faces_.at(f);
  const int p = order_;
  if (dim_ == 2) {
    // Straight reference edge: affine between listed endpoints.
    const double t = 0.5 * (s[0] + 1.0);
    return (1.0 - t) * ref_nodes_.row(face.front()).transpose() +
           t * ref_nodes_.row(face.back()).transpose();
  }
  // Hex face: bilinear over its corner nodes (the reference face is a plane square).
  const int w = p + 1;
  const Eigen::VectorXd c00 = ref_nodes_.row(face[0]).transpose();
  const Eigen::VectorXd c10 = ref_nodes_.row(face[p]).transpose();
  const Eigen::VectorXd c01 = ref_nodes_.row(face[p * w]).transpose();
  const Eigen::VectorXd c11 = ref_nodes_.row(face[p * w + p]).transpose();
  const double u = 0.5 * (s[0] + 1.0), v = 0.5 * (s[1] + 1.0);
  return (1 - u) * (1 - v) * c00 + u * (1 - v) * c10 + (1 - u) * v * c01 + u * v * c11;
}

Eigen::MatrixXd ReferenceElement::face_jacobian(int f, const Eigen::VectorXd& s) const {
  const auto& face = faces_.at(f);
  const int p = order_;
  if (dim_ == 2) {
    Eigen::MatrixXd j(2, 1);
    j.col(0) = 0.5 * (ref_nodes_.row(face.back()) - ref_nodes_.row(face.front())).transpose();
    return j;
  }
  const int w = p + 1;
  const Eigen::VectorXd c00 = ref_nodes_.row(face[0]).transpose();
  const Eigen::VectorXd c10 = ref_nodes_.row(face[p]).transpose();
  const Eigen::VectorXd c01 = ref_nodes_.row(face[p * w]).transpose();
  const Eigen::VectorXd c11 = ref_nodes_.row(face[p * w + p]).transpose();
  const double u = 0.5 * (s[0] + 1.0), v = 0.5 * (s[1] + 1.0);
  Eigen::MatrixXd j(3, 2);
  j.col(0) = 0.5 * ((1 - v) * (c10 - c00) + v * (c11 - c01));
  j.col(1) = 0.5 * ((1 - u) * (c01 - c00) + u * (c11 - c10));
  return j;
}

namespace {

QuadratureRule dunavant(int n_points, int degree) {
  QuadratureRule r;
  r.degree = degree;
  auto add_perms = [&](std::vector<Eigen::Vector3d>& bary, std::vector<double>& w,
                       double l1, double l2, double l3, double wt) {
    if (std::abs(l1 - l2) < 1e-15 && std::abs(l2 - l3) < 1e-15) {
      bary.emplace_back(l1, l2, l3);
      w.push_back(wt);
      return;
    }
    bary.emplace_back(l1, l2, l3);
    bary.emplace_back(l2, l3, l1);
    bary.emplace_back(l3, l1, l2);
    w.push_back(wt);
    w.push_back(wt);
    w.push_back(wt);
  };
  std::vector<Eigen::Vector3d> bary;
  std::vector<double> w;
  if (n_points == 1) {
    add_perms(bary, w, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0);
  } else if (n_points == 3) {
    add_perms(bary, w, 2.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3);
  } else if (n_points == 6) {
    add_perms(bary, w, 0.108103018168070, 0.445948490915965, 0.445948490915965,
              0.223381589678011);
    add_perms(bary, w, 0.816847572980459, 0.091576213509771, 0.091576213509771,
              0.109951743655322);
  } else if (n_points == 7) {
    add_perms(bary, w, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225);
    add_perms(bary, w, 0.059715871789770, 0.470142064105115, 0.470142064105115,
              0.132394152788506);
    add_perms(bary, w, 0.797426985353087, 0.101286507323456, 0.101286507323456,
              0.125939180544827);
  } else {
    throw std::invalid_argument("dunavant: unsupported point count");
  }
  r.points.resize((int)bary.size(), 2);
  r.weights.resize((int)bary.size());
  for (std::size_t i = 0; i < bary.size(); ++i) {
    r.points((int)i, 0) = bary[i][1];  // vertices (0,0),(1,0),(0,1)
    r.points((int)i, 1) = bary[i][2];
    r.weights[(int)i] = 0.5 * w[i];
  }
  return r;
}

// Collapsed-square (Duffy) rule for the unit triangle; positive weights, exact
// to the requested degree by construction.
QuadratureRule duffy_triangle(int degree) {
  const int nx = (degree + 3) / 2;  // integrand degree in xi is raised by the Jacobian
  const int ny = (degree + 2) / 2;
  const QuadratureRule gx = gauss_legendre_1d(nx);
  const QuadratureRule gy = gauss_legendre_1d(ny);
  QuadratureRule r;
  r.degree = degree;
  r.points.resize(nx * ny, 2);
  r.weights.resize(nx * ny);
  int n = 0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j, ++n) {
      const double u = 0.5 * (gx.points(i, 0) + 1.0);
      const double v = 0.5 * (gy.points(j, 0) + 1.0);
      r.points(n, 0) = u;
      r.points(n, 1) = v * (1.0 - u);
      r.weights[n] = 0.25 * gx.weights[i] * gy.weights[j] * (1.0 - u);
    }
  return r;
}

}  // namespace

QuadratureRule gauss_legendre_1d(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_1d: n >= 1 required");
  QuadratureRule r;
  r.degree = 2 * n - 1;
  if (n == 1) {
    r.points = Eigen::MatrixXd::Zero(1, 1);
    r.weights = Eigen::VectorXd::Constant(1, 2.0);
    return r;
  }
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  r.points = es.eigenvalues();
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    r.weights[i] = 2.0 * v0 * v0;
  }
  return r;
}

double reference_measure(ElemKind kind) {
  switch (kind) {
    case ElemKind::Quad: return 4.0;
    case ElemKind::Simplex: return 0.5;
    case ElemKind::Hex: return 8.0;
  }
  return 0.0;
}

QuadratureRule quadrature_rule(ElemKind kind, int target_degree) {
  if (target_degree < 0 || target_degree > 10)
    throw std::invalid_argument("quadrature_rule: target degree must be in 0..10, got " +
                                std::to_string(target_degree));
  if (kind == ElemKind::Simplex) {
    if (target_degree <= 1) return dunavant(1, 1);
    if (target_degree <= 2) return dunavant(3, 2);
    if (target_degree <= 4) return dunavant(6, 4);
    if (target_degree <= 5) return dunavant(7, 5);
    return duffy_triangle(target_degree);
  }
  const int n = target_degree / 2 + 1;
  const QuadratureRule g = gauss_legendre_1d(n);
  QuadratureRule r;
  r.degree = 2 * n - 1;
  const int dim = elem_dim(kind);
  const int nq = (int)std::pow(n, dim);
  r.points.resize(nq, dim);
  r.weights.resize(nq);
  for (int q = 0; q < nq; ++q) {
    int rem = q;
    double w = 1.0;
    for (int d = 0; d < dim; ++d) {
      const int i = rem % n;
      rem /= n;
      r.points(q, d) = g.points(i, 0);
      w *= g.weights[i];
    }
    r.weights[q] = w;
  }
  return r;
}

MapPoint isoparametric_map(const ReferenceElement& geom, const Eigen::MatrixXd& coords,
                           const ReferenceElement& sol, const Eigen::VectorXd& xi,
                           int elem_label) {
  const int dim = geom.dim();
  Eigen::VectorXd phi_g;
  Eigen::MatrixXd dphi_g;
  geom.eval(xi, phi_g, dphi_g);
  MapPoint mp;
  mp.x.noalias() = coords.transpose() * phi_g;
  mp.jac.noalias() = coords.transpose() * dphi_g;  // J(a,b) = dx_a/dxi_b
  mp.det_jac = mp.jac.determinant();
  if (mp.det_jac <= 0.0)
    throw std::runtime_error("isoparametric_map: non-positive Jacobian (det=" +
                             std::to_string(mp.det_jac) + ") in element " +
                             std::to_string(elem_label));
  Eigen::VectorXd phi_s;
  Eigen::MatrixXd dphi_s;
  sol.eval(xi, phi_s, dphi_s);
  const Eigen::MatrixXd jinv = mp.jac.inverse();
  mp.dphi_phys.noalias() = dphi_s * jinv;
  (void)dim;
  return mp;
}

}  // namespace ggn
