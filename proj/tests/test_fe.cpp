#include "ggn/fe.hpp"
#include "ggn/mesh.hpp"
#include "ggn/space.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ggn;

namespace {

Eigen::VectorXd random_point(ElemKind kind, int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Eigen::VectorXd xi(dim);
  if (kind == ElemKind::Simplex) {
    double a = u01(rng), b = u01(rng);
    if (a + b > 1.0) a = 1.0 - a, b = 1.0 - b;
    xi << a, b;
  } else {
    for (int d = 0; d < dim; ++d) xi[d] = 2.0 * u01(rng) - 1.0;
  }
  return xi;
}

}  // namespace

TEST_CASE("lagrange delta property at reference nodes") {
  for (auto [kind, max_order] : {std::pair{ElemKind::Quad, 3}, {ElemKind::Simplex, 2},
                                 {ElemKind::Hex, 2}}) {
    for (int p = 1; p <= max_order; ++p) {
      ReferenceElement el(kind, p);
      Eigen::VectorXd phi;
      Eigen::MatrixXd dphi;
      for (int i = 0; i < el.node_count(); ++i) {
        el.eval(el.ref_nodes().row(i), phi, dphi);
        for (int j = 0; j < el.node_count(); ++j)
          CHECK(std::abs(phi[j] - (i == j ? 1.0 : 0.0)) < 1e-12);
      }
    }
  }
}

TEST_CASE("partition of unity and zero gradient sum at random points") {
  std::mt19937_64 rng(5);
  for (auto [kind, max_order] : {std::pair{ElemKind::Quad, 3}, {ElemKind::Simplex, 2},
                                 {ElemKind::Hex, 2}}) {
    for (int p = 1; p <= max_order; ++p) {
      ReferenceElement el(kind, p);
      for (int t = 0; t < 25; ++t) {
        const Eigen::VectorXd xi = random_point(kind, el.dim(), rng);
        Eigen::VectorXd phi;
        Eigen::MatrixXd dphi;
        el.eval(xi, phi, dphi);
        CHECK(std::abs(phi.sum() - 1.0) < 1e-13);
        CHECK(dphi.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("evaluation outside the reference domain throws") {
  ReferenceElement quad(ElemKind::Quad, 2);
  Eigen::VectorXd phi;
  Eigen::MatrixXd dphi;
  Eigen::VectorXd xi(2);
  xi << 1.5, 0.0;
  CHECK_THROWS(quad.eval(xi, phi, dphi));
  ReferenceElement tri(ElemKind::Simplex, 1);
  xi << 0.7, 0.7;
  CHECK_THROWS(tri.eval(xi, phi, dphi));
}

TEST_CASE("reference measures") {
  CHECK(reference_measure(ElemKind::Quad) == doctest::Approx(4.0));
  CHECK(reference_measure(ElemKind::Simplex) == doctest::Approx(0.5));
  CHECK(reference_measure(ElemKind::Hex) == doctest::Approx(8.0));
}

TEST_CASE("quadrature integrates weights to the reference measure") {
  for (auto kind : {ElemKind::Quad, ElemKind::Simplex, ElemKind::Hex}) {
    for (int d = 1; d <= 8; ++d) {
      const QuadratureRule r = quadrature_rule(kind, d);
      CHECK(r.degree >= d);
      CHECK(r.weights.minCoeff() > 0.0);
      CHECK(r.weights.sum() == doctest::Approx(reference_measure(kind)).epsilon(1e-13));
    }
  }
}

TEST_CASE("quadrature integrates x^2 y^2 over the reference quad to 4/9") {
  const QuadratureRule r = quadrature_rule(ElemKind::Quad, 4);
  double q = 0.0;
  for (int i = 0; i < r.points.rows(); ++i)
    q += r.weights[i] * r.points(i, 0) * r.points(i, 0) * r.points(i, 1) * r.points(i, 1);
  CHECK(q == doctest::Approx(4.0 / 9.0).epsilon(1e-13));
}

TEST_CASE("gauss-legendre nodes are symmetric and exact to 2n-1") {
  const QuadratureRule r = gauss_legendre_1d(4);
  CHECK(r.points.rows() == 4);
  CHECK(r.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
  double q = 0.0;  // integrate x^6 over [-1,1] = 2/7
  for (int i = 0; i < 4; ++i) q += r.weights[i] * std::pow(r.points(i, 0), 6);
  CHECK(q == doctest::Approx(2.0 / 7.0).epsilon(1e-13));
}

TEST_CASE("isoparametric jacobian of a unit square element") {
  const Mesh mesh = make_square_quads(1, 1, 1, {"b", "r", "t", "l"});
  ReferenceElement el(ElemKind::Quad, 1);
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(2);
  const MapPoint mp = isoparametric_map(el, mesh.elem_coords(0), el, xi);
  CHECK(mp.jac(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mp.jac(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(mp.jac(0, 1)) < 1e-14);
  CHECK(mp.det_jac == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("table weights integrate areas: square, disk, cylinder") {
  {
    Mesh mesh = make_square_quads(3, 3, 2, {"b", "r", "t", "l"});
    mesh.validate();
    const FeSpace sp = make_space(mesh, 2);
    const BasisTable tb = precompute_tables(mesh, sp, quadrature_rule(ElemKind::Quad, 6));
    CHECK(tb.wdetj.sum() == doctest::Approx(1.0).epsilon(1e-13));
  }
  {
    Mesh mesh = make_disk_quads(3);
    mesh.validate();
    const FeSpace sp = make_space(mesh, 3);
    const BasisTable tb = precompute_tables(mesh, sp, quadrature_rule(ElemKind::Quad, 8));
    CHECK(std::abs(tb.wdetj.sum() - M_PI) < 5e-3);  // curved boundary, 4 cubic quads
  }
  {
    Mesh mesh = make_cylinder_hexes();
    mesh.validate();
    const FeSpace sp = make_space(mesh, 2);
    const BasisTable tb = precompute_tables(mesh, sp, quadrature_rule(ElemKind::Hex, 6));
    CHECK(tb.wdetj.minCoeff() > 0.0);
  }
}

TEST_CASE("facet quadrature of the right edge: unit length, outward normal (1,0)") {
  Mesh mesh = make_square_quads(2, 2, 2, {"b", "r", "t", "l"});
  mesh.validate();
  const FeSpace sp = make_space(mesh, 2);
  double length = 0.0;
  for (const auto& f : mesh.facets) {
    if (f.tag != "r") continue;
    const FacetQuadrature fq = facet_quadrature(mesh, sp, f, 5);
    length += fq.weights.sum();
    for (int q = 0; q < fq.normals.rows(); ++q) {
      CHECK(fq.normals(q, 0) == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(std::abs(fq.normals(q, 1)) < 1e-13);
      CHECK(fq.points(q, 0) == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
  CHECK(length == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("disk boundary normals are radial and the perimeter is 2 pi") {
  Mesh mesh = make_disk_quads(3);
  mesh.validate();
  const FeSpace sp = make_space(mesh, 3);
  double perimeter = 0.0;
  for (const auto& f : mesh.facets) {
    const FacetQuadrature fq = facet_quadrature(mesh, sp, f, 7);
    perimeter += fq.weights.sum();
    for (int q = 0; q < fq.normals.rows(); ++q) {
      const Eigen::Vector2d x = fq.points.row(q);
      const Eigen::Vector2d n = fq.normals.row(q);
      CHECK(n.dot(x.normalized()) > 0.99);
      CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(std::abs(perimeter - 2.0 * M_PI) < 1e-2);
}

TEST_CASE("cylinder inner-wall normals point toward the axis") {
  Mesh mesh = make_cylinder_hexes();
  mesh.validate();
  const FeSpace sp = make_space(mesh, 2);
  int checked = 0;
  for (const auto& f : mesh.facets) {
    if (f.tag != "inner") continue;
    const FacetQuadrature fq = facet_quadrature(mesh, sp, f, 5);
    for (int q = 0; q < fq.normals.rows(); ++q) {
      Eigen::Vector3d radial(fq.points(q, 0), fq.points(q, 1), 0.0);
      Eigen::Vector3d n(fq.normals(q, 0), fq.normals(q, 1), fq.normals(q, 2));
      CHECK(n.dot(radial.normalized()) < -0.9);  // outward from the solid = toward the axis
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("precomputed tables are deterministic") {
  Mesh mesh = make_square_quads(2, 2, 3, {"b", "r", "t", "l"});
  mesh.validate();
  const FeSpace sp = make_space(mesh, 3);
  const QuadratureRule rule = quadrature_rule(ElemKind::Quad, 8);
  const BasisTable t1 = precompute_tables(mesh, sp, rule);
  const BasisTable t2 = precompute_tables(mesh, sp, rule);
  CHECK((t1.wdetj - t2.wdetj).cwiseAbs().maxCoeff() == 0.0);
  CHECK((t1.phi - t2.phi).cwiseAbs().maxCoeff() == 0.0);
}
