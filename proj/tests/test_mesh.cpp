#include "ggn/cases.hpp"
#include "ggn/mesh.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

using namespace ggn;

namespace {

std::string temp_path(const char* name) {
  return std::string("/tmp/ggn-test-") + name;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream(path) << body;
}

}  // namespace

TEST_CASE("shared-element adjacency on two glued triangles") {
  // Nodes 0,1 shared by both triangles; 2 and 3 are private corners.
  const std::vector<std::vector<int>> conn = {{0, 1, 2}, {1, 0, 3}};
  const GraphOperators g = build_graph_operators(conn, 4);
  auto nbrs = [&](int i) {
    std::set<int> s;
    for (SpMat::InnerIterator it(g.adjacency, i); it; ++it) s.insert((int)it.index());
    return s;
  };
  CHECK(nbrs(0) == std::set<int>{1, 2, 3});
  CHECK(nbrs(1) == std::set<int>{0, 2, 3});
  CHECK(nbrs(2) == std::set<int>{0, 1});
  CHECK(nbrs(3) == std::set<int>{0, 1});
  CHECK(g.degree[0] == 3.0);
  CHECK(g.degree[2] == 2.0);
}

TEST_CASE("scaled laplacian of a single triangle is -1/2 off the diagonal") {
  const GraphOperators g = build_graph_operators({{0, 1, 2}}, 3);
  const Eigen::MatrixXd l = Eigen::MatrixXd(g.scaled_laplacian);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(l(i, j) - (i == j ? 0.0 : -0.5)) < 1e-14);
}

TEST_CASE("disconnected components give a block-diagonal laplacian") {
  const GraphOperators g = build_graph_operators({{0, 1, 2}, {3, 4, 5}}, 6);
  const Eigen::MatrixXd l = Eigen::MatrixXd(g.scaled_laplacian);
  CHECK(l.block(0, 3, 3, 3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(l.block(3, 0, 3, 3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("isolated nodes are rejected") {
  CHECK_THROWS(build_graph_operators({{0, 1, 2}}, 4));
}

TEST_CASE("single-quad mesh file loads") {
  const std::string path = temp_path("single-quad.mesh");
  write_file(path,
             "# smallest useful mesh\n"
             "ggn-mesh 1\n"
             "dim 2\n"
             "nodes 4\n"
             "0 0 0\n"
             "1 1 0\n"
             "2 0 1\n"
             "3 1 1\n"
             "elements 1\n"
             "quad 1 0 1 2 3\n"
             "facets 4\n"
             "bottom 0 1\n"
             "right 1 3\n"
             "top 2 3\n"
             "left 0 2\n");
  const Mesh m = load_mesh(path);
  CHECK(m.node_count() == 4);
  CHECK(m.elem_count() == 1);
  CHECK(m.facets.size() == 4);
  CHECK(m.facets[1].owner_elem == 0);
  std::remove(path.c_str());
}

TEST_CASE("bad node index reports the file line") {
  const std::string path = temp_path("bad-index.mesh");
  write_file(path,
             "ggn-mesh 1\n"
             "dim 2\n"
             "nodes 3\n"
             "0 0 0\n"
             "1 1 0\n"
             "2 0 1\n"
             "elements 1\n"
             "simplex 1 0 1 7\n"
             "facets 0\n");
  CHECK_THROWS_WITH_AS(load_mesh(path), doctest::Contains("node"), std::exception);
  std::remove(path.c_str());
}

TEST_CASE("save/load round trip preserves the mesh") {
  Mesh m = make_square_quads(3, 2, 2, {"b", "r", "t", "l"});
  m.validate();
  const std::string path = temp_path("roundtrip.mesh");
  save_mesh(m, path);
  const Mesh m2 = load_mesh(path);
  CHECK(m2.node_count() == m.node_count());
  CHECK(m2.elem_count() == m.elem_count());
  CHECK(m2.facets.size() == m.facets.size());
  CHECK((m2.nodes - m.nodes).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(m2.elements == m.elements);
  std::remove(path.c_str());
}

TEST_CASE("structured square generator counts and determinism") {
  Mesh a = make_square_quads(2, 2, 3, {"b", "r", "t", "l"});
  Mesh b = make_square_quads(2, 2, 3, {"b", "r", "t", "l"});
  CHECK(a.node_count() == 49);  // (2*3+1)^2
  CHECK(a.elem_count() == 4);
  CHECK((a.nodes - b.nodes).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.elements == b.elements);

  Mesh q2 = make_square_quads(2, 2, 2, {"b", "r", "t", "l"});
  CHECK(q2.node_count() == 25);
  Mesh q1 = make_square_quads(10, 10, 1, {"b", "r", "t", "l"});
  CHECK(q1.node_count() == 121);
  CHECK(q1.elem_count() == 100);
}

TEST_CASE("disk and cylinder generators validate") {
  Mesh disk = make_disk_quads(3);
  CHECK_NOTHROW(disk.validate());
  CHECK(disk.elem_count() == 4);
  Mesh cyl = make_cylinder_hexes();
  CHECK_NOTHROW(cyl.validate());
  CHECK(cyl.elem_count() == 40);
  CHECK(cyl.node_count() == 440);
  CHECK(cyl.dim == 3);
}

TEST_CASE("checked-in meshes: notch triangles and stenosis quads") {
  const Mesh notch = load_mesh(mesh_dir() + "/notch.mesh");
  CHECK(notch.elem_count() == 55);
  CHECK(notch.kind == ElemKind::Simplex);
  const Mesh sten = load_mesh(mesh_dir() + "/stenosis.mesh");
  CHECK(sten.node_count() == 441);
  CHECK(sten.elem_count() == 100);
  CHECK(sten.geom_order == 2);
  CHECK(sten.facets.size() == 40);
}
