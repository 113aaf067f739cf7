#include "ggn/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ggn {

Eigen::MatrixXd Mesh::elem_coords(int e) const {
  const auto& el = elements[e];
  Eigen::MatrixXd c((int)el.size(), dim);
  for (std::size_t i = 0; i < el.size(); ++i) c.row((int)i) = nodes.row(el[i]);
  return c;
}

Eigen::VectorXd Mesh::elem_centroid(int e) const {
  return elem_coords(e).colwise().mean().transpose();
}

void Mesh::validate() {
  const int n = node_count();
  const int nloc = elem_node_count(kind, geom_order);
  if (elem_dim(kind) != dim)
    throw std::runtime_error("mesh: element kind dimension does not match mesh dim");
  for (int e = 0; e < elem_count(); ++e) {
    if ((int)elements[e].size() != nloc)
      throw std::runtime_error("mesh: element " + std::to_string(e) + " has " +
                               std::to_string(elements[e].size()) + " nodes, expected " +
                               std::to_string(nloc));
    for (int id : elements[e])
      if (id < 0 || id >= n)
        throw std::runtime_error("mesh: element " + std::to_string(e) +
                                 " references node " + std::to_string(id) + " out of range");
  }

  const ReferenceElement ref(kind, geom_order);
  // face node-set -> (elem, local face, count)
  std::map<std::vector<int>, std::pair<std::pair<int, int>, int>> face_index;
  for (int e = 0; e < elem_count(); ++e)
    for (std::size_t f = 0; f < ref.faces().size(); ++f) {
      std::vector<int> key;
      for (int loc : ref.faces()[f]) key.push_back(elements[e][loc]);
      std::sort(key.begin(), key.end());
      auto it = face_index.find(key);
      if (it == face_index.end())
        face_index[key] = {{e, (int)f}, 1};
      else
        it->second.second++;
    }

  for (std::size_t i = 0; i < facets.size(); ++i) {
    BoundaryFacet& bf = facets[i];
    if (bf.tag.empty())
      throw std::runtime_error("mesh: facet " + std::to_string(i) + " has an empty tag");
    for (int id : bf.nodes)
      if (id < 0 || id >= n)
        throw std::runtime_error("mesh: facet " + std::to_string(i) + " references node " +
                                 std::to_string(id) + " out of range");
    std::vector<int> key = bf.nodes;
    std::sort(key.begin(), key.end());
    auto it = face_index.find(key);
    if (it == face_index.end())
      throw std::runtime_error("mesh: facet " + std::to_string(i) +
                               " is not a face of any element");
    if (it->second.second != 1)
      throw std::runtime_error("mesh: facet " + std::to_string(i) +
                               " is shared by more than one element (not on the boundary)");
    bf.owner_elem = it->second.first.first;
    bf.local_face = it->second.first.second;
  }
}

namespace {

ElemKind kind_from_name(const std::string& s, int line) {
  if (s == "quad") return ElemKind::Quad;
  if (s == "simplex") return ElemKind::Simplex;
  if (s == "hex") return ElemKind::Hex;
  throw std::runtime_error("mesh parse error at line " + std::to_string(line) +
                           ": unknown element kind '" + s + "'");
}

}  // namespace

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_mesh: cannot open " + path);
  Mesh mesh;
  std::string token;
  int line = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error("mesh parse error in " + path + " at line " +
                             std::to_string(line) + ": " + msg);
  };
  std::string header;
  int version = 0;
  std::string l;
  auto next_line = [&](std::istringstream& ss) {
    while (std::getline(in, l)) {
      ++line;
      if (l.empty() || l[0] == '#') continue;
      ss = std::istringstream(l);
      return true;
    }
    return false;
  };
  std::istringstream ss;
  if (!next_line(ss) || !(ss >> header >> version) || header != "ggn-mesh" || version != 1)
    fail("expected header 'ggn-mesh 1'");
  if (!next_line(ss) || !(ss >> token >> mesh.dim) || token != "dim" ||
      (mesh.dim != 2 && mesh.dim != 3))
    fail("expected 'dim 2' or 'dim 3'");

  int n_nodes = 0;
  if (!next_line(ss) || !(ss >> token >> n_nodes) || token != "nodes" || n_nodes <= 0)
    fail("expected 'nodes <count>'");
  mesh.nodes.resize(n_nodes, mesh.dim);
  for (int i = 0; i < n_nodes; ++i) {
    int id;
    if (!next_line(ss) || !(ss >> id)) fail("expected node line");
    if (id != i) fail("node ids must be consecutive from 0, got " + std::to_string(id));
    for (int d = 0; d < mesh.dim; ++d)
      if (!(ss >> mesh.nodes(i, d))) fail("bad node coordinates");
  }

  int n_elems = 0;
  if (!next_line(ss) || !(ss >> token >> n_elems) || token != "elements" || n_elems <= 0)
    fail("expected 'elements <count>'");
  bool first = true;
  for (int e = 0; e < n_elems; ++e) {
    std::string kind_name;
    int order;
    if (!next_line(ss) || !(ss >> kind_name >> order)) fail("expected element line");
    const ElemKind kind = kind_from_name(kind_name, line);
    if (first) {
      mesh.kind = kind;
      mesh.geom_order = order;
      first = false;
    } else if (kind != mesh.kind || order != mesh.geom_order) {
      fail("mixed element kinds/orders are not supported");
    }
    const int nloc = elem_node_count(kind, order);
    std::vector<int> conn(nloc);
    for (int& v : conn)
      if (!(ss >> v)) fail("element has too few nodes");
    mesh.elements.push_back(std::move(conn));
  }

  int n_facets = 0;
  if (!next_line(ss) || !(ss >> token >> n_facets) || token != "facets")
    fail("expected 'facets <count>'");
  for (int f = 0; f < n_facets; ++f) {
    BoundaryFacet bf;
    if (!next_line(ss) || !(ss >> bf.tag)) fail("expected facet line");
    int v;
    while (ss >> v) bf.nodes.push_back(v);
    if (bf.nodes.empty()) fail("facet has no nodes");
    mesh.facets.push_back(std::move(bf));
  }

  mesh.validate();
  return mesh;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_mesh: cannot open " + path);
  out.precision(17);
  out << "ggn-mesh 1\ndim " << mesh.dim << "\n";
  out << "nodes " << mesh.node_count() << "\n";
  for (int i = 0; i < mesh.node_count(); ++i) {
    out << i;
    for (int d = 0; d < mesh.dim; ++d) out << " " << mesh.nodes(i, d);
    out << "\n";
  }
  out << "elements " << mesh.elem_count() << "\n";
  for (const auto& el : mesh.elements) {
    out << elem_kind_name(mesh.kind) << " " << mesh.geom_order;
    for (int id : el) out << " " << id;
    out << "\n";
  }
  out << "facets " << mesh.facets.size() << "\n";
  for (const auto& bf : mesh.facets) {
    out << bf.tag;
    for (int id : bf.nodes) out << " " << id;
    out << "\n";
  }
}

GraphOperators build_graph_operators(const std::vector<std::vector<int>>& conn, int n_nodes) {
  if (n_nodes <= 0) throw std::invalid_argument("build_graph_operators: empty node set");
  std::vector<std::set<int>> nbr(n_nodes);
  for (const auto& el : conn)
    for (int a : el)
      for (int b : el)
        if (a != b) nbr[a].insert(b);

  GraphOperators g;
  g.degree.resize(n_nodes);
  std::vector<Eigen::Triplet<double>> adj_t, lap_t;
  for (int i = 0; i < n_nodes; ++i) {
    if (nbr[i].empty())
      throw std::runtime_error("build_graph_operators: node " + std::to_string(i) +
                               " is isolated");
    g.degree[i] = (double)nbr[i].size();
  }
  for (int i = 0; i < n_nodes; ++i) {
    // L_hat = L - I = -D^{-1/2} A D^{-1/2}
    for (int j : nbr[i]) {
      adj_t.emplace_back(i, j, 1.0);
      lap_t.emplace_back(i, j, -1.0 / std::sqrt(g.degree[i] * g.degree[j]));
    }
  }
  g.adjacency.resize(n_nodes, n_nodes);
  g.adjacency.setFromTriplets(adj_t.begin(), adj_t.end());
  g.scaled_laplacian.resize(n_nodes, n_nodes);
  g.scaled_laplacian.setFromTriplets(lap_t.begin(), lap_t.end());
  g.adjacency.makeCompressed();
  g.scaled_laplacian.makeCompressed();
  return g;
}

GraphOperators build_graph_operators(const Mesh& mesh) {
  return build_graph_operators(mesh.elements, mesh.node_count());
}

namespace {

using MapFn = std::function<void(double, double, double&, double&)>;

Mesh structured_quads(int nx, int ny, int order, const MapFn& map,
                      const std::vector<std::string>& side_tags) {
  if (side_tags.size() != 4)
    throw std::invalid_argument("structured_quads: need 4 side tags (bottom,right,top,left)");
  Mesh mesh;
  mesh.dim = 2;
  mesh.kind = ElemKind::Quad;
  mesh.geom_order = order;
  const int gw = order * nx + 1, gh = order * ny + 1;
  mesh.nodes.resize(gw * gh, 2);
  for (int j = 0; j < gh; ++j)
    for (int i = 0; i < gw; ++i) {
      double x, y;
      map((double)i / (gw - 1), (double)j / (gh - 1), x, y);
      mesh.nodes(j * gw + i, 0) = x;
      mesh.nodes(j * gw + i, 1) = y;
    }
  for (int ey = 0; ey < ny; ++ey)
    for (int ex = 0; ex < nx; ++ex) {
      std::vector<int> el;
      for (int b = 0; b <= order; ++b)
        for (int a = 0; a <= order; ++a)
          el.push_back((order * ey + b) * gw + order * ex + a);
      mesh.elements.push_back(std::move(el));
    }
  for (int ex = 0; ex < nx; ++ex) {
    BoundaryFacet bot{side_tags[0], {}}, top{side_tags[2], {}};
    for (int a = 0; a <= order; ++a) {
      bot.nodes.push_back(order * ex + a);
      top.nodes.push_back((gh - 1) * gw + order * ex + a);
    }
    mesh.facets.push_back(std::move(bot));
    mesh.facets.push_back(std::move(top));
  }
  for (int ey = 0; ey < ny; ++ey) {
    BoundaryFacet right{side_tags[1], {}}, left{side_tags[3], {}};
    for (int b = 0; b <= order; ++b) {
      right.nodes.push_back((order * ey + b) * gw + gw - 1);
      left.nodes.push_back((order * ey + b) * gw);
    }
    mesh.facets.push_back(std::move(right));
    mesh.facets.push_back(std::move(left));
  }
  mesh.validate();
  return mesh;
}

}  // namespace

Mesh make_square_quads(int nx, int ny, int order, const std::vector<std::string>& side_tags) {
  return structured_quads(nx, ny, order,
                          [](double u, double v, double& x, double& y) {
                            x = u;
                            y = v;
                          },
                          side_tags);
}

Mesh make_disk_quads(int order) {
  // Square-to-disk map: boundary nodes land exactly on the unit circle.
  return structured_quads(2, 2, order,
                          [](double u, double v, double& x, double& y) {
                            const double a = 2.0 * u - 1.0, b = 2.0 * v - 1.0;
                            x = a * std::sqrt(1.0 - 0.5 * b * b);
                            y = b * std::sqrt(1.0 - 0.5 * a * a);
                          },
                          {"boundary", "boundary", "boundary", "boundary"});
}

Mesh make_cylinder_hexes() {
  // Hollow cylinder: inner radius 1, outer radius 2, length 4 along z.
  // 4 x 2 x 5 (theta x r x z) second-order hexes -> 40 elements, 440 nodes.
  const int n_theta = 4, n_r = 2, n_z = 5, p = 2;
  const double r0 = 1.0, r1 = 2.0, len = 4.0;
  const int w_t = p * n_theta;        // periodic in theta
  const int w_r = p * n_r + 1;
  const int w_z = p * n_z + 1;
  Mesh mesh;
  mesh.dim = 3;
  mesh.kind = ElemKind::Hex;
  mesh.geom_order = p;
  mesh.nodes.resize(w_t * w_r * w_z, 3);
  auto node_id = [&](int it, int ir, int iz) {
    return ((it % w_t) + w_t * (ir + w_r * iz));
  };
  for (int iz = 0; iz < w_z; ++iz)
    for (int ir = 0; ir < w_r; ++ir)
      for (int it = 0; it < w_t; ++it) {
        const double th = 2.0 * M_PI * it / w_t;
        const double r = r0 + (r1 - r0) * ir / (w_r - 1);
        const int id = node_id(it, ir, iz);
        mesh.nodes(id, 0) = r * std::cos(th);
        mesh.nodes(id, 1) = r * std::sin(th);
        mesh.nodes(id, 2) = len * iz / (w_z - 1);
      }
  // Local xi -> r, eta -> theta, zeta -> z keeps det J > 0.
  for (int ez = 0; ez < n_z; ++ez)
    for (int er = 0; er < n_r; ++er)
      for (int et = 0; et < n_theta; ++et) {
        std::vector<int> el;
        for (int c = 0; c <= p; ++c)
          for (int b = 0; b <= p; ++b)
            for (int a = 0; a <= p; ++a)
              el.push_back(node_id(p * et + b, p * er + a, p * ez + c));
        mesh.elements.push_back(std::move(el));
      }
  auto face = [&](const std::string& tag, auto fill) {
    BoundaryFacet bf{tag, {}};
    fill(bf.nodes);
    mesh.facets.push_back(std::move(bf));
  };
  for (int er = 0; er < n_r; ++er)
    for (int et = 0; et < n_theta; ++et) {
      face("left", [&](std::vector<int>& v) {
        for (int b = 0; b <= p; ++b)
          for (int a = 0; a <= p; ++a) v.push_back(node_id(p * et + b, p * er + a, 0));
      });
      face("right", [&](std::vector<int>& v) {
        for (int b = 0; b <= p; ++b)
          for (int a = 0; a <= p; ++a)
            v.push_back(node_id(p * et + b, p * er + a, p * n_z));
      });
    }
  for (int ez = 0; ez < n_z; ++ez)
    for (int et = 0; et < n_theta; ++et) {
      face("inner", [&](std::vector<int>& v) {
        for (int c = 0; c <= p; ++c)
          for (int b = 0; b <= p; ++b) v.push_back(node_id(p * et + b, 0, p * ez + c));
      });
      face("outer", [&](std::vector<int>& v) {
        for (int c = 0; c <= p; ++c)
          for (int b = 0; b <= p; ++b)
            v.push_back(node_id(p * et + b, p * n_r, p * ez + c));
      });
    }
  mesh.validate();
  return mesh;
}

}  // namespace ggn
