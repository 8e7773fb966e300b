#include "mpet/mesh.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace mpet {

namespace {

// Local edge k is opposite local vertex k and runs from the lower local
// index to the higher one: {1,2}, {0,2}, {0,1}.
constexpr int kLocalEdgeVertices[3][2] = {{1, 2}, {0, 2}, {0, 1}};

} // namespace

TriMesh build_unit_square_mesh(int N) {
  if (N < 1)
    throw std::invalid_argument("build_unit_square_mesh: N must be >= 1");

  TriMesh mesh;
  mesh.N = N;
  mesh.h = 1.0 / N;

  const int nv = (N + 1) * (N + 1);
  mesh.vertices.reserve(nv);
  for (int j = 0; j <= N; ++j)
    for (int i = 0; i <= N; ++i)
      mesh.vertices.emplace_back(double(i) / N, double(j) / N);

  auto vid = [N](int i, int j) { return j * (N + 1) + i; };

  mesh.cells.reserve(2 * N * N);
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      const int v00 = vid(i, j);
      const int v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1);
      const int v11 = vid(i + 1, j + 1);
      mesh.cells.push_back({v00, v10, v11}); // lower triangle
      mesh.cells.push_back({v00, v11, v01}); // upper triangle
    }
  }

  // Assign edge ids in first-encounter order over cells; deterministic.
  std::map<std::pair<int, int>, int> edge_id;
  mesh.cell_edges.resize(mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (int k = 0; k < 3; ++k) {
      int a = mesh.cells[c][kLocalEdgeVertices[k][0]];
      int b = mesh.cells[c][kLocalEdgeVertices[k][1]];
      if (a > b)
        std::swap(a, b);
      auto [it, inserted] = edge_id.try_emplace({a, b}, mesh.num_edges());
      if (inserted)
        mesh.edges.push_back({a, b});
      mesh.cell_edges[c][k] = {it->second, 0}; // sign filled below
    }
  }

  mesh.edge_cells.assign(mesh.num_edges(), {-1, -1});
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Vector2 centroid = mesh.cell_centroid(c);
    for (int k = 0; k < 3; ++k) {
      const int e = mesh.cell_edges[c][k].first;
      const double outward =
          mesh.edge_normal(e).dot(mesh.edge_midpoint(e) - centroid);
      const int sign = outward > 0 ? +1 : -1;
      mesh.cell_edges[c][k].second = sign;
      mesh.edge_cells[e][sign > 0 ? 0 : 1] = c;
    }
  }

  mesh.edge_boundary_tag.assign(mesh.num_edges(), -1);
  const double tol = 0.25 * mesh.h;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edge_cells[e][0] >= 0 && mesh.edge_cells[e][1] >= 0)
      continue;
    const Vector2 m = mesh.edge_midpoint(e);
    if (std::abs(m.y()) < tol)
      mesh.edge_boundary_tag[e] = int(BoundaryTag::Gamma1);
    else if (std::abs(m.x() - 1.0) < tol)
      mesh.edge_boundary_tag[e] = int(BoundaryTag::Gamma2);
    else if (std::abs(m.y() - 1.0) < tol)
      mesh.edge_boundary_tag[e] = int(BoundaryTag::Gamma3);
    else if (std::abs(m.x()) < tol)
      mesh.edge_boundary_tag[e] = int(BoundaryTag::Gamma4);
    else
      throw std::logic_error("boundary edge off the unit-square boundary");
  }

  return mesh;
}

std::vector<int> boundary_edges(const TriMesh &mesh, BoundaryTag tag) {
  std::vector<int> result;
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (mesh.edge_boundary_tag[e] == int(tag))
      result.push_back(e);
  return result;
}

void dump_mesh(const TriMesh &mesh, std::ostream &os) {
  os << "mesh N " << mesh.N << " h " << mesh.h << "\n";
  for (int v = 0; v < mesh.num_vertices(); ++v)
    os << "vertex " << v << " " << mesh.vertices[v].x() << " "
       << mesh.vertices[v].y() << "\n";
  for (int c = 0; c < mesh.num_cells(); ++c)
    os << "cell " << c << " " << mesh.cells[c][0] << " " << mesh.cells[c][1]
       << " " << mesh.cells[c][2] << "\n";
  for (int e = 0; e < mesh.num_edges(); ++e) {
    os << "edge " << e << " " << mesh.edges[e][0] << " " << mesh.edges[e][1]
       << " tag " << mesh.edge_boundary_tag[e] << "\n";
  }
}

} // namespace mpet
