#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "mpet/types.hpp"

namespace mpet {

// Boundary sides of the unit square, numbered counter-clockwise from the
// bottom: Gamma1 = bottom, Gamma2 = right, Gamma3 = top, Gamma4 = left.
enum class BoundaryTag : int { Gamma1 = 0, Gamma2 = 1, Gamma3 = 2, Gamma4 = 3 };

inline constexpr std::array<BoundaryTag, 4> kAllBoundaryTags = {
    BoundaryTag::Gamma1, BoundaryTag::Gamma2, BoundaryTag::Gamma3,
    BoundaryTag::Gamma4};

// Structured triangulation of [0,1]^2 into 2N^2 right-angled triangles.
// Every square cell is split along the bottom-left -> top-right diagonal.
//
// Edges carry a fixed global orientation (lower vertex id -> higher vertex
// id); the global edge normal is the right-handed rotation of the edge
// tangent. Cells reference edges through (edge id, sign) pairs where
// sign = +1 when the global edge normal points out of the cell.
struct TriMesh {
  int N = 0;
  double h = 0.0;

  std::vector<Vector2> vertices;
  std::vector<std::array<int, 3>> cells; // vertex ids, counter-clockwise
  std::vector<std::array<int, 2>> edges; // vertex ids, lower -> higher

  // cell_edges[c][k] = (edge id, sign) for the local edge opposite local
  // vertex k, i.e. local edges {1,2}, {0,2}, {0,1}.
  std::vector<std::array<std::pair<int, int>, 3>> cell_edges;

  // edge_cells[e] = {cell with sign +1, cell with sign -1}, -1 if absent.
  std::vector<std::array<int, 2>> edge_cells;

  // -1 for interior edges, otherwise the BoundaryTag index.
  std::vector<int> edge_boundary_tag;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  bool is_boundary_edge(int e) const { return edge_boundary_tag[e] >= 0; }

  Vector2 edge_vector(int e) const {
    return vertices[edges[e][1]] - vertices[edges[e][0]];
  }
  double edge_length(int e) const { return edge_vector(e).norm(); }
  Vector2 edge_midpoint(int e) const {
    return 0.5 * (vertices[edges[e][0]] + vertices[edges[e][1]]);
  }
  // Unit normal attached to the global edge orientation.
  Vector2 edge_normal(int e) const {
    const Vector2 t = edge_vector(e).normalized();
    return Vector2(t.y(), -t.x());
  }

  double cell_area(int c) const {
    const Vector2 &a = vertices[cells[c][0]];
    const Vector2 &b = vertices[cells[c][1]];
    const Vector2 &d = vertices[cells[c][2]];
    return 0.5 * ((b.x() - a.x()) * (d.y() - a.y()) -
                  (b.y() - a.y()) * (d.x() - a.x()));
  }
  Vector2 cell_centroid(int c) const {
    return (vertices[cells[c][0]] + vertices[cells[c][1]] +
            vertices[cells[c][2]]) /
           3.0;
  }
};

// Builds the structured mesh; throws std::invalid_argument for N < 1.
TriMesh build_unit_square_mesh(int N);

// Edge ids carrying the given tag, in ascending order.
std::vector<int> boundary_edges(const TriMesh &mesh, BoundaryTag tag);

// Plain-text listing of vertices, cells and edges, one entity per line.
void dump_mesh(const TriMesh &mesh, std::ostream &os);

} // namespace mpet
