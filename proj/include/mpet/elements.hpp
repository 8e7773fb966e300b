#pragma once

#include <vector>

#include "mpet/mesh.hpp"
#include "mpet/types.hpp"

namespace mpet {

enum class Space { BDM1, RT0, P0 };

// Quadrature points in reference coordinates: rows of `points` are (x,y)
// on the reference triangle {(0,0),(1,0),(0,1)}, or (s,0) with s in [0,1]
// for edge rules. Weights sum to the reference measure.
struct QuadratureRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> points;
  Vector weights;
  int degree = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

QuadratureRule quadrature_triangle(int min_degree);
QuadratureRule quadrature_edge(int min_degree);

// Physical basis functions on one cell. Vector-valued bases (BDM1, RT0)
// are affine fields value(x) = a + G x obtained from the reference dual
// basis by the contravariant Piola map, with per-edge sign/orientation
// corrections so that each function is dual to the mean edge moments
//   dof_{e,0}(v) = (1/|e|) int_e v.n_e ds,
//   dof_{e,1}(v) = (1/|e|) int_e v.n_e (2s-1) ds   (BDM1 only),
// where s parameterizes the edge from its lower to higher vertex id.
struct CellBasis {
  Space space = Space::P0;
  int cell = -1;
  int ndofs = 0;

  // Affine representation per dof; for P0 only `constant` is used.
  std::vector<Vector2> a;
  std::vector<Matrix2> G;

  Vector2 value(int dof, const Vector2 &x) const { return a[dof] + G[dof] * x; }
  double divergence(int dof) const { return G[dof].trace(); }
  Matrix2 gradient(int dof) const { return G[dof]; }
  Matrix2 symmetric_gradient(int dof) const {
    return 0.5 * (G[dof] + G[dof].transpose());
  }
};

CellBasis cell_basis(Space space, const TriMesh &mesh, int cell);

// Tabulated basis data at the quadrature points of a physical cell.
struct ElementTabulation {
  Space space = Space::P0;
  int cell = -1;
  int ndofs = 0;
  // values[q] is ndofs x 2 for vector spaces, ndofs x 1 for P0.
  std::vector<Matrix> values;
  // Constant per cell for BDM1/RT0; empty for P0.
  Vector divergence;
  Vector quad_weights; // physical weights (reference weights x 2|T|)
};

ElementTabulation tabulate(Space space, const TriMesh &mesh, int cell,
                           const QuadratureRule &rule);

// Mean edge moments of an analytic field, i.e. the interpolation dofs of
// the given H(div) space. `field` is evaluated at physical points.
template <class F>
Vector interpolate_hdiv(Space space, const TriMesh &mesh, const F &field) {
  const int per_edge = space == Space::BDM1 ? 2 : 1;
  const QuadratureRule rule = quadrature_edge(5);
  Vector dofs = Vector::Zero(per_edge * mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Vector2 A = mesh.vertices[mesh.edges[e][0]];
    const Vector2 B = mesh.vertices[mesh.edges[e][1]];
    const Vector2 n = mesh.edge_normal(e);
    for (int q = 0; q < rule.size(); ++q) {
      const double s = rule.points(q, 0);
      const Vector2 x = A + s * (B - A);
      const double vn = field(x).dot(n);
      dofs[per_edge * e] += rule.weights[q] * vn;
      if (per_edge == 2)
        dofs[per_edge * e + 1] += rule.weights[q] * vn * (2.0 * s - 1.0);
    }
  }
  return dofs;
}

} // namespace mpet
