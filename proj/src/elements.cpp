#include "mpet/elements.hpp"

#include <cmath>
#include <stdexcept>

namespace mpet {

namespace {

constexpr int kLocalEdgeVertices[3][2] = {{1, 2}, {0, 2}, {0, 1}};

// Reference triangle {(0,0),(1,0),(0,1)}; local edge j is opposite vertex j.
const Vector2 kRefVertex[3] = {Vector2(0, 0), Vector2(1, 0), Vector2(0, 1)};

struct RefEdge {
  Vector2 start, dir, normal; // outward unit normal
  double length;
};

const RefEdge kRefEdge[3] = {
    {Vector2(1, 0), Vector2(-1, 1), Vector2(1, 1).normalized(),
     std::sqrt(2.0)},
    {Vector2(0, 0), Vector2(0, 1), Vector2(-1, 0), 1.0},
    {Vector2(0, 0), Vector2(1, 0), Vector2(0, -1), 1.0},
};

QuadratureRule make_triangle_rule(
    int degree, const std::vector<std::array<double, 3>> &groups) {
  // Each group is (a, b, normalized weight); points are the distinct
  // permutations of the barycentric coordinates (a, b, 1-a-b).
  std::vector<Vector2> pts;
  std::vector<double> wts;
  for (const auto &[a, b, w] : groups) {
    const double c = 1.0 - a - b;
    std::vector<std::array<double, 3>> perms = {{a, b, c}, {b, c, a},
                                                {c, a, b}, {a, c, b},
                                                {b, a, c}, {c, b, a}};
    std::vector<std::array<double, 3>> unique;
    for (const auto &p : perms) {
      bool seen = false;
      for (const auto &u : unique)
        seen = seen || (std::abs(p[0] - u[0]) < 1e-14 &&
                        std::abs(p[1] - u[1]) < 1e-14);
      if (!seen)
        unique.push_back(p);
    }
    for (const auto &p : unique) {
      pts.emplace_back(p[1], p[2]); // barycentric (l0,l1,l2) -> (x,y)=(l1,l2)
      wts.push_back(w * 0.5);       // reference triangle measure 1/2
    }
  }
  QuadratureRule rule;
  rule.degree = degree;
  rule.points.resize(int(pts.size()), 2);
  rule.weights.resize(int(pts.size()));
  for (int i = 0; i < int(pts.size()); ++i) {
    rule.points.row(i) = pts[i].transpose();
    rule.weights[i] = wts[i];
  }
  return rule;
}

} // namespace

QuadratureRule quadrature_triangle(int min_degree) {
  if (min_degree < 1 || min_degree > 6)
    throw std::invalid_argument("quadrature_triangle: degree must be in 1..6");
  if (min_degree == 1) {
    const double third = 1.0 / 3.0;
    return make_triangle_rule(1, {{third, third, 1.0}});
  }
  if (min_degree == 2) {
    const double a = 1.0 / 6.0, b = 2.0 / 3.0;
    return make_triangle_rule(2, {{a, b, 1.0 / 3.0}});
  }
  if (min_degree <= 4) {
    return make_triangle_rule(
        4, {{0.108103018168070, 0.445948490915965, 0.223381589678011},
            {0.816847572980459, 0.091576213509771, 0.109951743655322}});
  }
  return make_triangle_rule(
      6, {{0.501426509658179, 0.249286745170910, 0.116786275726379},
          {0.873821971016996, 0.063089014491502, 0.050844906370207},
          {0.053145049844816, 0.310352451033785, 0.082851075618374}});
}

QuadratureRule quadrature_edge(int min_degree) {
  if (min_degree < 1 || min_degree > 6)
    throw std::invalid_argument("quadrature_edge: degree must be in 1..6");
  std::vector<double> nodes, weights; // on [-1,1]
  if (min_degree == 1) {
    nodes = {0.0};
    weights = {2.0};
  } else if (min_degree <= 3) {
    const double g = 1.0 / std::sqrt(3.0);
    nodes = {-g, g};
    weights = {1.0, 1.0};
  } else if (min_degree <= 5) {
    const double g = std::sqrt(3.0 / 5.0);
    nodes = {-g, 0.0, g};
    weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  } else {
    nodes = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
             0.8611363115940526};
    weights = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
               0.3478548451374538};
  }
  QuadratureRule rule;
  rule.degree = min_degree == 1 ? 1 : (min_degree <= 3 ? 3 : (min_degree <= 5 ? 5 : 7));
  rule.points.setZero(int(nodes.size()), 2);
  rule.weights.resize(int(nodes.size()));
  for (int i = 0; i < int(nodes.size()); ++i) {
    rule.points(i, 0) = 0.5 * (nodes[i] + 1.0); // map to [0,1]
    rule.weights[i] = 0.5 * weights[i];
  }
  return rule;
}

namespace {

// Reference dual bases in the monomial basis
// {(1,0),(x,0),(y,0),(0,1),(0,x),(0,y)}, computed once. Row r of the
// returned matrix holds the coefficients of reference basis function r.
Matrix reference_bdm1_coefficients() {
  auto monomial = [](int m, const Vector2 &x) -> Vector2 {
    switch (m) {
    case 0: return {1.0, 0.0};
    case 1: return {x.x(), 0.0};
    case 2: return {x.y(), 0.0};
    case 3: return {0.0, 1.0};
    case 4: return {0.0, x.x()};
    default: return {0.0, x.y()};
    }
  };
  const QuadratureRule rule = quadrature_edge(5);
  Matrix M = Matrix::Zero(6, 6); // rows: dof (j,mu); cols: monomial
  for (int j = 0; j < 3; ++j) {
    const RefEdge &edge = kRefEdge[j];
    for (int q = 0; q < rule.size(); ++q) {
      const double t = rule.points(q, 0);
      const Vector2 x = edge.start + t * edge.dir;
      const double w = rule.weights[q] * edge.length;
      for (int m = 0; m < 6; ++m) {
        const double vn = monomial(m, x).dot(edge.normal);
        M(2 * j, m) += w * vn;
        M(2 * j + 1, m) += w * vn * (2.0 * t - 1.0);
      }
    }
  }
  return M.inverse().transpose();
}

const Matrix &bdm1_coefficients() {
  static const Matrix coeffs = reference_bdm1_coefficients();
  return coeffs;
}

} // namespace

CellBasis cell_basis(Space space, const TriMesh &mesh, int cell) {
  CellBasis basis;
  basis.space = space;
  basis.cell = cell;

  if (space == Space::P0) {
    basis.ndofs = 1;
    return basis;
  }

  const Vector2 P0 = mesh.vertices[mesh.cells[cell][0]];
  const Vector2 P1 = mesh.vertices[mesh.cells[cell][1]];
  const Vector2 P2 = mesh.vertices[mesh.cells[cell][2]];
  Matrix2 B;
  B.col(0) = P1 - P0;
  B.col(1) = P2 - P0;
  const double detB = B.determinant();
  if (detB <= 1e-300)
    throw std::invalid_argument("cell_basis: degenerate cell");
  const Matrix2 Binv = B.inverse();

  const int per_edge = space == Space::BDM1 ? 2 : 1;
  basis.ndofs = 3 * per_edge;
  basis.a.resize(basis.ndofs);
  basis.G.resize(basis.ndofs);

  for (int j = 0; j < 3; ++j) {
    const auto [e, sign] = mesh.cell_edges[cell][j];
    const double len = mesh.edge_length(e);
    const int ga = mesh.cells[cell][kLocalEdgeVertices[j][0]];
    const int gb = mesh.cells[cell][kLocalEdgeVertices[j][1]];
    const double flip = ga < gb ? 1.0 : -1.0;

    for (int mu = 0; mu < per_edge; ++mu) {
      // Reference affine field a_hat + G_hat x_hat for this dof.
      Vector2 a_hat;
      Matrix2 G_hat;
      if (space == Space::RT0) {
        a_hat = -kRefVertex[j];
        G_hat = Matrix2::Identity();
      } else {
        const Vector ref = bdm1_coefficients().row(2 * j + mu);
        a_hat = Vector2(ref[0], ref[3]);
        G_hat << ref[1], ref[2], ref[4], ref[5];
      }
      const double factor =
          (mu == 1 ? sign * flip : double(sign)) * len / detB;
      const Matrix2 G = factor * B * G_hat * Binv;
      const Vector2 a = factor * B * a_hat - G * P0;
      basis.a[j * per_edge + mu] = a;
      basis.G[j * per_edge + mu] = G;
    }
  }
  return basis;
}

ElementTabulation tabulate(Space space, const TriMesh &mesh, int cell,
                           const QuadratureRule &rule) {
  const CellBasis basis = cell_basis(space, mesh, cell);
  const Vector2 P0 = mesh.vertices[mesh.cells[cell][0]];
  Matrix2 B;
  B.col(0) = mesh.vertices[mesh.cells[cell][1]] - P0;
  B.col(1) = mesh.vertices[mesh.cells[cell][2]] - P0;
  const double detB = B.determinant();

  ElementTabulation tab;
  tab.space = space;
  tab.cell = cell;
  tab.ndofs = space == Space::P0 ? 1 : basis.ndofs;
  tab.values.resize(rule.size());
  tab.quad_weights = rule.weights * detB;

  if (space == Space::P0) {
    for (int q = 0; q < rule.size(); ++q)
      tab.values[q] = Matrix::Ones(1, 1);
    return tab;
  }

  tab.divergence.resize(basis.ndofs);
  for (int d = 0; d < basis.ndofs; ++d)
    tab.divergence[d] = basis.divergence(d);
  for (int q = 0; q < rule.size(); ++q) {
    const Vector2 x = P0 + B * rule.points.row(q).transpose();
    Matrix vals(basis.ndofs, 2);
    for (int d = 0; d < basis.ndofs; ++d)
      vals.row(d) = basis.value(d, x).transpose();
    tab.values[q] = vals;
  }
  return tab;
}

} // namespace mpet
