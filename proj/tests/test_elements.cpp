#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mpet/elements.hpp"

using namespace mpet;

namespace {

// Exact integral of x^p y^q over the reference triangle.
double tri_monomial_integral(int p, int q) {
  auto factorial = [](int k) {
    double f = 1;
    for (int i = 2; i <= k; ++i)
      f *= i;
    return f;
  };
  return factorial(p) * factorial(q) / factorial(p + q + 2);
}

} // namespace

TEST_CASE("triangle quadrature integrates monomials exactly") {
  for (int degree = 1; degree <= 6; ++degree) {
    const QuadratureRule rule = quadrature_triangle(degree);
    CHECK(rule.degree >= degree);
    CHECK((rule.weights.array() > 0).all());
    CHECK(rule.weights.sum() == doctest::Approx(0.5).epsilon(1e-14));
    for (int p = 0; p <= rule.degree; ++p)
      for (int q = 0; p + q <= rule.degree; ++q) {
        double value = 0;
        for (int i = 0; i < rule.size(); ++i)
          value += rule.weights[i] * std::pow(rule.points(i, 0), p) *
                   std::pow(rule.points(i, 1), q);
        const double exact = tri_monomial_integral(p, q);
        CHECK(value == doctest::Approx(exact).epsilon(1e-14));
      }
  }
}

TEST_CASE("triangle rule sizes and anchors") {
  CHECK(quadrature_triangle(1).size() == 1);
  CHECK(quadrature_triangle(1).weights[0] == doctest::Approx(0.5));
  CHECK(quadrature_triangle(2).size() == 3);
  CHECK(quadrature_triangle(4).size() == 6);
  // int x^4 over the reference triangle = 1/30
  const QuadratureRule rule = quadrature_triangle(4);
  double value = 0;
  for (int i = 0; i < rule.size(); ++i)
    value += rule.weights[i] * std::pow(rule.points(i, 0), 4);
  CHECK(value == doctest::Approx(1.0 / 30.0).epsilon(1e-14));
  CHECK_THROWS_AS(quadrature_triangle(7), std::invalid_argument);
  CHECK_THROWS_AS(quadrature_triangle(0), std::invalid_argument);
}

TEST_CASE("edge quadrature") {
  SUBCASE("midpoint rule") {
    const QuadratureRule rule = quadrature_edge(1);
    CHECK(rule.size() == 1);
    CHECK(rule.points(0, 0) == doctest::Approx(0.5));
    CHECK(rule.weights[0] == doctest::Approx(1.0));
  }
  SUBCASE("two-point Gauss integrates s^3") {
    const QuadratureRule rule = quadrature_edge(3);
    CHECK(rule.size() == 2);
    double value = 0;
    for (int i = 0; i < rule.size(); ++i)
      value += rule.weights[i] * std::pow(rule.points(i, 0), 3);
    CHECK(value == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("three-point Gauss integrates s^5") {
    const QuadratureRule rule = quadrature_edge(5);
    CHECK(rule.size() == 3);
    double value = 0;
    for (int i = 0; i < rule.size(); ++i)
      value += rule.weights[i] * std::pow(rule.points(i, 0), 5);
    CHECK(value == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  }
  SUBCASE("monomial exactness up to the declared degree") {
    for (int degree = 1; degree <= 6; ++degree) {
      const QuadratureRule rule = quadrature_edge(degree);
      for (int p = 0; p <= rule.degree; ++p) {
        double value = 0;
        for (int i = 0; i < rule.size(); ++i)
          value += rule.weights[i] * std::pow(rule.points(i, 0), p);
        CHECK(value == doctest::Approx(1.0 / (p + 1)).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("RT0 divergence follows the sign |e|/|T| pattern") {
  const TriMesh mesh = build_unit_square_mesh(3);
  for (int c : {0, 1, 7}) {
    const CellBasis basis = cell_basis(Space::RT0, mesh, c);
    const double area = mesh.cell_area(c);
    for (int d = 0; d < 3; ++d) {
      const auto [e, sign] = mesh.cell_edges[c][d];
      CHECK(basis.divergence(d) ==
            doctest::Approx(sign * mesh.edge_length(e) / area).epsilon(1e-13));
    }
  }
}

TEST_CASE("P0 basis is the constant one") {
  const TriMesh mesh = build_unit_square_mesh(1);
  const QuadratureRule rule = quadrature_triangle(2);
  const ElementTabulation tab = tabulate(Space::P0, mesh, 0, rule);
  CHECK(tab.ndofs == 1);
  for (int q = 0; q < rule.size(); ++q)
    CHECK(tab.values[q](0, 0) == 1.0);
  CHECK(tab.divergence.size() == 0);
}

TEST_CASE("dof duality: mean edge moments of the basis give the identity") {
  const TriMesh mesh = build_unit_square_mesh(2);
  const QuadratureRule rule = quadrature_edge(5);
  for (Space space : {Space::BDM1, Space::RT0}) {
    const int per_edge = space == Space::BDM1 ? 2 : 1;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const CellBasis basis = cell_basis(space, mesh, c);
      Matrix duality = Matrix::Zero(basis.ndofs, basis.ndofs);
      for (int j = 0; j < 3; ++j) {
        const int e = mesh.cell_edges[c][j].first;
        const Vector2 A = mesh.vertices[mesh.edges[e][0]];
        const Vector2 B = mesh.vertices[mesh.edges[e][1]];
        const Vector2 n = mesh.edge_normal(e);
        for (int q = 0; q < rule.size(); ++q) {
          const double s = rule.points(q, 0);
          const Vector2 x = A + s * (B - A);
          for (int d = 0; d < basis.ndofs; ++d) {
            const double vn = basis.value(d, x).dot(n);
            duality(per_edge * j, d) += rule.weights[q] * vn;
            if (per_edge == 2)
              duality(per_edge * j + 1, d) +=
                  rule.weights[q] * vn * (2.0 * s - 1.0);
          }
        }
      }
      CHECK((duality - Matrix::Identity(basis.ndofs, basis.ndofs))
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("normal traces are continuous across shared edges") {
  const TriMesh mesh = build_unit_square_mesh(2);
  const QuadratureRule rule = quadrature_edge(5);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.is_boundary_edge(e))
      continue;
    const int c1 = mesh.edge_cells[e][0];
    const int c2 = mesh.edge_cells[e][1];
    const Vector2 A = mesh.vertices[mesh.edges[e][0]];
    const Vector2 B = mesh.vertices[mesh.edges[e][1]];
    const Vector2 n = mesh.edge_normal(e);
    for (Space space : {Space::BDM1, Space::RT0}) {
      const int per_edge = space == Space::BDM1 ? 2 : 1;
      const CellBasis b1 = cell_basis(space, mesh, c1);
      const CellBasis b2 = cell_basis(space, mesh, c2);
      // Locate the shared edge in both cells.
      auto local_of = [&](int cell) {
        for (int j = 0; j < 3; ++j)
          if (mesh.cell_edges[cell][j].first == e)
            return j;
        return -1;
      };
      const int j1 = local_of(c1), j2 = local_of(c2);
      REQUIRE(j1 >= 0);
      REQUIRE(j2 >= 0);
      for (int mu = 0; mu < per_edge; ++mu)
        for (int q = 0; q < rule.size(); ++q) {
          const Vector2 x = A + rule.points(q, 0) * (B - A);
          const double t1 = b1.value(per_edge * j1 + mu, x).dot(n);
          const double t2 = b2.value(per_edge * j2 + mu, x).dot(n);
          CHECK(t1 == doctest::Approx(t2).epsilon(1e-12));
        }
    }
  }
}

TEST_CASE("interpolating a linear field reproduces its divergence cellwise") {
  const TriMesh mesh = build_unit_square_mesh(3);
  auto field = [](const Vector2 &x) {
    return Vector2(0.3 + 1.7 * x.x() - 0.4 * x.y(),
                   -0.2 + 0.9 * x.x() + 2.1 * x.y());
  };
  const double exact_div = 1.7 + 2.1;
  const Vector dofs = interpolate_hdiv(Space::BDM1, mesh, field);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis basis = cell_basis(Space::BDM1, mesh, c);
    double div = 0;
    for (int d = 0; d < 6; ++d) {
      const int g = 2 * mesh.cell_edges[c][d / 2].first + (d % 2);
      div += dofs[g] * basis.divergence(d);
    }
    CHECK(div == doctest::Approx(exact_div).epsilon(1e-12));
    // The interpolant reproduces the field itself (BDM1 contains P1^2).
    const Vector2 centroid = mesh.cell_centroid(c);
    Vector2 value = Vector2::Zero();
    for (int d = 0; d < 6; ++d) {
      const int g = 2 * mesh.cell_edges[c][d / 2].first + (d % 2);
      value += dofs[g] * basis.value(d, centroid);
    }
    CHECK((value - field(centroid)).norm() < 1e-12);
  }
}

TEST_CASE("degenerate cells are rejected") {
  TriMesh mesh = build_unit_square_mesh(1);
  mesh.vertices[3] = mesh.vertices[0]; // collapse a cell
  bool threw = false;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    try {
      cell_basis(Space::RT0, mesh, c);
    } catch (const std::invalid_argument &) {
      threw = true;
    }
  }
  CHECK(threw);
}
