#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "mpet/assembly.hpp"
#include "mpet/bench.hpp"

using namespace mpet;

namespace {

RescaledModel barenblatt_model(UnitMode units = UnitMode::PaperRaw,
                               double eta = 10.0) {
  return rescale(barenblatt_params(units), LMode::Paper, 0.0, eta);
}

Matrix dense(const SparseMatrix &A) { return Matrix(A); }

std::vector<int> free_dofs(const ElasticityBlocks &blocks, int nu) {
  std::set<int> constrained(blocks.constrained.begin(),
                            blocks.constrained.end());
  std::vector<int> free;
  for (int d = 0; d < nu; ++d)
    if (!constrained.count(d))
      free.push_back(d);
  return free;
}

Matrix restrict_dense(const Matrix &A, const std::vector<int> &idx) {
  Matrix out(idx.size(), idx.size());
  for (size_t i = 0; i < idx.size(); ++i)
    for (size_t j = 0; j < idx.size(); ++j)
      out(int(i), int(j)) = A(idx[i], idx[j]);
  return out;
}

} // namespace

TEST_CASE("rigid translation is in the kernel of a_h without Dirichlet sides") {
  const TriMesh mesh = build_unit_square_mesh(4);
  BoundarySpec bc; // no clamped side: only interior face terms
  const ElasticityBlocks blocks = assemble_elasticity(mesh, 1.0, 10.0, bc);
  const Vector dofs = interpolate_hdiv(Space::BDM1, mesh,
                                       [](const Vector2 &) {
                                         return Vector2(1.0, 0.0);
                                       });
  const double energy = dofs.dot(blocks.A_h * dofs);
  CHECK(std::abs(energy) < 1e-12);
  CHECK(std::abs(dofs.dot(blocks.DivDiv * dofs)) < 1e-12);
}

TEST_CASE("cell strain energy matches a finite-difference quadrature oracle") {
  const TriMesh mesh = build_unit_square_mesh(1);
  const int c = 0;
  const CellBasis basis = cell_basis(Space::BDM1, mesh, c);
  const QuadratureRule rule = quadrature_triangle(2);
  const ElementTabulation tab = tabulate(Space::BDM1, mesh, c, rule);
  const double fd = 1e-5;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      double integral = 0.0;
      for (int q = 0; q < rule.size(); ++q) {
        const Vector2 P0 = mesh.vertices[mesh.cells[c][0]];
        Matrix2 B;
        B.col(0) = mesh.vertices[mesh.cells[c][1]] - P0;
        B.col(1) = mesh.vertices[mesh.cells[c][2]] - P0;
        const Vector2 x = P0 + B * rule.points.row(q).transpose();
        auto eps_fd = [&](int d) {
          Matrix2 G;
          for (int dir = 0; dir < 2; ++dir) {
            Vector2 dx = Vector2::Zero();
            dx[dir] = fd;
            const Vector2 diff =
                (basis.value(d, x + dx) - basis.value(d, x - dx)) / (2 * fd);
            G.col(dir) = diff;
          }
          return Matrix2(0.5 * (G + G.transpose()));
        };
        integral += tab.quad_weights[q] *
                    (eps_fd(a).array() * eps_fd(b).array()).sum();
      }
      const double exact = mesh.cell_area(c) *
                           (basis.symmetric_gradient(a).array() *
                            basis.symmetric_gradient(b).array())
                               .sum();
      CHECK(integral == doctest::Approx(exact).epsilon(1e-8));
    }
}

TEST_CASE("doubling lambda changes exactly the div-div part") {
  const TriMesh mesh = build_unit_square_mesh(2);
  const BoundarySpec bc = cantilever_bc(benchmark_pressures(2));
  const ElasticityBlocks b1 = assemble_elasticity(mesh, 3.0, 10.0, bc);
  const ElasticityBlocks b2 = assemble_elasticity(mesh, 6.0, 10.0, bc);
  const Matrix diff = dense(b2.A_uu) - dense(b1.A_uu);
  const Matrix expected = 3.0 * dense(b1.DivDiv);
  CHECK((diff - expected).norm() < 1e-12 * (1.0 + expected.norm()));
}

TEST_CASE("A_uu is SPD on the unconstrained dofs") {
  const TriMesh mesh = build_unit_square_mesh(3);
  const BoundarySpec bc = cantilever_bc(benchmark_pressures(2));
  const ElasticityBlocks blocks = assemble_elasticity(mesh, 4.2, 10.0, bc);
  const Matrix A = dense(blocks.A_uu);
  CHECK((A - A.transpose()).norm() < 1e-13 * A.norm());
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("flux boundary data") {
  const TriMesh mesh = build_unit_square_mesh(2);
  const RescaledModel m = barenblatt_model();
  SUBCASE("zero Dirichlet pressure gives a zero load") {
    BoundarySpec bc = cantilever_bc(Vector::Zero(2));
    const FluxBlocks blocks = assemble_flux_blocks(mesh, m, bc);
    CHECK(blocks.rhs_v[0].norm() == 0.0);
    CHECK(blocks.rhs_v[1].norm() == 0.0);
  }
  SUBCASE("constant pressure obeys the divergence theorem") {
    const double c = 3.25;
    BoundarySpec bc = cantilever_bc(Vector::Constant(2, c));
    const FluxBlocks blocks = assemble_flux_blocks(mesh, m, bc);
    std::mt19937 rng(2);
    std::normal_distribution<double> dist;
    Vector w(mesh.num_edges());
    for (int i = 0; i < w.size(); ++i)
      w[i] = dist(rng);
    //  -c oint w.n = -c int div w, with (Dv w) holding the cell integrals.
    const double lhs = blocks.rhs_v[0].dot(w);
    const double rhs = -c * (blocks.Dv * w).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    // and exactly zero for divergence-free fields
    const Matrix Dv = dense(blocks.Dv);
    const Eigen::FullPivLU<Matrix> lu(Dv);
    const Matrix kernel = lu.kernel();
    REQUIRE(kernel.cols() > 0);
    const Vector wk = kernel.col(0);
    CHECK(std::abs(blocks.rhs_v[0].dot(wk)) < 1e-11 * wk.norm());
  }
  SUBCASE("Barenblatt values 2 and 20 land on the boundary rows") {
    BoundarySpec bc = cantilever_bc(benchmark_pressures(2));
    const FluxBlocks blocks = assemble_flux_blocks(mesh, m, bc);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      if (!mesh.is_boundary_edge(e)) {
        CHECK(blocks.rhs_v[0][e] == 0.0);
        continue;
      }
      const double sigma = mesh.edge_cells[e][0] >= 0 ? 1.0 : -1.0;
      const double len = mesh.edge_length(e);
      CHECK(blocks.rhs_v[0][e] ==
            doctest::Approx(-2.0 * sigma * len).epsilon(1e-14));
      CHECK(blocks.rhs_v[1][e] ==
            doctest::Approx(-20.0 * sigma * len).epsilon(1e-14));
    }
  }
}

TEST_CASE("pressure block") {
  SUBCASE("identity coupling on the smallest mesh") {
    const TriMesh mesh = build_unit_square_mesh(1);
    const SparseMatrix B = assemble_pressure_block(mesh, Matrix::Identity(1, 1));
    const Matrix D = dense(B);
    CHECK(D.rows() == 2);
    CHECK(D(0, 0) == doctest::Approx(0.5));
    CHECK(D(1, 1) == doctest::Approx(0.5));
    CHECK(std::abs(D(0, 1)) == 0.0);
  }
  SUBCASE("coupled block matches the dense Kronecker oracle") {
    const TriMesh mesh = build_unit_square_mesh(2);
    const RescaledModel m = barenblatt_model();
    const Matrix M = m.Lambda1 + m.Lambda2;
    const SparseMatrix B = assemble_pressure_block(mesh, M);
    const int C = mesh.num_cells();
    Matrix expected = Matrix::Zero(2 * C, 2 * C);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int c = 0; c < C; ++c)
          expected(i * C + c, j * C + c) = M(i, j) * mesh.cell_area(c);
    CHECK((dense(B) - expected).norm() < 1e-12 * expected.norm());
  }
  SUBCASE("all-ones coupling has rank one per cell") {
    const TriMesh mesh = build_unit_square_mesh(1);
    const RescaledModel m = barenblatt_model();
    const SparseMatrix B = assemble_pressure_block(mesh, m.LambdaL);
    const int C = mesh.num_cells();
    for (int c = 0; c < C; ++c) {
      Matrix cell_block(2, 2);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          cell_block(i, j) = dense(B)(i * C + c, j * C + c);
      CHECK(Eigen::FullPivLU<Matrix>(cell_block).rank() == 1);
    }
    CHECK_THROWS_AS(assemble_pressure_block(mesh, Matrix::Ones(2, 3)),
                    std::invalid_argument);
  }
}

TEST_CASE("monolithic matrix is symmetric and dimensions add up") {
  SUBCASE("two networks at N=2") {
    const TriMesh mesh = build_unit_square_mesh(2);
    const RescaledModel m = barenblatt_model();
    const BlockSystem sys =
        assemble_full(mesh, m, cantilever_bc(benchmark_pressures(2)));
    const Matrix A = dense(monolithic_matrix(sys));
    CHECK((A - A.transpose()).norm() <= 1e-13 * A.norm());
    // blockwise apply agrees with the assembled matrix
    std::mt19937 rng(4);
    std::normal_distribution<double> dist;
    Vector x(sys.layout.total());
    for (int i = 0; i < x.size(); ++i)
      x[i] = dist(rng);
    CHECK((monolithic_apply(sys, x) - A * x).norm() <
          1e-12 * (A * x).norm());
  }
  SUBCASE("four networks at N=16") {
    const TriMesh mesh = build_unit_square_mesh(16);
    const RescaledModel m =
        rescale(mpet4_params(UnitMode::Si), LMode::Paper, 0.0, 10.0);
    const BlockSystem sys =
        assemble_full(mesh, m, cantilever_bc(benchmark_pressures(4)));
    CHECK(sys.layout.E == 800);
    CHECK(sys.layout.C == 512);
    CHECK(sys.layout.total() == 2 * 800 + 4 * 800 + 4 * 512);
  }
}

TEST_CASE("zero boundary data produces zero right-hand sides") {
  const TriMesh mesh = build_unit_square_mesh(2);
  const RescaledModel m = barenblatt_model();
  BoundarySpec bc;
  bc.clamped[int(BoundaryTag::Gamma4)] = true;
  bc.dirichlet_pressure = Matrix::Zero(2, 4);
  const BlockSystem sys = assemble_full(mesh, m, bc);
  CHECK(sys.rhs.norm() == 0.0);
}

TEST_CASE("strong conservation: divergence rows are signed edge fluxes") {
  const TriMesh mesh = build_unit_square_mesh(3);
  const SparseMatrix Dv = assemble_divergence(mesh, Space::RT0);
  const Matrix D = dense(Dv);
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (const auto &[e, sign] : mesh.cell_edges[c])
      CHECK(D(c, e) ==
            doctest::Approx(sign * mesh.edge_length(e)).epsilon(1e-13));

  // BDM1: first moments carry the flux, second moments integrate to zero.
  const SparseMatrix Du = assemble_divergence(mesh, Space::BDM1);
  const Matrix DU = dense(Du);
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (const auto &[e, sign] : mesh.cell_edges[c]) {
      CHECK(DU(c, 2 * e) ==
            doctest::Approx(sign * mesh.edge_length(e)).epsilon(1e-13));
      CHECK(std::abs(DU(c, 2 * e + 1)) < 1e-13);
    }
}

TEST_CASE("a_h is coercive in the 1,h norm with a mesh-stable constant") {
  const BoundarySpec bc = cantilever_bc(benchmark_pressures(2));
  std::vector<double> alphas;
  for (int N : {2, 4, 8}) {
    const TriMesh mesh = build_unit_square_mesh(N);
    const ElasticityBlocks blocks = assemble_elasticity(mesh, 1.0, 10.0, bc);
    const SparseMatrix H = assemble_u_norm_matrix(mesh, bc);
    const std::vector<int> free = free_dofs(blocks, 2 * mesh.num_edges());
    const Matrix Af = restrict_dense(dense(blocks.A_h), free);
    const Matrix Hf = restrict_dense(dense(H), free);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(Af, Hf);
    REQUIRE(ges.info() == Eigen::Success);
    alphas.push_back(ges.eigenvalues().minCoeff());
  }
  for (double alpha : alphas)
    CHECK(alpha > 0.05);
  // mesh-independence: no collapse under refinement
  CHECK(alphas[2] > 0.5 * alphas[0]);
}

TEST_CASE("matrix export is one coordinate entry per line") {
  const TriMesh mesh = build_unit_square_mesh(1);
  const SparseMatrix Dv = assemble_divergence(mesh, Space::RT0);
  std::ostringstream os;
  export_matrix(Dv, os);
  int lines = 0;
  std::string line;
  std::istringstream is(os.str());
  while (std::getline(is, line))
    ++lines;
  CHECK(lines == Dv.nonZeros());
}
