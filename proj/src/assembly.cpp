#include "mpet/assembly.hpp"

#include "mpet/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mpet {

namespace {

std::vector<char> constrained_mask(const TriMesh &mesh,
                                   const BoundarySpec &bc) {
  std::vector<char> mask(2 * mesh.num_edges(), 0);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const int tag = mesh.edge_boundary_tag[e];
    if (tag >= 0 && bc.clamped_tag(tag)) {
      mask[2 * e] = 1;
      mask[2 * e + 1] = 1;
    }
  }
  return mask;
}

SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> &t) {
  SparseMatrix A(rows, cols);
  A.setFromTriplets(t.begin(), t.end());
  A.prune(0.0, 0.0);
  A.makeCompressed();
  return A;
}

void filter_masked(std::vector<Triplet> &t, const std::vector<char> &mask,
                   bool mask_rows, bool mask_cols) {
  std::erase_if(t, [&](const Triplet &entry) {
    return (mask_rows && mask[entry.row()]) ||
           (mask_cols && mask[entry.col()]);
  });
}

// Face contributions of the DG elasticity form on one edge. `use_eps`
// selects the symmetric gradient (a_h) versus the full gradient with a
// pure h_e^{-1} penalty (the 1,h norm matrix).
struct FaceWork {
  std::vector<int> dofs;            // global BDM1 dofs touched
  Matrix local;                     // dense local block
};

FaceWork face_terms(const TriMesh &mesh, int e, double eta, bool use_eps,
                    bool consistency_terms) {
  const int cplus = mesh.edge_cells[e][0];
  const int cminus = mesh.edge_cells[e][1];
  const bool interior = cplus >= 0 && cminus >= 0;
  const Vector2 n_e = mesh.edge_normal(e);
  const double len = mesh.edge_length(e);
  const Vector2 A = mesh.vertices[mesh.edges[e][0]];
  const Vector2 Bv = mesh.vertices[mesh.edges[e][1]];
  const QuadratureRule rule = quadrature_edge(5);

  struct Side {
    int cell;
    double jump_sign;
    double avg_weight;
    Vector2 n_avg;
  };
  std::vector<Side> sides;
  if (interior) {
    sides.push_back({cplus, +1.0, 0.5, n_e});
    sides.push_back({cminus, -1.0, 0.5, n_e});
  } else {
    const int cell = cplus >= 0 ? cplus : cminus;
    const double sigma = cplus >= 0 ? 1.0 : -1.0;
    sides.push_back({cell, 1.0, 1.0, sigma * n_e});
  }

  FaceWork work;
  std::vector<Vector2> stress_n; // {grad-like}(phi) . n, constant per dof
  std::vector<std::vector<Vector2>> jump_t(rule.size());

  for (const Side &side : sides) {
    const CellBasis basis = cell_basis(Space::BDM1, mesh, side.cell);
    for (int d = 0; d < basis.ndofs; ++d) {
      const auto [edge_id, sign] = mesh.cell_edges[side.cell][d / 2];
      (void)sign;
      const int g = 2 * edge_id + (d % 2);
      int local = -1;
      for (int k = 0; k < int(work.dofs.size()); ++k)
        if (work.dofs[k] == g)
          local = k;
      if (local < 0) {
        local = int(work.dofs.size());
        work.dofs.push_back(g);
        stress_n.push_back(Vector2::Zero());
        for (int q = 0; q < rule.size(); ++q)
          jump_t[q].push_back(Vector2::Zero());
      }
      const Matrix2 Gd =
          use_eps ? basis.symmetric_gradient(d) : basis.gradient(d);
      stress_n[local] += side.avg_weight * (Gd * side.n_avg);
      for (int q = 0; q < rule.size(); ++q) {
        const Vector2 x = A + rule.points(q, 0) * (Bv - A);
        const Vector2 val = basis.value(d, x);
        const Vector2 jt = val - val.dot(n_e) * n_e;
        jump_t[q][local] += side.jump_sign * jt;
      }
    }
  }

  const int nd = int(work.dofs.size());
  work.local = Matrix::Zero(nd, nd);
  for (int q = 0; q < rule.size(); ++q) {
    const double w = rule.weights[q] * len;
    for (int a = 0; a < nd; ++a)
      for (int b = 0; b < nd; ++b) {
        double value = (eta / len) * jump_t[q][a].dot(jump_t[q][b]);
        if (consistency_terms)
          value -= stress_n[b].dot(jump_t[q][a]) +
                   stress_n[a].dot(jump_t[q][b]);
        work.local(a, b) += w * value;
      }
  }
  return work;
}

bool face_edge_active(const TriMesh &mesh, int e, const BoundarySpec &bc) {
  const int tag = mesh.edge_boundary_tag[e];
  return tag < 0 || bc.clamped_tag(tag);
}

} // namespace

ElasticityBlocks assemble_elasticity(const TriMesh &mesh, double lambda,
                                     double eta, const BoundarySpec &bc) {
  if (!(eta > 0))
    throw std::invalid_argument("assemble_elasticity: eta must be positive");

  const int nu = 2 * mesh.num_edges();
  const std::vector<char> mask = constrained_mask(mesh, bc);
  std::vector<Triplet> t_ah, t_dd;
  Vector rhs_u = Vector::Zero(nu);

  // Cell terms: eps(u):eps(w) and div u div w, exact for linear fields.
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis basis = cell_basis(Space::BDM1, mesh, c);
    const double area = mesh.cell_area(c);
    std::array<int, 6> g;
    for (int d = 0; d < 6; ++d)
      g[d] = 2 * mesh.cell_edges[c][d / 2].first + (d % 2);
    for (int a = 0; a < 6; ++a) {
      const Matrix2 eps_a = basis.symmetric_gradient(a);
      for (int b = 0; b < 6; ++b) {
        const Matrix2 eps_b = basis.symmetric_gradient(b);
        t_ah.emplace_back(g[a], g[b],
                          area * (eps_a.array() * eps_b.array()).sum());
        t_dd.emplace_back(g[a], g[b],
                          area * basis.divergence(a) * basis.divergence(b));
      }
    }
    if (!bc.body_force.isZero(0.0)) {
      const QuadratureRule rule = quadrature_triangle(4);
      const ElementTabulation tab = tabulate(Space::BDM1, mesh, c, rule);
      for (int q = 0; q < rule.size(); ++q)
        for (int d = 0; d < 6; ++d)
          rhs_u[g[d]] += tab.quad_weights[q] *
                         bc.body_force.dot(tab.values[q].row(d));
    }
  }

  // Interior and clamped-boundary face terms of a_h.
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!face_edge_active(mesh, e, bc))
      continue;
    const FaceWork work = face_terms(mesh, e, eta, true, true);
    const int nd = int(work.dofs.size());
    for (int a = 0; a < nd; ++a)
      for (int b = 0; b < nd; ++b)
        t_ah.emplace_back(work.dofs[a], work.dofs[b], work.local(a, b));
  }

  // Traction data on non-clamped boundary sides.
  const QuadratureRule edge_rule = quadrature_edge(5);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const int tag = mesh.edge_boundary_tag[e];
    if (tag < 0 || bc.clamped_tag(tag))
      continue;
    const Vector2 traction = bc.traction[size_t(tag)];
    if (traction.isZero(0.0))
      continue;
    const int cell = std::max(mesh.edge_cells[e][0], mesh.edge_cells[e][1]);
    const CellBasis basis = cell_basis(Space::BDM1, mesh, cell);
    const Vector2 A = mesh.vertices[mesh.edges[e][0]];
    const Vector2 B = mesh.vertices[mesh.edges[e][1]];
    const double len = mesh.edge_length(e);
    for (int d = 0; d < 6; ++d) {
      const int g = 2 * mesh.cell_edges[cell][d / 2].first + (d % 2);
      for (int q = 0; q < edge_rule.size(); ++q) {
        const Vector2 x = A + edge_rule.points(q, 0) * (B - A);
        rhs_u[g] += edge_rule.weights[q] * len * traction.dot(basis.value(d, x));
      }
    }
  }

  ElasticityBlocks blocks;
  filter_masked(t_ah, mask, true, true);
  filter_masked(t_dd, mask, true, true);
  blocks.A_h = from_triplets(nu, nu, t_ah);
  blocks.DivDiv = from_triplets(nu, nu, t_dd);

  std::vector<Triplet> t_uu;
  t_uu.reserve(t_ah.size() + t_dd.size() + nu);
  for (const Triplet &entry : t_ah)
    t_uu.push_back(entry);
  for (const Triplet &entry : t_dd)
    t_uu.emplace_back(entry.row(), entry.col(), lambda * entry.value());
  for (int d = 0; d < nu; ++d)
    if (mask[d]) {
      t_uu.emplace_back(d, d, 1.0);
      rhs_u[d] = 0.0;
      blocks.constrained.push_back(d);
    }
  blocks.A_uu = from_triplets(nu, nu, t_uu);
  blocks.rhs_u = rhs_u;
  return blocks;
}

SparseMatrix assemble_divergence(const TriMesh &mesh, Space space) {
  const int per_edge = space == Space::BDM1 ? 2 : 1;
  std::vector<Triplet> t;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis basis = cell_basis(space, mesh, c);
    const double area = mesh.cell_area(c);
    for (int d = 0; d < basis.ndofs; ++d) {
      const int g = per_edge * mesh.cell_edges[c][d / per_edge].first +
                    (d % per_edge);
      t.emplace_back(c, g, area * basis.divergence(d));
    }
  }
  return from_triplets(mesh.num_cells(), per_edge * mesh.num_edges(), t);
}

FluxBlocks assemble_flux_blocks(const TriMesh &mesh, const RescaledModel &m,
                                const BoundarySpec &bc) {
  const int E = mesh.num_edges();
  FluxBlocks blocks;

  std::vector<Triplet> t_mass;
  const QuadratureRule rule = quadrature_triangle(4);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const ElementTabulation tab = tabulate(Space::RT0, mesh, c, rule);
    std::array<int, 3> g;
    for (int d = 0; d < 3; ++d)
      g[d] = mesh.cell_edges[c][d].first;
    Matrix local = Matrix::Zero(3, 3);
    for (int q = 0; q < rule.size(); ++q)
      local += tab.quad_weights[q] * tab.values[q] * tab.values[q].transpose();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        t_mass.emplace_back(g[a], g[b], local(a, b));
  }
  const SparseMatrix mass = from_triplets(E, E, t_mass);

  blocks.M_v.reserve(m.n);
  for (int i = 0; i < m.n; ++i)
    blocks.M_v.push_back(SparseMatrix(m.Rinv[i] * mass));

  blocks.Dv = assemble_divergence(mesh, Space::RT0);

  if (bc.dirichlet_pressure.size() > 0 &&
      (bc.dirichlet_pressure.rows() != m.n || bc.dirichlet_pressure.cols() != 4))
    throw std::invalid_argument("assemble_flux_blocks: dirichlet_pressure "
                                "must be n x 4");
  blocks.rhs_v.assign(m.n, Vector::Zero(E));
  for (int e = 0; e < E; ++e) {
    const int tag = mesh.edge_boundary_tag[e];
    if (tag < 0)
      continue;
    const double sigma = mesh.edge_cells[e][0] >= 0 ? 1.0 : -1.0;
    const double len = mesh.edge_length(e);
    for (int i = 0; i < m.n; ++i) {
      const double pd = bc.dirichlet_pressure.size() > 0
                            ? bc.dirichlet_pressure(i, tag)
                            : 0.0;
      blocks.rhs_v[i][e] -= pd * sigma * len;
    }
  }
  return blocks;
}

SparseMatrix assemble_pressure_block(const TriMesh &mesh, const Matrix &M) {
  if (M.rows() != M.cols())
    throw std::invalid_argument("assemble_pressure_block: M must be square");
  const int n = int(M.rows());
  const int C = mesh.num_cells();
  std::vector<Triplet> t;
  t.reserve(size_t(n) * n * C);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (M(i, j) == 0.0)
        continue;
      for (int c = 0; c < C; ++c)
        t.emplace_back(i * C + c, j * C + c, M(i, j) * mesh.cell_area(c));
    }
  return from_triplets(n * C, n * C, t);
}

SparseMatrix assemble_u_norm_matrix(const TriMesh &mesh,
                                    const BoundarySpec &bc) {
  const int nu = 2 * mesh.num_edges();
  const std::vector<char> mask = constrained_mask(mesh, bc);
  std::vector<Triplet> t;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis basis = cell_basis(Space::BDM1, mesh, c);
    const double area = mesh.cell_area(c);
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) {
        const int ga = 2 * mesh.cell_edges[c][a / 2].first + (a % 2);
        const int gb = 2 * mesh.cell_edges[c][b / 2].first + (b % 2);
        t.emplace_back(
            ga, gb,
            area * (basis.gradient(a).array() * basis.gradient(b).array())
                       .sum());
      }
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!face_edge_active(mesh, e, bc))
      continue;
    const FaceWork work = face_terms(mesh, e, 1.0, false, false);
    for (int a = 0; a < int(work.dofs.size()); ++a)
      for (int b = 0; b < int(work.dofs.size()); ++b)
        t.emplace_back(work.dofs[a], work.dofs[b], work.local(a, b));
  }
  filter_masked(t, mask, true, true);
  return from_triplets(nu, nu, t);
}

BlockSystem assemble_full(const TriMesh &mesh, const RescaledModel &m,
                          const BoundarySpec &bc,
                          const ElasticityBlocks *pre) {
  BlockSystem sys;
  sys.layout = DofLayout{m.n, mesh.num_edges(), mesh.num_cells()};
  sys.model = m;

  ElasticityBlocks elasticity =
      pre ? *pre : assemble_elasticity(mesh, m, bc);
  sys.A_h = std::move(elasticity.A_h);
  sys.DivDiv = std::move(elasticity.DivDiv);
  sys.A_uu = std::move(elasticity.A_uu);
  sys.constrained = std::move(elasticity.constrained);

  FluxBlocks flux = assemble_flux_blocks(mesh, m, bc);
  sys.M_v = std::move(flux.M_v);
  sys.Dv = std::move(flux.Dv);

  sys.Du = assemble_divergence(mesh, Space::BDM1);
  {
    // Strongly constrained displacement dofs drop out of the coupling.
    std::vector<Triplet> t;
    const std::vector<char> mask = constrained_mask(mesh, bc);
    for (int r = 0; r < sys.Du.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(sys.Du, r); it; ++it)
        if (!mask[it.col()])
          t.emplace_back(int(it.row()), int(it.col()), it.value());
    sys.Du = from_triplets(int(sys.Du.rows()), int(sys.Du.cols()), t);
  }

  sys.C_pp = assemble_pressure_block(mesh, m.Lambda1 + m.Lambda2);

  sys.cell_area.resize(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c)
    sys.cell_area[c] = mesh.cell_area(c);

  sys.rhs = Vector::Zero(sys.layout.total());
  sys.rhs.segment(0, sys.layout.u_size()) = elasticity.rhs_u;
  for (int i = 0; i < m.n; ++i)
    sys.rhs.segment(sys.layout.v_offset(i), sys.layout.E) = flux.rhs_v[i];
  if (bc.source.size() > 0) {
    if (bc.source.size() != m.n)
      throw std::invalid_argument("assemble_full: source size mismatch");
    for (int i = 0; i < m.n; ++i)
      sys.rhs.segment(sys.layout.p_offset(i), sys.layout.C) =
          bc.source[i] * sys.cell_area;
  }
  return sys;
}

SparseMatrix monolithic_matrix(const BlockSystem &sys) {
  const DofLayout &layout = sys.layout;
  std::vector<Triplet> t;
  auto add_block = [&t](const SparseMatrix &A, int row0, int col0,
                        double scale) {
    for (int r = 0; r < A.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(A, r); it; ++it)
        t.emplace_back(row0 + int(it.row()), col0 + int(it.col()),
                       scale * it.value());
  };
  auto add_block_transposed = [&t](const SparseMatrix &A, int row0, int col0,
                                   double scale) {
    for (int r = 0; r < A.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(A, r); it; ++it)
        t.emplace_back(row0 + int(it.col()), col0 + int(it.row()),
                       scale * it.value());
  };

  add_block(sys.A_uu, 0, 0, 1.0);
  for (int i = 0; i < layout.n; ++i) {
    add_block(sys.M_v[i], layout.v_offset(i), layout.v_offset(i), 1.0);
    add_block(sys.Du, layout.p_offset(i), 0, -1.0);
    add_block_transposed(sys.Du, 0, layout.p_offset(i), -1.0);
    add_block(sys.Dv, layout.p_offset(i), layout.v_offset(i), -1.0);
    add_block_transposed(sys.Dv, layout.v_offset(i), layout.p_offset(i), -1.0);
  }
  add_block(sys.C_pp, layout.p_offset(0), layout.p_offset(0), -1.0);

  SparseMatrix A(layout.total(), layout.total());
  A.setFromTriplets(t.begin(), t.end());
  A.prune(0.0, 0.0);
  A.makeCompressed();
  return A;
}

Vector monolithic_apply(const BlockSystem &sys, const Vector &x) {
  const DofLayout &layout = sys.layout;
  if (x.size() != layout.total())
    throw std::invalid_argument("monolithic_apply: dimension mismatch");
  Vector y = Vector::Zero(layout.total());
  const auto u = x.segment(0, layout.u_size());
  y.segment(0, layout.u_size()) = sys.A_uu * u;
  for (int i = 0; i < layout.n; ++i) {
    const auto vi = x.segment(layout.v_offset(i), layout.E);
    const auto pi = x.segment(layout.p_offset(i), layout.C);
    y.segment(0, layout.u_size()) -= sys.Du.transpose() * pi;
    y.segment(layout.v_offset(i), layout.E) =
        sys.M_v[i] * vi - sys.Dv.transpose() * pi;
    y.segment(layout.p_offset(i), layout.C) = -(sys.Du * u) - sys.Dv * vi;
  }
  y.segment(layout.p_offset(0), layout.n * layout.C) -=
      sys.C_pp * x.segment(layout.p_offset(0), layout.n * layout.C);
  return y;
}

namespace {

void accumulate_rows(std::vector<Compensated> &acc, const SparseMatrix &A,
                     const Vector &x, int row0, double scale) {
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      acc[size_t(row0 + it.row())].add_product(scale * it.value(),
                                               x[it.col()]);
}

void accumulate_rows_transposed(std::vector<Compensated> &acc,
                                const SparseMatrix &A, const Vector &x,
                                int row0, double scale) {
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      acc[size_t(row0 + it.col())].add_product(scale * it.value(),
                                               x[it.row()]);
}

} // namespace

Vector monolithic_residual(const BlockSystem &sys, const Vector &x) {
  const DofLayout &layout = sys.layout;
  if (x.size() != layout.total())
    throw std::invalid_argument("monolithic_residual: dimension mismatch");
  std::vector<Compensated> acc(size_t(layout.total()));
  for (int i = 0; i < layout.total(); ++i)
    acc[size_t(i)].add(sys.rhs[i]);

  const Vector u = x.segment(0, layout.u_size());
  accumulate_rows(acc, sys.A_uu, u, 0, -1.0);
  for (int i = 0; i < layout.n; ++i) {
    const Vector vi = x.segment(layout.v_offset(i), layout.E);
    const Vector pi = x.segment(layout.p_offset(i), layout.C);
    accumulate_rows_transposed(acc, sys.Du, pi, 0, 1.0);
    accumulate_rows(acc, sys.M_v[i], vi, layout.v_offset(i), -1.0);
    accumulate_rows_transposed(acc, sys.Dv, pi, layout.v_offset(i), 1.0);
    accumulate_rows(acc, sys.Du, u, layout.p_offset(i), 1.0);
    accumulate_rows(acc, sys.Dv, vi, layout.p_offset(i), 1.0);
  }
  const Vector p = x.segment(layout.p_offset(0), layout.n * layout.C);
  accumulate_rows(acc, sys.C_pp, p, layout.p_offset(0), 1.0);

  Vector r(layout.total());
  for (int i = 0; i < layout.total(); ++i)
    r[i] = acc[size_t(i)].value();
  return r;
}

void export_matrix(const SparseMatrix &A, std::ostream &os) {
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

} // namespace mpet
