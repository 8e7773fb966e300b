#include "mpet/verify.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace mpet {

namespace {

// ---- oracle-local quadrature and basis construction ----------------------
//
// Everything below is deliberately coded independently of the production
// assembly: Duffy (collapsed square) Gauss quadrature on the triangle,
// 4-point Gauss edge rules, and basis functions obtained by inverting the
// moment conditions in physical coordinates instead of mapping a reference
// element.

struct GaussRule {
  std::vector<double> nodes, weights; // on [0,1]
};

GaussRule gauss4() {
  const double a = 0.3399810435848563, b = 0.8611363115940526;
  const double wa = 0.6521451548625461, wb = 0.3478548451374538;
  GaussRule g;
  g.nodes = {0.5 * (1 - b), 0.5 * (1 - a), 0.5 * (1 + a), 0.5 * (1 + b)};
  g.weights = {0.5 * wb, 0.5 * wa, 0.5 * wa, 0.5 * wb};
  return g;
}

// Quadrature over a physical triangle through the Duffy transform; exact
// for polynomials up to degree 6 with the 4x4 tensor rule.
template <class F>
double duffy_integrate(const Vector2 &p0, const Vector2 &p1, const Vector2 &p2,
                       const F &f) {
  static const GaussRule g = gauss4();
  const double jac2 =
      (p1.x() - p0.x()) * (p2.y() - p0.y()) -
      (p1.y() - p0.y()) * (p2.x() - p0.x()); // = 2 |T| signed
  double total = 0.0;
  for (size_t iu = 0; iu < g.nodes.size(); ++iu)
    for (size_t iv = 0; iv < g.nodes.size(); ++iv) {
      const double u = g.nodes[iu];
      const double v = g.nodes[iv] * (1.0 - u);
      const Vector2 x = p0 + u * (p1 - p0) + v * (p2 - p0);
      total += g.weights[iu] * g.weights[iv] * (1.0 - u) * f(x);
    }
  return total * jac2;
}

Vector2 bdm_monomial(int m, const Vector2 &x) {
  switch (m) {
  case 0: return {1.0, 0.0};
  case 1: return {x.x(), 0.0};
  case 2: return {x.y(), 0.0};
  case 3: return {0.0, 1.0};
  case 4: return {0.0, x.x()};
  default: return {0.0, x.y()};
  }
}

Matrix2 bdm_monomial_gradient(int m) {
  Matrix2 G = Matrix2::Zero();
  if (m == 1) G(0, 0) = 1.0;
  if (m == 2) G(0, 1) = 1.0;
  if (m == 4) G(1, 0) = 1.0;
  if (m == 5) G(1, 1) = 1.0;
  return G;
}

Vector2 rt_monomial(int m, const Vector2 &x) {
  switch (m) {
  case 0: return {1.0, 0.0};
  case 1: return {0.0, 1.0};
  default: return {x.x(), x.y()};
  }
}

Matrix2 rt_monomial_gradient(int m) {
  if (m == 2)
    return Matrix2::Identity();
  return Matrix2::Zero();
}

// Oracle-side basis: linear combinations of the monomial fields solving the
// mean edge-moment conditions of the global dofs on this cell.
struct OracleBasis {
  int ndofs = 0;
  Matrix coeff; // ndofs x nmono, row r = coefficients of basis r
  bool bdm = true;

  Vector2 value(int r, const Vector2 &x) const {
    Vector2 v = Vector2::Zero();
    for (int m = 0; m < coeff.cols(); ++m)
      v += coeff(r, m) * (bdm ? bdm_monomial(m, x) : rt_monomial(m, x));
    return v;
  }
  Matrix2 gradient(int r) const {
    Matrix2 G = Matrix2::Zero();
    for (int m = 0; m < coeff.cols(); ++m)
      G += coeff(r, m) *
           (bdm ? bdm_monomial_gradient(m) : rt_monomial_gradient(m));
    return G;
  }
};

OracleBasis oracle_basis(const TriMesh &mesh, int cell, bool bdm) {
  static const GaussRule g = gauss4();
  const int per_edge = bdm ? 2 : 1;
  const int nd = 3 * per_edge;
  Matrix moments = Matrix::Zero(nd, nd);
  for (int j = 0; j < 3; ++j) {
    const int e = mesh.cell_edges[cell][j].first;
    const Vector2 A = mesh.vertices[mesh.edges[e][0]];
    const Vector2 B = mesh.vertices[mesh.edges[e][1]];
    const Vector2 n = mesh.edge_normal(e);
    for (size_t q = 0; q < g.nodes.size(); ++q) {
      const double s = g.nodes[q];
      const Vector2 x = A + s * (B - A);
      for (int m = 0; m < nd; ++m) {
        const double vn =
            (bdm ? bdm_monomial(m, x) : rt_monomial(m, x)).dot(n);
        moments(per_edge * j, m) += g.weights[q] * vn;
        if (bdm)
          moments(per_edge * j + 1, m) +=
              g.weights[q] * vn * (2.0 * s - 1.0);
      }
    }
  }
  OracleBasis basis;
  basis.ndofs = nd;
  basis.bdm = bdm;
  basis.coeff =
      Eigen::FullPivLU<Matrix>(moments).solve(Matrix::Identity(nd, nd))
          .transpose();
  return basis;
}

int oracle_sigma(const TriMesh &mesh, int cell, int e) {
  const Vector2 centroid = mesh.cell_centroid(cell);
  return mesh.edge_normal(e).dot(mesh.edge_midpoint(e) - centroid) > 0 ? 1
                                                                       : -1;
}

std::vector<char> oracle_mask(const TriMesh &mesh, const BoundarySpec &bc) {
  std::vector<char> mask(2 * mesh.num_edges(), 0);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const int tag = mesh.edge_boundary_tag[e];
    if (tag >= 0 && bc.clamped_tag(tag))
      mask[2 * e] = mask[2 * e + 1] = 1;
  }
  return mask;
}

void oracle_mask_matrix(Matrix &A, const std::vector<char> &mask,
                        bool unit_diag) {
  for (int d = 0; d < int(mask.size()); ++d) {
    if (!mask[size_t(d)])
      continue;
    A.row(d).setZero();
    A.col(d).setZero();
    if (unit_diag)
      A(d, d) = 1.0;
  }
}

} // namespace

DenseBlocks dense_oracle(const TriMesh &mesh, const RescaledModel &m,
                         const BoundarySpec &bc) {
  const int E = mesh.num_edges();
  const int C = mesh.num_cells();
  const int n = m.n;
  const int nu = 2 * E;
  const GaussRule g4 = gauss4();

  DenseBlocks blocks;
  blocks.A_h = Matrix::Zero(nu, nu);
  blocks.DivDiv = Matrix::Zero(nu, nu);
  blocks.Du = Matrix::Zero(C, nu);
  blocks.Dv = Matrix::Zero(C, E);
  Matrix mass = Matrix::Zero(E, E);
  Vector rhs_u = Vector::Zero(nu);

  for (int c = 0; c < C; ++c) {
    const Vector2 p0 = mesh.vertices[mesh.cells[c][0]];
    const Vector2 p1 = mesh.vertices[mesh.cells[c][1]];
    const Vector2 p2 = mesh.vertices[mesh.cells[c][2]];
    const OracleBasis bdm = oracle_basis(mesh, c, true);
    const OracleBasis rt = oracle_basis(mesh, c, false);

    std::array<int, 6> gu;
    std::array<int, 3> gv;
    for (int j = 0; j < 3; ++j) {
      gu[2 * j] = 2 * mesh.cell_edges[c][j].first;
      gu[2 * j + 1] = gu[2 * j] + 1;
      gv[j] = mesh.cell_edges[c][j].first;
    }

    for (int a = 0; a < 6; ++a) {
      const Matrix2 Ga = bdm.gradient(a);
      const Matrix2 eps_a = 0.5 * (Ga + Ga.transpose());
      blocks.Du(c, gu[a]) += duffy_integrate(
          p0, p1, p2, [&](const Vector2 &) { return Ga.trace(); });
      for (int b = 0; b < 6; ++b) {
        const Matrix2 Gb = bdm.gradient(b);
        const Matrix2 eps_b = 0.5 * (Gb + Gb.transpose());
        blocks.A_h(gu[a], gu[b]) += duffy_integrate(
            p0, p1, p2,
            [&](const Vector2 &) { return (eps_a.array() * eps_b.array()).sum(); });
        blocks.DivDiv(gu[a], gu[b]) += duffy_integrate(
            p0, p1, p2,
            [&](const Vector2 &) { return Ga.trace() * Gb.trace(); });
      }
      if (!bc.body_force.isZero(0.0))
        rhs_u[gu[a]] += duffy_integrate(p0, p1, p2, [&](const Vector2 &x) {
          return bc.body_force.dot(bdm.value(a, x));
        });
    }
    for (int a = 0; a < 3; ++a) {
      blocks.Dv(c, gv[a]) += duffy_integrate(
          p0, p1, p2, [&](const Vector2 &) { return rt.gradient(a).trace(); });
      for (int b = 0; b < 3; ++b)
        mass(gv[a], gv[b]) += duffy_integrate(p0, p1, p2, [&](const Vector2 &x) {
          return rt.value(a, x).dot(rt.value(b, x));
        });
    }
  }

  // DG face terms of a_h over interior and clamped edges.
  for (int e = 0; e < E; ++e) {
    const int tag = mesh.edge_boundary_tag[e];
    const bool boundary = tag >= 0;
    if (boundary && !bc.clamped_tag(tag))
      continue;
    const int cp = mesh.edge_cells[e][0];
    const int cm = mesh.edge_cells[e][1];
    const Vector2 n_e = mesh.edge_normal(e);
    const Vector2 A = mesh.vertices[mesh.edges[e][0]];
    const Vector2 B = mesh.vertices[mesh.edges[e][1]];
    const double len = mesh.edge_length(e);

    struct SideInfo {
      int cell;
      double jump_sign, avg_weight;
      Vector2 n_avg;
    };
    std::vector<SideInfo> sides;
    if (cp >= 0 && cm >= 0) {
      sides.push_back({cp, +1.0, 0.5, n_e});
      sides.push_back({cm, -1.0, 0.5, n_e});
    } else {
      const int cell = cp >= 0 ? cp : cm;
      sides.push_back({cell, 1.0, 1.0,
                       double(oracle_sigma(mesh, cell, e)) * n_e});
    }

    std::vector<int> dofs;
    std::vector<Vector2> stress;
    std::vector<std::vector<Vector2>> jumps(g4.nodes.size());
    for (const SideInfo &side : sides) {
      const OracleBasis bdm = oracle_basis(mesh, side.cell, true);
      for (int d = 0; d < 6; ++d) {
        const int gdof = 2 * mesh.cell_edges[side.cell][d / 2].first + d % 2;
        int local = -1;
        for (int k = 0; k < int(dofs.size()); ++k)
          if (dofs[k] == gdof)
            local = k;
        if (local < 0) {
          local = int(dofs.size());
          dofs.push_back(gdof);
          stress.push_back(Vector2::Zero());
          for (auto &jq : jumps)
            jq.push_back(Vector2::Zero());
        }
        const Matrix2 Gd = bdm.gradient(d);
        const Matrix2 eps = 0.5 * (Gd + Gd.transpose());
        stress[local] += side.avg_weight * (eps * side.n_avg);
        for (size_t q = 0; q < g4.nodes.size(); ++q) {
          const Vector2 x = A + g4.nodes[q] * (B - A);
          const Vector2 val = bdm.value(d, x);
          jumps[q][local] += side.jump_sign * (val - val.dot(n_e) * n_e);
        }
      }
    }
    for (size_t q = 0; q < g4.nodes.size(); ++q) {
      const double w = g4.weights[q] * len;
      for (int a = 0; a < int(dofs.size()); ++a)
        for (int b = 0; b < int(dofs.size()); ++b)
          blocks.A_h(dofs[a], dofs[b]) +=
              w * ((m.eta / len) * jumps[q][a].dot(jumps[q][b]) -
                   stress[b].dot(jumps[q][a]) - stress[a].dot(jumps[q][b]));
    }
  }

  // Traction and Dirichlet-pressure boundary data.
  std::vector<Vector> rhs_v(n, Vector::Zero(E));
  for (int e = 0; e < E; ++e) {
    const int tag = mesh.edge_boundary_tag[e];
    if (tag < 0)
      continue;
    const int cell = std::max(mesh.edge_cells[e][0], mesh.edge_cells[e][1]);
    const Vector2 A = mesh.vertices[mesh.edges[e][0]];
    const Vector2 B = mesh.vertices[mesh.edges[e][1]];
    const double len = mesh.edge_length(e);
    const Vector2 n_out = double(oracle_sigma(mesh, cell, e)) *
                          mesh.edge_normal(e);
    if (!bc.clamped_tag(tag)) {
      const Vector2 traction = bc.traction[size_t(tag)];
      if (!traction.isZero(0.0)) {
        const OracleBasis bdm = oracle_basis(mesh, cell, true);
        for (int d = 0; d < 6; ++d) {
          const int gdof = 2 * mesh.cell_edges[cell][d / 2].first + d % 2;
          for (size_t q = 0; q < g4.nodes.size(); ++q) {
            const Vector2 x = A + g4.nodes[q] * (B - A);
            rhs_u[gdof] +=
                g4.weights[q] * len * traction.dot(bdm.value(d, x));
          }
        }
      }
    }
    if (bc.dirichlet_pressure.size() > 0) {
      const OracleBasis rt = oracle_basis(mesh, cell, false);
      for (int d = 0; d < 3; ++d) {
        const int gdof = mesh.cell_edges[cell][d].first;
        double integral = 0.0;
        for (size_t q = 0; q < g4.nodes.size(); ++q) {
          const Vector2 x = A + g4.nodes[q] * (B - A);
          integral += g4.weights[q] * len * rt.value(d, x).dot(n_out);
        }
        for (int i = 0; i < n; ++i)
          rhs_v[i][gdof] -= bc.dirichlet_pressure(i, tag) * integral;
      }
    }
  }

  const std::vector<char> mask = oracle_mask(mesh, bc);
  oracle_mask_matrix(blocks.A_h, mask, false);
  oracle_mask_matrix(blocks.DivDiv, mask, false);
  blocks.A_uu = blocks.A_h + m.lambda * blocks.DivDiv;
  for (int d = 0; d < nu; ++d)
    if (mask[size_t(d)]) {
      blocks.A_uu(d, d) = 1.0;
      rhs_u[d] = 0.0;
    }
  for (int d = 0; d < nu; ++d)
    if (mask[size_t(d)])
      blocks.Du.col(d).setZero();

  blocks.M_v.reserve(n);
  for (int i = 0; i < n; ++i)
    blocks.M_v.push_back(m.Rinv[i] * mass);

  Vector areas(C);
  for (int c = 0; c < C; ++c)
    areas[c] = duffy_integrate(mesh.vertices[mesh.cells[c][0]],
                               mesh.vertices[mesh.cells[c][1]],
                               mesh.vertices[mesh.cells[c][2]],
                               [](const Vector2 &) { return 1.0; });
  const Matrix coupling = m.Lambda1 + m.Lambda2;
  blocks.C_pp = Matrix::Zero(n * C, n * C);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < C; ++c)
        blocks.C_pp(i * C + c, j * C + c) = coupling(i, j) * areas[c];

  const int total = nu + n * E + n * C;
  blocks.monolithic = Matrix::Zero(total, total);
  blocks.rhs = Vector::Zero(total);
  blocks.monolithic.block(0, 0, nu, nu) = blocks.A_uu;
  blocks.rhs.segment(0, nu) = rhs_u;
  for (int i = 0; i < n; ++i) {
    const int vo = nu + i * E;
    const int po = nu + n * E + i * C;
    blocks.monolithic.block(vo, vo, E, E) = blocks.M_v[i];
    blocks.monolithic.block(po, 0, C, nu) = -blocks.Du;
    blocks.monolithic.block(0, po, nu, C) = -blocks.Du.transpose();
    blocks.monolithic.block(po, vo, C, E) = -blocks.Dv;
    blocks.monolithic.block(vo, po, E, C) = -blocks.Dv.transpose();
    blocks.rhs.segment(vo, E) = rhs_v[i];
  }
  blocks.monolithic.block(nu + n * E, nu + n * E, n * C, n * C) -=
      blocks.C_pp;
  if (bc.source.size() > 0)
    for (int i = 0; i < n; ++i)
      blocks.rhs.segment(nu + n * E + i * C, C) = bc.source[i] * areas;
  return blocks;
}

Vector reference_solve(const BlockSystem &sys, const BlockPreconditioner &P) {
  const int total = sys.layout.total();
  const double target_reduction = 1e13;

  if (total <= 600) {
    const SparseMatrix A = monolithic_matrix(sys);
    return Eigen::FullPivLU<Matrix>(Matrix(A)).solve(sys.rhs);
  }

  const SparseMatrix A = monolithic_matrix(sys);
  auto precond = [&P](const Vector &r) { return P.apply(r); };
  Vector x = Vector::Zero(total);
  double r0 = -1.0;
  for (int restart = 0; restart < 6; ++restart) {
    const Vector r = monolithic_residual(sys, x);
    const double rnorm = std::sqrt(std::max(0.0, r.dot(P.apply(r))));
    if (r0 < 0)
      r0 = rnorm;
    if (r0 == 0.0 || rnorm <= r0 / target_reduction)
      return x;
    Vector d = Vector::Zero(total);
    minres(A, r, precond, rnorm / (r0 / target_reduction), 200000, d);
    x += d;
  }
  return x;
}

namespace {

std::vector<int> free_u_dofs(const TriMesh &mesh, const BoundarySpec &bc) {
  std::vector<int> free;
  const std::vector<char> mask = oracle_mask(mesh, bc);
  for (int d = 0; d < int(mask.size()); ++d)
    if (!mask[size_t(d)])
      free.push_back(d);
  return free;
}

Matrix restrict_dense(const SparseMatrix &A, const std::vector<int> &rows,
                      const std::vector<int> &cols) {
  const Matrix full(A);
  Matrix out(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j)
      out(int(i), int(j)) = full(rows[i], cols[j]);
  return out;
}

} // namespace

double estimate_infsup(const TriMesh &mesh, const BoundarySpec &bc) {
  const std::vector<int> free = free_u_dofs(mesh, bc);
  const SparseMatrix H = assemble_u_norm_matrix(mesh, bc);
  const SparseMatrix Du = assemble_divergence(mesh, Space::BDM1);

  std::vector<int> cells(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c)
    cells[c] = c;
  const Matrix Hf = restrict_dense(H, free, free);
  const Matrix Duf = restrict_dense(Du, cells, free);

  const Matrix X = Eigen::LLT<Matrix>(Hf).solve(Duf.transpose());
  const Matrix S = Duf * X;

  Matrix Mp = Matrix::Zero(mesh.num_cells(), mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c)
    Mp(c, c) = mesh.cell_area(c);

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(S, Mp);
  if (ges.info() != Eigen::Success)
    throw std::runtime_error("estimate_infsup: eigensolver failed");
  const Vector eigs = ges.eigenvalues();
  const double cutoff = 1e-10 * eigs[eigs.size() - 1];
  for (int i = 0; i < eigs.size(); ++i)
    if (eigs[i] > cutoff)
      return std::sqrt(eigs[i]);
  throw std::runtime_error("estimate_infsup: no positive eigenvalue");
}

double estimate_ckd(const TriMesh &mesh, const BoundarySpec &bc, double eta) {
  const std::vector<int> free = free_u_dofs(mesh, bc);
  const ElasticityBlocks blocks = assemble_elasticity(mesh, 1.0, eta, bc);
  const Matrix Af = restrict_dense(blocks.A_h, free, free);
  const Matrix Df = restrict_dense(blocks.DivDiv, free, free);

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(Df, Af);
  if (ges.info() != Eigen::Success)
    throw std::runtime_error("estimate_ckd: eigensolver failed");
  const double theta_max = ges.eigenvalues().maxCoeff();
  if (!(theta_max > 0))
    throw std::runtime_error("estimate_ckd: nonpositive spectrum");
  return 1.0 / theta_max;
}

Lemma2Report check_lemma2(const RescaledModel &m, int trials, unsigned seed) {
  Lemma2Report report;
  report.trials = trials;

  const Matrix tilde_inv = Eigen::LLT<Matrix>(m.LambdaTilde)
                               .solve(Matrix::Identity(m.n, m.n));
  const Matrix e_inv =
      Eigen::LLT<Matrix>(m.LambdaE).solve(Matrix::Identity(m.n, m.n));
  const double Rinv_max = 1.0 / m.R;

  std::mt19937 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  const double tol = 1e-10;
  for (int t = 0; t < trials; ++t) {
    Vector x(m.n);
    for (int i = 0; i < m.n; ++i)
      x[i] = dist(rng);
    const double qe = x.dot(m.LambdaE * x);
    const double qt = x.dot(m.LambdaTilde * x);
    const double q3 = x.dot(m.Lambda3 * x);
    const double ie = x.dot(e_inv * x);
    const double it = x.dot(tilde_inv * x);
    const double i3 = Rinv_max * x.squaredNorm();
    const double scale = x.squaredNorm();
    bool ok = qe >= qt - tol * scale && qt >= q3 - tol * scale;
    ok = ok && ie <= it + tol * i3 && it <= i3 + tol * i3;
    if (!ok)
      ++report.violations;
  }

  report.tilde_sum = tilde_inv.sum();
  report.tilde_sum_bound = 1.0 / (1.0 / m.lambda0 + m.L);
  report.tilde_sum_ok =
      report.tilde_sum > 0 &&
      report.tilde_sum <= report.tilde_sum_bound * (1.0 + 1e-12);
  return report;
}

double contraction_rate_bound(double L, double lambda, double beta_sd) {
  const double beta_inv2 = 1.0 / (beta_sd * beta_sd);
  return std::sqrt(1.0 / ((1.0 / L) / (beta_inv2 + lambda) + 1.0));
}

ContractionAudit contraction_audit(const BlockSystem &sys,
                                   const BlockPreconditioner &P,
                                   const Vector &reference, double beta_sd,
                                   const FixedStressOptions &opts) {
  FixedStressOptions run = opts;
  run.reference = &reference;
  auto [solution, report] = fixed_stress_solve(sys, P, run);
  (void)solution;

  ContractionAudit audit;
  audit.bound = contraction_rate_bound(sys.model.L, sys.model.lambda, beta_sd);
  const auto &errs = report.sum_pressure_error;
  if (errs.empty())
    return audit;
  const double floor = 1e-11 * errs.front();
  for (size_t k = 0; k + 1 < errs.size(); ++k) {
    if (errs[k] <= floor || errs[k + 1] <= floor)
      break;
    audit.ratios.push_back(errs[k + 1] / errs[k]);
  }
  for (double r : audit.ratios)
    audit.worst_ratio = std::max(audit.worst_ratio, r);
  audit.pass = audit.worst_ratio <= audit.bound + 1e-6;
  return audit;
}

EnergyAudit energy_audit(const BlockSystem &sys,
                         const std::vector<Vector> &iterates,
                         const Vector &reference, double rel_slack) {
  EnergyAudit audit;
  const DofLayout &layout = sys.layout;
  const double L = sys.model.L;

  double floor = -1.0;
  for (size_t k = 0; k + 1 < iterates.size(); ++k) {
    const double s_prev =
        sum_pressure_error_norm(sys, iterates[k], reference);
    const double s_next =
        sum_pressure_error_norm(sys, iterates[k + 1], reference);
    if (floor < 0)
      floor = 1e-11 * s_prev;
    if (s_prev <= floor || s_next <= floor)
      break;

    const Vector e = iterates[k + 1] - reference;
    const Vector eu = e.segment(0, layout.u_size());
    double lhs = 0.5 * (eu.dot(sys.A_h * eu) +
                        sys.model.lambda * eu.dot(sys.DivDiv * eu));
    for (int i = 0; i < layout.n; ++i) {
      const Vector ev = e.segment(layout.v_offset(i), layout.E);
      lhs += ev.dot(sys.M_v[i] * ev);
    }
    const Vector ep = e.segment(layout.p_offset(0), layout.n * layout.C);
    lhs += ep.dot(sys.C_pp * ep);
    lhs += 0.5 * L * s_next * s_next;
    const double rhs = 0.5 * L * s_prev * s_prev;

    const double violation = (lhs - rhs) / std::max(rhs, 1e-300);
    audit.worst_violation = std::max(audit.worst_violation, violation);
    ++audit.checked;
  }
  audit.pass = audit.worst_violation <= rel_slack;
  return audit;
}

double conservation_check(const BlockSystem &sys, const TriMesh &mesh,
                          const Vector &solution) {
  const DofLayout &layout = sys.layout;
  const Matrix coupling = sys.model.Lambda1 + sys.model.Lambda2;
  double worst = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double divu = 0.0;
    for (int j = 0; j < 3; ++j) {
      const auto [e, sign] = mesh.cell_edges[c][j];
      divu += sign * mesh.edge_length(e) * solution[layout.u_dof(e, 0)];
    }
    const double area = mesh.cell_area(c);
    for (int i = 0; i < layout.n; ++i) {
      double divv = 0.0;
      for (int j = 0; j < 3; ++j) {
        const auto [e, sign] = mesh.cell_edges[c][j];
        divv += sign * mesh.edge_length(e) * solution[layout.v_dof(i, e)];
      }
      double pres = 0.0;
      for (int jn = 0; jn < layout.n; ++jn)
        pres += coupling(i, jn) * solution[layout.p_dof(jn, c)] * area;
      const double rhs = sys.rhs[layout.p_dof(i, c)];
      const double residual = std::abs(-divu - divv - pres - rhs);
      const double scale =
          std::max({std::abs(divu), std::abs(divv), std::abs(pres),
                    std::abs(rhs), 1e-300});
      worst = std::max(worst, residual / scale);
    }
  }
  return worst;
}

} // namespace mpet
