#include "mpet/splitsolve.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <stdexcept>

namespace mpet {

namespace {

// Direct solve with adaptive compensated-residual refinement; carries
// ill-conditioned large-lambda blocks to the precision floor.
Vector solve_refined(const Eigen::SimplicialLDLT<SparseMatrixCol> &fact,
                     const SparseMatrix &A, const Vector &b) {
  Vector x = fact.solve(b);
  double previous = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < 6; ++pass) {
    const Vector r = residual_compensated(A, b, x);
    const double rnorm = r.norm();
    if (!(rnorm < 0.5 * previous))
      break;
    previous = rnorm;
    x += fact.solve(r);
  }
  return x;
}

// blockdiag(M_v[i]) + Dv' (Minv kron diag(1/area)) Dv, shared with the
// preconditioner construction in spirit but local to the flow step here
// (different coupling matrix).
SparseMatrix flux_schur(const BlockSystem &sys, const Matrix &Minv) {
  const DofLayout &layout = sys.layout;
  const int n = layout.n;
  const int E = layout.E;
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < sys.M_v[i].outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(sys.M_v[i], r); it; ++it)
        t.emplace_back(i * E + int(it.row()), i * E + int(it.col()),
                       it.value());
  for (int c = 0; c < sys.Dv.outerSize(); ++c) {
    std::vector<std::pair<int, double>> entries;
    for (SparseMatrix::InnerIterator it(sys.Dv, c); it; ++it)
      entries.emplace_back(int(it.col()), it.value());
    const double inv_area = 1.0 / sys.cell_area[c];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (Minv(i, j) == 0.0)
          continue;
        for (const auto &[ea, va] : entries)
          for (const auto &[eb, vb] : entries)
            t.emplace_back(i * E + ea, j * E + eb,
                           Minv(i, j) * inv_area * va * vb);
      }
  }
  SparseMatrix S(n * E, n * E);
  S.setFromTriplets(t.begin(), t.end());
  S.prune(0.0, 0.0);
  S.makeCompressed();
  return S;
}

// Symmetric flow saddle system [[blockdiag(M_v), -Dv'], [-Dv, -(Lc kron M)]].
SparseMatrix flow_saddle(const BlockSystem &sys, const Matrix &lambda_c) {
  const DofLayout &layout = sys.layout;
  const int n = layout.n;
  const int E = layout.E;
  const int C = layout.C;
  const int nv = n * E;
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < sys.M_v[i].outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(sys.M_v[i], r); it; ++it)
        t.emplace_back(i * E + int(it.row()), i * E + int(it.col()),
                       it.value());
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < sys.Dv.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(sys.Dv, c); it; ++it) {
        t.emplace_back(nv + i * C + c, i * E + int(it.col()), -it.value());
        t.emplace_back(i * E + int(it.col()), nv + i * C + c, -it.value());
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (lambda_c(i, j) == 0.0)
        continue;
      for (int c = 0; c < C; ++c)
        t.emplace_back(nv + i * C + c, nv + j * C + c,
                       -lambda_c(i, j) * sys.cell_area[c]);
    }
  SparseMatrix A(nv + n * C, nv + n * C);
  A.setFromTriplets(t.begin(), t.end());
  A.prune(0.0, 0.0);
  A.makeCompressed();
  return A;
}

Vector apply_lambda_kron_mass(const BlockSystem &sys, const Matrix &M,
                              const Vector &p_all) {
  const int n = sys.layout.n;
  const int C = sys.layout.C;
  Vector result = Vector::Zero(n * C);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (M(i, j) == 0.0)
        continue;
      result.segment(i * C, C) +=
          M(i, j) * sys.cell_area.cwiseProduct(p_all.segment(j * C, C));
    }
  return result;
}

} // namespace

FlowStepSolver::FlowStepSolver(const BlockSystem &sys,
                               const FixedStressOptions &opts)
    : sys_(&sys), opts_(opts) {
  const RescaledModel &m = sys.model;
  lambda_c_ = m.Lambda1 + m.Lambda2 + m.LambdaL;
  fallback_ = !is_spd(lambda_c_);
  if (!fallback_) {
    const Matrix lc_inv =
        Eigen::LLT<Matrix>(lambda_c_).solve(Matrix::Identity(m.n, m.n));
    schur_ = flux_schur(sys, lc_inv);
    if (opts_.inner == InnerSolver::Direct) {
      schur_fact_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrixCol>>();
      schur_fact_->compute(SparseMatrixCol(schur_));
      if (schur_fact_->info() != Eigen::Success)
        throw std::runtime_error("flow_step: Schur factorization failed");
    }
  } else {
    saddle_ = flow_saddle(sys, lambda_c_);
    for (int i = 0; i < m.n; ++i) {
      auto fact = std::make_unique<Eigen::SimplicialLDLT<SparseMatrixCol>>();
      fact->compute(SparseMatrixCol(sys.M_v[i]));
      if (fact->info() != Eigen::Success)
        throw std::runtime_error("flow_step: M_v factorization failed");
      mv_fact_.push_back(std::move(fact));
    }
  }
}

std::tuple<Vector, Vector, int>
FlowStepSolver::step(const Vector &u_prev, const Vector &p_prev) const {
  const BlockSystem &sys = *sys_;
  const DofLayout &layout = sys.layout;
  const int n = layout.n;
  const int E = layout.E;
  const int C = layout.C;

  // Right-hand side of the pressure rows:
  // g_i - L (sum_j p_j^m, q_i) + (div u^m, q_i).
  Vector r_p = sys.rhs.segment(layout.p_offset(0), n * C);
  r_p -= apply_lambda_kron_mass(sys, sys.model.LambdaL, p_prev);
  const Vector du = sys.Du * u_prev;
  for (int i = 0; i < n; ++i)
    r_p.segment(i * C, C) += du;

  Vector r_v = sys.rhs.segment(layout.v_offset(0), n * E);

  if (!fallback_) {
    // Exact per-cell pressure elimination, then SPD Schur solve.
    const Vector cinv_rp = cell_block_solve(lambda_c_, sys.cell_area, r_p);
    Vector rhs_schur = r_v;
    for (int i = 0; i < n; ++i)
      rhs_schur.segment(i * E, E) -=
          sys.Dv.transpose() * cinv_rp.segment(i * C, C);

    Vector v;
    int inner = 1;
    if (opts_.inner == InnerSolver::Direct) {
      v = solve_refined(*schur_fact_, schur_, rhs_schur);
    } else {
      v = Vector::Zero(n * E);
      CgResult res = cg(schur_, rhs_schur, identity_preconditioner(),
                        opts_.inner_tol, opts_.inner_max, v);
      if (!res.converged && rhs_schur.norm() > 0)
        throw std::runtime_error("flow_step: Schur CG stalled");
      inner = res.iterations;
    }

    Vector dv_v = Vector::Zero(n * C);
    for (int i = 0; i < n; ++i)
      dv_v.segment(i * C, C) = sys.Dv * v.segment(i * E, E);
    const Vector p =
        -cell_block_solve(lambda_c_, sys.cell_area, r_p + dv_v);
    return {v, p, inner};
  }

  // Fallback: MinRes on the indefinite flow saddle system.
  Vector rhs(n * E + n * C);
  rhs << r_v, r_p;
  const Matrix tilde = sys.model.LambdaTilde;
  auto precond = [&](const Vector &r) {
    Vector z(r.size());
    for (int i = 0; i < n; ++i)
      z.segment(i * E, E) = mv_fact_[i]->solve(r.segment(i * E, E));
    z.segment(n * E, n * C) =
        cell_block_solve(tilde, sys.cell_area, r.segment(n * E, n * C));
    return z;
  };
  Vector x = Vector::Zero(n * E + n * C);
  MinresResult res =
      minres(saddle_, rhs, precond, 1.0 / opts_.inner_tol, opts_.inner_max, x);
  if (!res.converged && rhs.norm() > 0)
    throw std::runtime_error("flow_step: fallback MinRes stalled");
  return {x.segment(0, n * E), x.segment(n * E, n * C), res.iterations};
}

MechanicsStepSolver::MechanicsStepSolver(const BlockSystem &sys,
                                         const FixedStressOptions &opts)
    : sys_(&sys), opts_(opts) {
  if (opts_.inner == InnerSolver::Direct)
    solver_ = opts_.mechanics_solver ? opts_.mechanics_solver
                                     : make_elasticity_solver(sys);
}

std::pair<Vector, int> MechanicsStepSolver::step(const Vector &p_all) const {
  const BlockSystem &sys = *sys_;
  const DofLayout &layout = sys.layout;
  Vector rhs = sys.rhs.segment(0, layout.u_size());
  for (int i = 0; i < layout.n; ++i)
    rhs += sys.Du.transpose() * p_all.segment(i * layout.C, layout.C);

  if (opts_.inner == InnerSolver::Direct)
    return {solver_->solve(rhs), 1};

  Vector u = Vector::Zero(layout.u_size());
  CgResult res = cg(sys.A_uu, rhs, identity_preconditioner(), opts_.inner_tol,
                    opts_.inner_max, u);
  if (!res.converged && rhs.norm() > 0)
    throw std::runtime_error("mechanics_step: CG did not converge");
  return {u, res.iterations};
}

std::tuple<Vector, Vector, int> flow_step(const BlockSystem &sys,
                                          const Vector &u_prev,
                                          const Vector &p_prev,
                                          const FixedStressOptions &opts) {
  return FlowStepSolver(sys, opts).step(u_prev, p_prev);
}

std::pair<Vector, int> mechanics_step(const BlockSystem &sys,
                                      const Vector &p_all,
                                      const FixedStressOptions &opts) {
  return MechanicsStepSolver(sys, opts).step(p_all);
}

double sum_pressure_error_norm(const BlockSystem &sys, const Vector &x,
                               const Vector &reference) {
  const DofLayout &layout = sys.layout;
  const int C = layout.C;
  Vector sum = Vector::Zero(C);
  for (int i = 0; i < layout.n; ++i)
    sum += x.segment(layout.p_offset(i), C) -
           reference.segment(layout.p_offset(i), C);
  return std::sqrt(sum.cwiseAbs2().dot(sys.cell_area));
}

std::pair<BlockVector, IterReport>
fixed_stress_solve(const BlockSystem &sys, const BlockPreconditioner &P,
                   const FixedStressOptions &opts) {
  const auto start = std::chrono::steady_clock::now();
  const DofLayout &layout = sys.layout;

  IterReport report;
  report.fallback_used = false;
  BlockVector x(layout);

  const double r0 = residual_bnorm(sys, P, x.x);
  report.residual_history.push_back(r0);
  if (opts.reference)
    report.sum_pressure_error.push_back(
        sum_pressure_error_norm(sys, x.x, *opts.reference));
  if (opts.store_iterates)
    report.iterates.push_back(x.x);

  if (r0 == 0.0) {
    report.converged = true;
    return {std::move(x), report};
  }
  const double target = r0 / opts.reduction;

  FlowStepSolver flow(sys, opts);
  MechanicsStepSolver mechanics(sys, opts);
  report.fallback_used = flow.fallback();

  for (int m = 1; m <= opts.max_outer; ++m) {
    const Vector u_prev = x.x.segment(0, layout.u_size());
    const Vector p_prev =
        x.x.segment(layout.p_offset(0), layout.n * layout.C);

    auto [v_next, p_next, flow_inner] = flow.step(u_prev, p_prev);
    auto [u_next, mech_inner] = mechanics.step(p_next);

    x.x.segment(0, layout.u_size()) = u_next;
    x.x.segment(layout.v_offset(0), layout.n * layout.E) = v_next;
    x.x.segment(layout.p_offset(0), layout.n * layout.C) = p_next;

    report.iterations = m;
    report.flow_inner.push_back(flow_inner);
    report.mech_inner.push_back(mech_inner);
    report.residual_history.push_back(residual_bnorm(sys, P, x.x));
    if (opts.reference)
      report.sum_pressure_error.push_back(
          sum_pressure_error_norm(sys, x.x, *opts.reference));
    if (opts.store_iterates)
      report.iterates.push_back(x.x);

    if (report.residual_history.back() <= target) {
      report.converged = true;
      break;
    }
    // Stagnation at the floating-point floor: no meaningful progress over
    // three consecutive iterations. Report the best iterate reached.
    const auto &hist = report.residual_history;
    if (m >= 3) {
      const double best =
          *std::min_element(hist.begin(), hist.end() - 3);
      bool progress = false;
      for (size_t k = hist.size() - 3; k < hist.size(); ++k)
        progress = progress || hist[k] < 0.99 * best;
      if (!progress) {
        report.stagnated = true;
        const double floor_value =
            *std::min_element(hist.begin(), hist.end());
        for (size_t k = 0; k < hist.size(); ++k)
          if (hist[k] <= 1.01 * floor_value) {
            report.iterations = int(k); // first iterate at the floor
            break;
          }
        break;
      }
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return {std::move(x), report};
}

} // namespace mpet
