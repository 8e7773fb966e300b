#include "mpet/krylov.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mpet {

namespace {

// B_v = blockdiag(M_v[i]) + Dv' (Minv kron diag(1/area)) Dv over all
// networks; Minv couples the cellwise divergences of the n flux fields.
SparseMatrix assemble_flux_operator(const BlockSystem &sys,
                                    const Matrix &Minv) {
  const DofLayout &layout = sys.layout;
  const int n = layout.n;
  const int E = layout.E;
  std::vector<Triplet> t;

  for (int i = 0; i < n; ++i)
    for (int r = 0; r < sys.M_v[i].outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(sys.M_v[i], r); it; ++it)
        t.emplace_back(i * E + int(it.row()), i * E + int(it.col()),
                       it.value());

  // Dv rows are cells; entries are (div z)|_T |T| per edge dof.
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

  SparseMatrix B(n * E, n * E);
  B.setFromTriplets(t.begin(), t.end());
  B.prune(0.0, 0.0);
  B.makeCompressed();
  return B;
}

} // namespace

ElasticitySolver::ElasticitySolver(const BlockSystem &sys)
    : A_uu_(sys.A_uu), nu_(sys.layout.u_size()), C_(sys.layout.C) {
  const double lambda = sys.model.lambda;
  augmented_ = lambda >= 1e6;
  if (augmented_) {
    std::vector<Triplet> t;
    for (int r = 0; r < sys.A_h.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(sys.A_h, r); it; ++it)
        t.emplace_back(int(it.row()), int(it.col()), it.value());
    for (int d : sys.constrained)
      t.emplace_back(d, d, 1.0);
    for (int c = 0; c < sys.Du.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(sys.Du, c); it; ++it) {
        t.emplace_back(nu_ + int(it.row()), int(it.col()), it.value());
        t.emplace_back(int(it.col()), nu_ + int(it.row()), it.value());
      }
    for (int c = 0; c < C_; ++c)
      t.emplace_back(nu_ + c, nu_ + c, -sys.cell_area[c] / lambda);
    augmented_matrix_.resize(nu_ + C_, nu_ + C_);
    augmented_matrix_.setFromTriplets(t.begin(), t.end());
    augmented_matrix_.makeCompressed();
    fact_.compute(SparseMatrixCol(augmented_matrix_));
    if (fact_.info() != Eigen::Success)
      augmented_ = false; // fall back to the plain form
  }
  if (!augmented_) {
    fact_.compute(SparseMatrixCol(A_uu_));
    if (fact_.info() != Eigen::Success)
      throw std::runtime_error("ElasticitySolver: factorization failed");
  }
}

Vector ElasticitySolver::solve(const Vector &b) const {
  // Approximate inverse application: plain backsolve, or the u-component
  // of the augmented (quasidefinite) solve for large lambda.
  auto apply_inverse = [this](const Vector &r) -> Vector {
    if (!augmented_)
      return fact_.solve(r);
    Vector rhs = Vector::Zero(nu_ + C_);
    rhs.segment(0, nu_) = r;
    return fact_.solve(rhs).segment(0, nu_);
  };
  // Refinement against the true operator with a compensated residual;
  // the approximate inverse only needs a contraction factor below one.
  Vector x = apply_inverse(b);
  double previous = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < 8; ++pass) {
    const Vector r = residual_compensated(A_uu_, b, x);
    const double rnorm = r.norm();
    if (!(rnorm < 0.5 * previous))
      break;
    previous = rnorm;
    x += apply_inverse(r);
  }
  return x;
}

SharedElasticitySolver make_elasticity_solver(const BlockSystem &sys) {
  return std::make_shared<ElasticitySolver>(sys);
}

BlockPreconditioner::BlockPreconditioner(const BlockSystem &sys,
                                         InnerSolver inner, double inner_tol,
                                         int inner_max,
                                         SharedElasticitySolver bu_solver)
    : sys_(&sys), inner_(inner), inner_tol_(inner_tol), inner_max_(inner_max) {
  const Matrix &lambda = sys.model.Lambda;
  Eigen::LLT<Matrix> llt(lambda);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("BlockPreconditioner: Lambda not SPD");
  lambda_inv_ = llt.solve(Matrix::Identity(lambda.rows(), lambda.cols()));

  Bv_ = assemble_flux_operator(sys, lambda_inv_);

  if (inner_ == InnerSolver::Direct) {
    Bu_solver_ = bu_solver ? std::move(bu_solver) : make_elasticity_solver(sys);
    Bv_fact_ = std::make_shared<SpdFactorization>();
    Bv_fact_->compute(SparseMatrixCol(Bv_));
    if (Bv_fact_->info() != Eigen::Success)
      throw std::runtime_error("BlockPreconditioner: B_v factorization failed");
  }
}

Vector BlockPreconditioner::apply(const Vector &r) const {
  const DofLayout &layout = sys_->layout;
  if (r.size() != layout.total())
    throw std::invalid_argument("apply_preconditioner: dimension mismatch");
  Vector z = Vector::Zero(layout.total());

  const Vector ru = r.segment(0, layout.u_size());
  const Vector rv = r.segment(layout.v_offset(0), layout.n * layout.E);
  const Vector rp = r.segment(layout.p_offset(0), layout.n * layout.C);

  if (inner_ == InnerSolver::Direct) {
    Vector zu = Bu_solver_->solve(ru);
    Vector zv = Bv_fact_->solve(rv);
    zv += Bv_fact_->solve(residual_compensated(Bv_, rv, zv));
    z.segment(0, layout.u_size()) = zu;
    z.segment(layout.v_offset(0), rv.size()) = zv;
    inner_iterations_ += 2;
  } else {
    Vector zu = Vector::Zero(ru.size());
    CgResult cu = cg(sys_->A_uu, ru, identity_preconditioner(), inner_tol_,
                     inner_max_, zu);
    if (!cu.converged && ru.norm() > 0)
      throw std::runtime_error("apply_preconditioner: B_u CG stalled");
    Vector zv = Vector::Zero(rv.size());
    CgResult cv =
        cg(Bv_, rv, identity_preconditioner(), inner_tol_, inner_max_, zv);
    if (!cv.converged && rv.norm() > 0)
      throw std::runtime_error("apply_preconditioner: B_v CG stalled");
    z.segment(0, layout.u_size()) = zu;
    z.segment(layout.v_offset(0), rv.size()) = zv;
    inner_iterations_ += cu.iterations + cv.iterations;
  }

  // Exact per-cell application of (Lambda kron areas)^{-1}.
  const int C = layout.C;
  Vector zp(layout.n * C);
  for (int c = 0; c < C; ++c) {
    Vector local(layout.n);
    for (int i = 0; i < layout.n; ++i)
      local[i] = rp[i * C + c];
    local = lambda_inv_ * local / sys_->cell_area[c];
    for (int i = 0; i < layout.n; ++i)
      zp[i * C + c] = local[i];
  }
  z.segment(layout.p_offset(0), zp.size()) = zp;
  return z;
}

Vector BlockPreconditioner::multiply(const Vector &x) const {
  const DofLayout &layout = sys_->layout;
  Vector y = Vector::Zero(layout.total());
  y.segment(0, layout.u_size()) =
      sys_->A_uu * x.segment(0, layout.u_size());
  y.segment(layout.v_offset(0), layout.n * layout.E) =
      Bv_ * x.segment(layout.v_offset(0), layout.n * layout.E);
  const int C = layout.C;
  const Matrix &lambda = sys_->model.Lambda;
  for (int c = 0; c < C; ++c) {
    Vector local(layout.n);
    for (int i = 0; i < layout.n; ++i)
      local[i] = x[layout.p_offset(i) + c];
    local = sys_->cell_area[c] * (lambda * local);
    for (int i = 0; i < layout.n; ++i)
      y[layout.p_offset(i) + c] = local[i];
  }
  return y;
}

double residual_bnorm(const BlockSystem &sys, const BlockPreconditioner &P,
                      const Vector &x) {
  const Vector r = monolithic_residual(sys, x);
  return std::sqrt(std::max(0.0, r.dot(P.apply(r))));
}

std::pair<BlockVector, IterReport>
minres_mpet(const BlockSystem &sys, const BlockPreconditioner &P,
            double reduction, int max_iter) {
  const SparseMatrix A = monolithic_matrix(sys);
  Vector x = Vector::Zero(sys.layout.total());
  MinresResult res = minres(
      A, sys.rhs, [&P](const Vector &r) { return P.apply(r); }, reduction,
      max_iter, x);

  IterReport report;
  report.iterations = res.iterations;
  report.converged = res.converged;
  report.residual_history = std::move(res.history);
  return {BlockVector(sys.layout, std::move(x)), report};
}

} // namespace mpet
