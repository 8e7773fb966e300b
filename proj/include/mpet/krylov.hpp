#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

#include "mpet/assembly.hpp"
#include "mpet/sparse.hpp"

namespace mpet {

enum class InnerSolver { Direct, CG };

using SpdFactorization = Eigen::SimplicialLDLT<SparseMatrixCol>;

// Direct solver for the elasticity block A_uu = A_h + lambda DivDiv with
// compensated-residual refinement. For large lambda it factorizes the
// equivalent quasidefinite augmented system
//   [ A_h (+ mask identity)   Du^T      ] [u]   [b]
//   [ Du                     -(1/l) M_p ] [w] = [0],   w = l M_p^{-1} Du u,
// whose conditioning does not degrade with lambda.
class ElasticitySolver {
public:
  explicit ElasticitySolver(const BlockSystem &sys);
  Vector solve(const Vector &b) const;
  bool augmented() const { return augmented_; }

private:
  SparseMatrix A_uu_;
  SparseMatrix augmented_matrix_;
  SpdFactorization fact_;
  bool augmented_ = false;
  int nu_ = 0, C_ = 0;
};

// Shareable between the preconditioner and the mechanics step (and across
// parameter-sweep cells with identical elasticity blocks).
using SharedElasticitySolver = std::shared_ptr<const ElasticitySolver>;

SharedElasticitySolver make_elasticity_solver(const BlockSystem &sys);

// Convergence record shared by both outer solvers. The residual history is
// measured in the norm induced by the (inverse of the) block-diagonal
// preconditioner and always contains the initial residual, so its length
// is iterations + 1.
struct IterReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
  std::vector<int> flow_inner;  // fixed-stress step (a) inner counts
  std::vector<int> mech_inner;  // fixed-stress step (b) inner counts
  std::vector<double> sum_pressure_error; // ||sum_i e_{p_i}|| per iterate
  std::vector<Vector> iterates;           // full iterates when requested
  bool stagnated = false; // residual hit the precision floor before target
  bool fallback_used = false;
  double wall_seconds = 0.0;
};

// Norm-equivalent block-diagonal preconditioner in discrete form:
//   B_u = A_uu  (DG elasticity + lambda div-div)
//   B_v = blockdiag(R_i^{-1} M_v) + G' (Lambda^{-1} kron diag(areas)) G
//   B_p = Lambda kron diag(cell areas), applied exactly per cell.
// B_u and B_v are applied through a direct factorization or through CG to
// `inner_tol`, depending on the inner solver choice.
class BlockPreconditioner {
public:
  BlockPreconditioner(const BlockSystem &sys,
                      InnerSolver inner = InnerSolver::Direct,
                      double inner_tol = 1e-12, int inner_max = 200000,
                      SharedElasticitySolver bu_solver = nullptr);

  Vector apply(const Vector &r) const;
  // Forward multiplication by the preconditioner blocks (for tests).
  Vector multiply(const Vector &x) const;

  const SparseMatrix &Bv() const { return Bv_; }
  const BlockSystem &system() const { return *sys_; }
  long inner_iterations() const { return inner_iterations_; }

private:
  const BlockSystem *sys_;
  InnerSolver inner_;
  double inner_tol_;
  int inner_max_;
  SparseMatrix Bv_;
  Matrix lambda_inv_;
  SharedElasticitySolver Bu_solver_;
  std::shared_ptr<SpdFactorization> Bv_fact_;
  mutable long inner_iterations_ = 0;
};

inline Vector apply_preconditioner(const BlockPreconditioner &P,
                                   const Vector &r) {
  return P.apply(r);
}

// sqrt(r' B r) for r = rhs - A x.
double residual_bnorm(const BlockSystem &sys, const BlockPreconditioner &P,
                      const Vector &x);

// Preconditioned MinRes on the monolithic system, zero initial guess,
// stopping on residual reduction in the B-induced norm.
std::pair<BlockVector, IterReport>
minres_mpet(const BlockSystem &sys, const BlockPreconditioner &P,
            double reduction = 1e8, int max_iter = 20000);

} // namespace mpet
