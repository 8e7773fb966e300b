#pragma once

#include <memory>
#include <tuple>

#include "mpet/krylov.hpp"

namespace mpet {

struct FixedStressOptions {
  double reduction = 1e8;
  int max_outer = 500;
  InnerSolver inner = InnerSolver::Direct;
  double inner_tol = 1e-12;
  int inner_max = 200000;
  const Vector *reference = nullptr; // enables contraction diagnostics
  bool store_iterates = false;
  SharedElasticitySolver mechanics_solver; // optional pre-built A_uu solver
};

// Step (a) of the fixed-stress split: the coupled n-network mixed flow
// solve with stabilized pressure block (Lambda1 + Lambda2 + LambdaL).
// When that per-cell block is SPD the pressures are eliminated exactly and
// the SPD flux Schur complement is solved; otherwise the saddle system is
// solved by MinRes with the block preconditioner
// diag(R_i^{-1} M_v, LambdaTilde kron areas).
class FlowStepSolver {
public:
  FlowStepSolver(const BlockSystem &sys, const FixedStressOptions &opts);

  // u_prev: displacement dofs; p_prev: all pressure dofs (network-major).
  // Returns (v_all, p_all, inner iterations).
  std::tuple<Vector, Vector, int> step(const Vector &u_prev,
                                       const Vector &p_prev) const;

  bool fallback() const { return fallback_; }

private:
  const BlockSystem *sys_;
  FixedStressOptions opts_;
  bool fallback_ = false;
  Matrix lambda_c_; // Lambda1 + Lambda2 + LambdaL
  SparseMatrix schur_;
  SparseMatrix saddle_; // fallback path
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrixCol>> schur_fact_;
  std::vector<std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrixCol>>> mv_fact_;
};

// Step (b): SPD solve of the DG elasticity block.
class MechanicsStepSolver {
public:
  MechanicsStepSolver(const BlockSystem &sys, const FixedStressOptions &opts);
  std::pair<Vector, int> step(const Vector &p_all) const;

private:
  const BlockSystem *sys_;
  FixedStressOptions opts_;
  SharedElasticitySolver solver_;
};

// One-shot wrappers around the step solvers.
std::tuple<Vector, Vector, int> flow_step(const BlockSystem &sys,
                                          const Vector &u_prev,
                                          const Vector &p_prev,
                                          const FixedStressOptions &opts = {});
std::pair<Vector, int> mechanics_step(const BlockSystem &sys,
                                      const Vector &p_all,
                                      const FixedStressOptions &opts = {});

// Fixed-stress split iteration with zero initial guess, terminated when the
// full coupled residual measured in the preconditioner-induced norm has
// dropped by opts.reduction.
std::pair<BlockVector, IterReport>
fixed_stress_solve(const BlockSystem &sys, const BlockPreconditioner &P,
                   const FixedStressOptions &opts = {});

// L2 norm of sum_i (p_i - p_i_ref) over the mesh, used for the contraction
// diagnostics; x and reference are monolithic coefficient vectors.
double sum_pressure_error_norm(const BlockSystem &sys, const Vector &x,
                               const Vector &reference);

} // namespace mpet
