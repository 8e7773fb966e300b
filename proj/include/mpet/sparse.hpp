#pragma once

#include <functional>
#include <vector>

#include "mpet/dofs.hpp"
#include "mpet/types.hpp"

namespace mpet {

// y = A x with deterministic (storage-order) summation.
Vector spmv(const SparseMatrix &A, const Vector &x);

// Neumaier-compensated accumulator with exact products via fma; used to
// evaluate residuals whose plain evaluation cancels near the precision
// floor (large lambda regimes).
struct Compensated {
  double sum = 0.0, err = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      err += (sum - t) + x;
    else
      err += (x - t) + sum;
    sum = t;
  }
  void add_product(double a, double b) {
    const double p = a * b;
    err += std::fma(a, b, -p);
    add(p);
  }
  double value() const { return sum + err; }
};

// b - A x with compensated accumulation.
Vector residual_compensated(const SparseMatrix &A, const Vector &b,
                            const Vector &x);

// Inverse application of an SPD operator, e.g. a preconditioner.
using PrecondFn = std::function<Vector(const Vector &)>;

PrecondFn identity_preconditioner();

struct CgResult {
  int iterations = 0;
  bool converged = false;
  double residual = 0.0; // ||b - A x||_2
};

// Preconditioned conjugate gradients; stops when ||b - Ax|| <= rel_tol ||b||.
// x is used as the initial guess and holds the solution on return.
CgResult cg(const SparseMatrix &A, const Vector &b, const PrecondFn &M,
            double rel_tol, int max_iter, Vector &x);

struct MinresResult {
  int iterations = 0;
  bool converged = false;
  std::vector<double> history; // residual norms sqrt(r' P r), length iters+1
};

// Preconditioned MinRes for symmetric (possibly indefinite) A with SPD
// preconditioner P. Stops once the residual norm in the P-induced inner
// product has dropped by `reduction` relative to the zero-guess residual.
MinresResult minres(const SparseMatrix &A, const Vector &b, const PrecondFn &P,
                    double reduction, int max_iter, Vector &x);

// Solves (area_c * M) y_c = r_c for every cell, with the network-major
// layout r = (r_1(all cells), ..., r_n(all cells)). M must be SPD; throws
// std::runtime_error otherwise so callers can fall back to a saddle-point
// solve.
Vector cell_block_solve(const Matrix &M, const Vector &areas, const Vector &rhs);

bool is_spd(const Matrix &M);

} // namespace mpet
