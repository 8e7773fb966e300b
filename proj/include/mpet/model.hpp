#pragma once

#include "mpet/types.hpp"

namespace mpet {

// Physical inputs of the n-network poroelastic model, before rescaling.
struct PhysicalParams {
  int n = 0;
  double lambda = 0.0; // first Lame parameter
  double mu = 0.0;     // second Lame parameter (not used after rescaling)
  double tau = 1.0;    // time step size
  Vector c_p;          // constrained specific storage, size n
  Vector alpha;        // Biot-Willis coefficients, size n
  Matrix beta;         // symmetric transfer coefficients, zero diagonal
  Vector K;            // hydraulic conductivities, size n

  void validate() const; // throws std::invalid_argument on violations
};

enum class LMode { Paper, Theory, Explicit };

enum class LambdaId { L1, L2, L3, L4, Sum, LL, Tilde, E };

// Per-time-step rescaled coefficients and the n x n network coupling
// matrices used by the solvers, the preconditioner and the analysis checks:
//   Rinv[i]       = alpha_i^2 / (tau K_i)
//   alpha_p[i]    = c_p[i] / alpha_i^2
//   alpha_c(i,j)  = tau beta_ij / (alpha_i alpha_j),  i != j
//   alpha_c(i,i)  = tau (sum_{j != i} beta_ij) / alpha_i^2
//   Lambda1       = diag(alpha_c(i,i)) - offdiag(alpha_c(i,j))
//   Lambda2       = diag(alpha_p),  Lambda3 = R I with R = 1/max_i Rinv[i]
//   Lambda4       = (1/lambda0) ones,  lambda0 = max(1, lambda)
//   Lambda        = Lambda1 + Lambda2 + Lambda3 + Lambda4
//   LambdaL       = L ones,  LambdaTilde = Lambda3 + Lambda4 + LambdaL
//   LambdaE       = Lambda + LambdaL
struct RescaledModel {
  int n = 0;
  double lambda = 0.0;
  double lambda0 = 1.0;
  double L = 0.0;   // stabilization parameter
  double eta = 0.0; // DG penalty
  double R = 0.0;

  Vector Rinv, alpha_p;
  Matrix alpha_c;
  Matrix Lambda1, Lambda2, Lambda3, Lambda4;
  Matrix Lambda, LambdaL, LambdaTilde, LambdaE;

  const Matrix &matrix(LambdaId which) const;
};

// L_arg is c_K^2 for LMode::Theory and the value of L for LMode::Explicit;
// it is ignored for LMode::Paper where L = 1/(1 + lambda).
RescaledModel rescale(const PhysicalParams &p, LMode mode, double L_arg,
                      double eta);

double lambda_quadratic_form(const RescaledModel &m, LambdaId which,
                             const Vector &x);

} // namespace mpet
