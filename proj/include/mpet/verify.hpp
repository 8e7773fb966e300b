#pragma once

#include "mpet/bench.hpp"
#include "mpet/splitsolve.hpp"

namespace mpet {

// Independently coded dense assembly of every block (own basis
// construction in physical coordinates, own degree-6/4-point quadrature,
// dense storage). Intended for cross-checking the sparse assembly on tiny
// meshes.
struct DenseBlocks {
  Matrix A_h, DivDiv, A_uu;
  std::vector<Matrix> M_v;
  Matrix Du, Dv, C_pp;
  Matrix monolithic;
  Vector rhs;
};

DenseBlocks dense_oracle(const TriMesh &mesh, const RescaledModel &m,
                         const BoundarySpec &bc);

// High-accuracy monolithic solve: dense LU for small systems, otherwise
// MinRes restarted on the true residual down to a 1e13 reduction.
Vector reference_solve(const BlockSystem &sys, const BlockPreconditioner &P);

// Discrete inf-sup constant of the div / sum-pressure pairing measured in
// the ||.||_{1,h} norm on the given displacement space.
double estimate_infsup(const TriMesh &mesh, const BoundarySpec &bc);

// Discrete Korn-type constant c_{K_d}^2 with a_h(w,w) >= c_{K_d}^2 ||div w||^2
// (lambda excluded from the elasticity block).
double estimate_ckd(const TriMesh &mesh, const BoundarySpec &bc, double eta);

struct Lemma2Report {
  int trials = 0;
  int violations = 0;
  bool tilde_sum_ok = false;
  double tilde_sum = 0.0;
  double tilde_sum_bound = 0.0;
  bool pass() const { return violations == 0 && tilde_sum_ok; }
};

// Randomized check of the Lambda matrix orderings and the row-sum bound of
// the inverse of LambdaTilde.
Lemma2Report check_lemma2(const RescaledModel &m, int trials,
                          unsigned seed = 7u);

struct ContractionAudit {
  std::vector<double> ratios; // ||sum e_p^{m+1}|| / ||sum e_p^m||
  double bound = 0.0;         // from the general rate estimate
  double worst_ratio = 0.0;
  bool pass = true;
};

// Runs the fixed-stress iteration against a reference solution and compares
// each contraction ratio with the rate bound evaluated at beta_sd. Ratios
// are dropped once ||sum e_p|| falls below 1e-11 of its initial value.
ContractionAudit contraction_audit(const BlockSystem &sys,
                                   const BlockPreconditioner &P,
                                   const Vector &reference, double beta_sd,
                                   const FixedStressOptions &opts = {});

struct EnergyAudit {
  int checked = 0;
  double worst_violation = 0.0; // max of (lhs - rhs) / scale
  bool pass = true;
};

// Per-iteration energy inequality of the split: the full iterate energy of
// the errors is bounded by (L/2) ||sum e_p^m||^2 of the previous iterate.
EnergyAudit energy_audit(const BlockSystem &sys,
                         const std::vector<Vector> &iterates,
                         const Vector &reference, double rel_slack = 1e-8);

// Max cellwise mass-balance residual of the pressure rows, recomputed from
// exact signed edge fluxes, relative to the local term magnitudes.
double conservation_check(const BlockSystem &sys, const TriMesh &mesh,
                          const Vector &solution);

// Rate bound of the general contraction estimate for given L, lambda and
// inf-sup constant.
double contraction_rate_bound(double L, double lambda, double beta_sd);

} // namespace mpet
