#pragma once

#include <array>
#include <vector>

#include "mpet/dofs.hpp"
#include "mpet/elements.hpp"
#include "mpet/mesh.hpp"
#include "mpet/model.hpp"
#include "mpet/types.hpp"

namespace mpet {

// Boundary data for one run. Clamped sides impose u = 0 (normal component
// strongly through the dof mask, tangential component through the DG
// boundary terms); all other sides are traction sides and contribute no
// displacement face terms. Pressures are Dirichlet everywhere and enter
// the flux equations through their natural boundary term.
struct BoundarySpec {
  std::array<bool, 4> clamped{false, false, false, false};
  std::array<Vector2, 4> traction{Vector2::Zero(), Vector2::Zero(),
                                  Vector2::Zero(), Vector2::Zero()};
  Matrix dirichlet_pressure; // n x 4, constant per network and side
  Vector2 body_force = Vector2::Zero();
  Vector source; // per-network constant g_i; empty means zero

  bool clamped_tag(int t) const { return clamped[size_t(t)]; }
};

struct ElasticityBlocks {
  SparseMatrix A_h;    // DG form a_h, constrained rows/cols zeroed
  SparseMatrix DivDiv; // (div u, div w), constrained rows/cols zeroed
  SparseMatrix A_uu;   // A_h + lambda DivDiv with unit diagonal on the mask
  Vector rhs_u;
  std::vector<int> constrained; // strongly constrained BDM1 dofs
};

struct FluxBlocks {
  std::vector<SparseMatrix> M_v; // (R_i^{-1} v, z) mass matrices
  SparseMatrix Dv;               // rows cells, entries (div z|_T) |T|
  std::vector<Vector> rhs_v;     // -int_Gamma p_i^D (z.n) ds
};

// All sparse blocks of the coupled discrete operator plus right-hand
// sides with the boundary data folded in. The monolithic matrix
//   [  A_uu     0     -Du^T (per network) ]
//   [   0    M_v[i]   -Dv^T               ]
//   [ -Du     -Dv     -C_pp               ]
// is symmetric.
struct BlockSystem {
  DofLayout layout;
  RescaledModel model;
  SparseMatrix A_h, DivDiv, A_uu;
  std::vector<SparseMatrix> M_v;
  SparseMatrix Du; // C x 2E
  SparseMatrix Dv; // C x E
  SparseMatrix C_pp;
  Vector rhs;
  std::vector<int> constrained;
  Vector cell_area;
};

ElasticityBlocks assemble_elasticity(const TriMesh &mesh, double lambda,
                                     double eta, const BoundarySpec &bc);

inline ElasticityBlocks assemble_elasticity(const TriMesh &mesh,
                                            const RescaledModel &m,
                                            const BoundarySpec &bc) {
  return assemble_elasticity(mesh, m.lambda, m.eta, bc);
}

FluxBlocks assemble_flux_blocks(const TriMesh &mesh, const RescaledModel &m,
                                const BoundarySpec &bc);

// M kron diag(cell areas), pressures ordered network-major.
SparseMatrix assemble_pressure_block(const TriMesh &mesh, const Matrix &M);

// Divergence coupling (div u, q) for BDM1 (columns 2E) or RT0 (columns E).
SparseMatrix assemble_divergence(const TriMesh &mesh, Space space);

// Matrix of the mesh-dependent norm ||u||_{1,h}^2 = sum_T ||grad u||^2
// + sum_e h_e^{-1} ||[u_t]||^2 over interior and clamped edges.
SparseMatrix assemble_u_norm_matrix(const TriMesh &mesh,
                                    const BoundarySpec &bc);

// Pass a pre-assembled elasticity block (built with the same mesh, lambda,
// eta and boundary spec) to skip its reassembly in parameter sweeps.
BlockSystem assemble_full(const TriMesh &mesh, const RescaledModel &m,
                          const BoundarySpec &bc,
                          const ElasticityBlocks *elasticity = nullptr);

SparseMatrix monolithic_matrix(const BlockSystem &sys);
Vector monolithic_apply(const BlockSystem &sys, const Vector &x);

// rhs - A x evaluated with compensated (error-free transformation)
// accumulation; keeps residual reductions measurable when lambda pushes
// the plain evaluation against the double-precision floor.
Vector monolithic_residual(const BlockSystem &sys, const Vector &x);

// Coordinate-format text export (row col value per line).
void export_matrix(const SparseMatrix &A, std::ostream &os);

} // namespace mpet
