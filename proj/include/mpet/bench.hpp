#pragma once

#include "mpet/assembly.hpp"
#include "mpet/model.hpp"

namespace mpet {

// Two readings of the published parameter tables: Si expands the printed
// values to base units (Pa, Pa^-1, ...); PaperRaw keeps the printed
// numbers verbatim. Both are exposed because the normalization behind the
// published iteration counts is not recoverable from the tables alone.
enum class UnitMode { Si, PaperRaw };

struct BarenblattScales {
  double lambda_scale = 1.0;
  double K1_scale = 1.0;
  double K2_scale = 1.0;
  double beta = 5e-10; // printed choices: 5e-10 and 1e-8
  double tau = 1.0;
};

// Two-network cantilever bracket model.
PhysicalParams barenblatt_params(UnitMode units,
                                 const BarenblattScales &scales = {});

struct Mpet4Scales {
  double lambda_scale = 1.0;
  double K_scale = 1.0;  // applied to K1 = K2 = K4
  double K3_scale = 1.0;
  double tau = 1.0;
};

// Four-network model; the printed values are base-unit already, so both
// unit modes coincide.
PhysicalParams mpet4_params(UnitMode units, const Mpet4Scales &scales = {});

// Cantilever bracket boundary data: u = 0 on the left side, traction
// (0,-1) on top and traction-free bottom/right; constant Dirichlet
// pressures on the whole boundary.
BoundarySpec cantilever_bc(const Vector &dirichlet_pressure);

// Dirichlet pressure values 2, 20 (two networks) or 2, 20, 30, 40 (four).
Vector benchmark_pressures(int n);

} // namespace mpet
