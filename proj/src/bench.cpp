#include "mpet/bench.hpp"

#include <stdexcept>

namespace mpet {

PhysicalParams barenblatt_params(UnitMode units,
                                 const BarenblattScales &scales) {
  PhysicalParams p;
  p.n = 2;
  p.tau = scales.tau;
  // The two modes differ in the Pa-vs-MPa reading of the elastic moduli;
  // the storage, transfer and conductivity values carry explicit
  // power-of-ten factors in the published table and are base-unit in both.
  if (units == UnitMode::Si) {
    p.lambda = 4.2e6;
    p.mu = 2.4e6;
  } else {
    p.lambda = 4.2;
    p.mu = 2.4;
  }
  p.c_p = Vector(2);
  p.c_p << 54e-9, 14e-9;
  p.lambda *= scales.lambda_scale;
  p.alpha = Vector(2);
  p.alpha << 0.95, 0.12;
  p.beta = Matrix::Zero(2, 2);
  p.beta(0, 1) = p.beta(1, 0) = scales.beta;
  p.K = Vector(2);
  p.K << 6.18e-15 * scales.K1_scale, 27.2e-15 * scales.K2_scale;
  p.validate();
  return p;
}

PhysicalParams mpet4_params(UnitMode units, const Mpet4Scales &scales) {
  (void)units; // printed values are base-unit already
  PhysicalParams p;
  p.n = 4;
  p.tau = scales.tau;
  p.lambda = 505.0 * scales.lambda_scale;
  p.mu = 216.0;
  p.c_p = Vector::Constant(4, 4.5e-10);
  p.alpha = Vector::Constant(4, 0.99);
  p.beta = Matrix::Zero(4, 4);
  p.beta(0, 1) = p.beta(1, 0) = 1.5e-19; // beta_12
  p.beta(1, 3) = p.beta(3, 1) = 1.5e-19; // beta_24
  p.beta(1, 2) = p.beta(2, 1) = 2.0e-19; // beta_23
  p.beta(2, 3) = p.beta(3, 2) = 1.0e-13; // beta_34
  const double K = (1.0e-10 / 2.67e-3) * scales.K_scale;
  const double K3 = (1.4e-14 / 8.9e-4) * scales.K3_scale;
  p.K = Vector(4);
  p.K << K, K, K3, K;
  p.validate();
  return p;
}

BoundarySpec cantilever_bc(const Vector &dirichlet_pressure) {
  BoundarySpec bc;
  bc.clamped[int(BoundaryTag::Gamma4)] = true;
  bc.traction[int(BoundaryTag::Gamma3)] = Vector2(0.0, -1.0);
  bc.dirichlet_pressure =
      dirichlet_pressure * Eigen::RowVector4d::Ones(); // same on every side
  return bc;
}

Vector benchmark_pressures(int n) {
  if (n == 2) {
    Vector p(2);
    p << 2.0, 20.0;
    return p;
  }
  if (n == 4) {
    Vector p(4);
    p << 2.0, 20.0, 30.0, 40.0;
    return p;
  }
  throw std::invalid_argument("benchmark_pressures: n must be 2 or 4");
}

} // namespace mpet
