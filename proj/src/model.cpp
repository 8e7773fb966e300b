#include "mpet/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpet {

void PhysicalParams::validate() const {
  auto fail = [](const char *msg) { throw std::invalid_argument(msg); };
  if (n < 1)
    fail("PhysicalParams: n must be >= 1");
  if (!(lambda > 0))
    fail("PhysicalParams: lambda must be positive");
  if (!(tau > 0))
    fail("PhysicalParams: tau must be positive");
  if (c_p.size() != n || alpha.size() != n || K.size() != n ||
      beta.rows() != n || beta.cols() != n)
    fail("PhysicalParams: inconsistent array sizes");
  for (int i = 0; i < n; ++i) {
    if (!(alpha[i] > 0))
      fail("PhysicalParams: alpha must be positive");
    if (!(K[i] > 0))
      fail("PhysicalParams: K must be positive");
    if (c_p[i] < 0)
      fail("PhysicalParams: c_p must be nonnegative");
  }
  for (int i = 0; i < n; ++i) {
    if (beta(i, i) != 0.0)
      fail("PhysicalParams: beta must have zero diagonal");
    for (int j = 0; j < n; ++j) {
      if (beta(i, j) < 0)
        fail("PhysicalParams: beta must be nonnegative");
      if (beta(i, j) != beta(j, i))
        fail("PhysicalParams: beta must be symmetric");
    }
  }
}

RescaledModel rescale(const PhysicalParams &p, LMode mode, double L_arg,
                      double eta) {
  p.validate();
  if (!(eta > 0))
    throw std::invalid_argument("rescale: eta must be positive");

  RescaledModel m;
  m.n = p.n;
  m.lambda = p.lambda;
  m.lambda0 = std::max(1.0, p.lambda);
  m.eta = eta;

  switch (mode) {
  case LMode::Paper:
    m.L = 1.0 / (1.0 + p.lambda);
    break;
  case LMode::Theory:
    if (!(L_arg > 0))
      throw std::invalid_argument("rescale: theory mode needs cK2 > 0");
    m.L = 1.0 / (p.lambda + L_arg);
    break;
  case LMode::Explicit:
    if (!(L_arg > 0))
      throw std::invalid_argument("rescale: explicit L must be positive");
    m.L = L_arg;
    break;
  }

  const int n = p.n;
  m.Rinv.resize(n);
  m.alpha_p.resize(n);
  for (int i = 0; i < n; ++i) {
    m.Rinv[i] = p.alpha[i] * p.alpha[i] / (p.tau * p.K[i]);
    m.alpha_p[i] = p.c_p[i] / (p.alpha[i] * p.alpha[i]);
  }
  m.R = 1.0 / m.Rinv.maxCoeff();

  m.alpha_c = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i)
        continue;
      m.alpha_c(i, j) = p.tau * p.beta(i, j) / (p.alpha[i] * p.alpha[j]);
      row_sum += p.tau * p.beta(i, j);
    }
    m.alpha_c(i, i) = row_sum / (p.alpha[i] * p.alpha[i]);
  }

  m.Lambda1 = -m.alpha_c;
  m.Lambda1.diagonal() = m.alpha_c.diagonal();
  m.Lambda2 = m.alpha_p.asDiagonal();
  m.Lambda3 = m.R * Matrix::Identity(n, n);
  m.Lambda4 = Matrix::Constant(n, n, 1.0 / m.lambda0);
  m.Lambda = m.Lambda1 + m.Lambda2 + m.Lambda3 + m.Lambda4;
  m.LambdaL = Matrix::Constant(n, n, m.L);
  m.LambdaTilde = m.Lambda3 + m.Lambda4 + m.LambdaL;
  m.LambdaE = m.Lambda + m.LambdaL;
  return m;
}

const Matrix &RescaledModel::matrix(LambdaId which) const {
  switch (which) {
  case LambdaId::L1: return Lambda1;
  case LambdaId::L2: return Lambda2;
  case LambdaId::L3: return Lambda3;
  case LambdaId::L4: return Lambda4;
  case LambdaId::Sum: return Lambda;
  case LambdaId::LL: return LambdaL;
  case LambdaId::Tilde: return LambdaTilde;
  default: return LambdaE;
  }
}

double lambda_quadratic_form(const RescaledModel &m, LambdaId which,
                             const Vector &x) {
  if (x.size() != m.n)
    throw std::invalid_argument("lambda_quadratic_form: size mismatch");
  if (!x.allFinite())
    throw std::invalid_argument("lambda_quadratic_form: x must be finite");
  return x.dot(m.matrix(which) * x);
}

} // namespace mpet
