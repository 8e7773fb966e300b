#include "mpet/sparse.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace mpet {

Vector spmv(const SparseMatrix &A, const Vector &x) {
  if (A.cols() != x.size())
    throw std::invalid_argument("spmv: dimension mismatch");
  return A * x;
}

Vector residual_compensated(const SparseMatrix &A, const Vector &b,
                            const Vector &x) {
  if (A.rows() != b.size() || A.cols() != x.size())
    throw std::invalid_argument("residual_compensated: dimension mismatch");
  Vector r(b.size());
  for (int row = 0; row < A.outerSize(); ++row) {
    Compensated acc;
    acc.add(b[row]);
    for (SparseMatrix::InnerIterator it(A, row); it; ++it)
      acc.add_product(-it.value(), x[it.col()]);
    r[row] = acc.value();
  }
  return r;
}

PrecondFn identity_preconditioner() {
  return [](const Vector &r) { return r; };
}

CgResult cg(const SparseMatrix &A, const Vector &b, const PrecondFn &M,
            double rel_tol, int max_iter, Vector &x) {
  if (A.rows() != A.cols() || A.cols() != b.size())
    throw std::invalid_argument("cg: dimension mismatch");
  if (x.size() != b.size())
    x = Vector::Zero(b.size());

  CgResult result;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    result.converged = true;
    return result;
  }

  Vector r = b - A * x;
  if (r.norm() <= rel_tol * bnorm) {
    result.converged = true;
    result.residual = r.norm();
    return result;
  }
  Vector z = M(r);
  Vector p = z;
  double rz = r.dot(z);

  for (int it = 1; it <= max_iter; ++it) {
    const Vector q = A * p;
    const double pq = p.dot(q);
    if (pq <= 0.0)
      throw std::runtime_error("cg: operator not positive definite");
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    result.iterations = it;
    result.residual = r.norm();
    if (result.residual <= rel_tol * bnorm) {
      // Guard against drift of the recursive residual: accept only if the
      // recomputed true residual meets the tolerance, else restart from it.
      r = b - A * x;
      result.residual = r.norm();
      if (result.residual <= rel_tol * bnorm) {
        result.converged = true;
        return result;
      }
      z = M(r);
      p = z;
      rz = r.dot(z);
      continue;
    }
    z = M(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return result; // converged == false
}

MinresResult minres(const SparseMatrix &A, const Vector &b, const PrecondFn &P,
                    double reduction, int max_iter, Vector &x) {
  if (A.rows() != A.cols() || A.cols() != b.size())
    throw std::invalid_argument("minres: dimension mismatch");
  if (x.size() != b.size())
    x = Vector::Zero(b.size());
  else
    x.setZero(); // contract: zero initial guess

  MinresResult result;
  Vector r1 = b;
  Vector y = P(r1);
  double beta1 = r1.dot(y);
  if (beta1 < 0.0)
    throw std::runtime_error("minres: preconditioner not positive definite");
  beta1 = std::sqrt(beta1);
  result.history.push_back(beta1);
  if (beta1 == 0.0) {
    result.converged = true;
    return result;
  }
  const double target = beta1 / reduction;

  // Paige-Saunders recurrences with left preconditioning.
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0;
  double phibar = beta1, cs = -1.0, sn = 0.0;
  Vector r2 = r1;
  Vector w = Vector::Zero(b.size());
  Vector w2 = Vector::Zero(b.size());

  for (int itn = 1; itn <= max_iter; ++itn) {
    const Vector v = y / beta;
    y = A * v;
    if (itn >= 2)
      y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = P(r2);
    oldb = beta;
    const double betasq = r2.dot(y);
    if (betasq < 0.0)
      throw std::runtime_error("minres: preconditioner not positive definite");
    beta = std::sqrt(betasq);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::hypot(gbar, beta);
    gamma = std::max(gamma, std::numeric_limits<double>::epsilon());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    const Vector w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;

    result.iterations = itn;
    result.history.push_back(phibar);
    if (phibar <= target || beta == 0.0) {
      result.converged = true;
      return result;
    }
  }
  return result;
}

bool is_spd(const Matrix &M) {
  if (M.rows() != M.cols())
    return false;
  Eigen::LLT<Matrix> llt(M);
  return llt.info() == Eigen::Success;
}

Vector cell_block_solve(const Matrix &M, const Vector &areas,
                        const Vector &rhs) {
  const int n = int(M.rows());
  const int C = int(areas.size());
  if (M.cols() != n || rhs.size() != n * C)
    throw std::invalid_argument("cell_block_solve: dimension mismatch");
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("cell_block_solve: cell block not SPD");

  Vector result(n * C);
  Vector local(n);
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < n; ++i)
      local[i] = rhs[i * C + c];
    Vector y = llt.solve(local);
    y += llt.solve(local - M * y); // refinement for ill-conditioned blocks
    y /= areas[c];
    for (int i = 0; i < n; ++i)
      result[i * C + c] = y[i];
  }
  return result;
}

} // namespace mpet
