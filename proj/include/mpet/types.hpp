#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mpet {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector2 = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;

// Compressed-row storage throughout; column indices are sorted and unique
// per row once the matrix is compressed.
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;
using SparseMatrixCol = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;
using Triplet = Eigen::Triplet<Scalar>;

} // namespace mpet
