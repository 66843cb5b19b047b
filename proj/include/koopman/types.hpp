#pragma once

#include <Eigen/Dense>
#include <complex>

namespace koopman {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Evaluated dictionary values: row i holds D(x_i), so the matrix is N x N_d
/// for N states and N_d dictionary functions.
using DataMatrix = Matrix;

}  // namespace koopman
