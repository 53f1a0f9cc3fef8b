#pragma once

// Small dense linear-algebra helpers shared across the library: column
// stacking (vectorisation), Kronecker products, Hermitian symmetrisation and
// a matrix exponential.

#include <Eigen/Dense>

namespace cpqbm {

// Column-stacking vectorisation: vec(M)(i + j*dim) = M(i, j).
Eigen::VectorXcd vec(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int dim);

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// (m + m^dag)/2 and the entrywise deviation max |m - m^dag|.
Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& m);
double hermiticity_defect(const Eigen::MatrixXcd& m);

// Matrix exponential by scaling-and-squaring with a fixed-order [13/13]
// diagonal Pade approximant (the classic double-precision choice: scale so
// the 1-norm is below ~5.37, apply the rational approximant, square back).
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a);

}  // namespace cpqbm
