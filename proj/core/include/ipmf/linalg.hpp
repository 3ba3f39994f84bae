#pragma once

#include <Eigen/Dense>

namespace ipmf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

namespace linalg {

/// Relative floor below which a symmetric matrix counts as numerically singular:
/// min eigenvalue < kSingularityFloor * max eigenvalue.
inline constexpr double kSingularityFloor = 1e-12;

/// Eigenvalues down to -kNegativeEigenTolerance are treated as rounding noise and clamped.
inline constexpr double kNegativeEigenTolerance = 1e-10;

/// (M + M^T) / 2.
Matrix symmetrize(const Matrix& m);

double minEigenvalue(const Matrix& symmetric);

/// True when min eigenvalue < floor * max eigenvalue (or the matrix is all zero).
bool isNumericallySingular(const Matrix& symmetric, double floor = kSingularityFloor);

/// Inverse of a symmetric positive-definite matrix; throws SingularMatrixError
/// when the matrix is numerically singular. `what` names the operand in the message.
Matrix inverseSpd(const Matrix& symmetric, const char* what = "matrix",
                  double floor = kSingularityFloor);

/// Symmetric square root through eigendecomposition. Eigenvalues in
/// [-kNegativeEigenTolerance, 0) are clamped to zero; anything more negative
/// raises NotPositiveSemidefiniteError.
Matrix psdSqrt(const Matrix& symmetric);

/// Factor L with L L^T = symmetric, valid for singular PSD input (eigen-based).
Matrix psdFactor(const Matrix& symmetric);

/// Largest absolute entry of a - b.
double maxAbsDiff(const Matrix& a, const Matrix& b);

/// log det of a symmetric positive-definite matrix.
double logDetSpd(const Matrix& symmetric, const char* what = "matrix");

} // namespace linalg
} // namespace ipmf
