#include "ipmf/linalg.hpp"

#include "ipmf/errors.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace ipmf::linalg {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double minEigenvalue(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

bool isNumericallySingular(const Matrix& symmetric, double floor) {
    if (symmetric.size() == 0) {
        return true;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    const double hi = ev.maxCoeff();
    return !(hi > 0.0) || ev.minCoeff() < floor * hi;
}

Matrix inverseSpd(const Matrix& symmetric, const char* what, double floor) {
    if (isNumericallySingular(symmetric, floor)) {
        throw SingularMatrixError(std::string(what) + " is numerically singular");
    }
    Eigen::LDLT<Matrix> ldlt(symmetric);
    Matrix inv = ldlt.solve(Matrix::Identity(symmetric.rows(), symmetric.cols()));
    return symmetrize(inv);
}

Matrix psdSqrt(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(symmetric));
    Vector ev = solver.eigenvalues();
    for (Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -kNegativeEigenTolerance) {
            throw NotPositiveSemidefiniteError("matrix square root of a non-PSD matrix (eigenvalue " +
                                               std::to_string(ev(i)) + ")");
        }
        ev(i) = ev(i) < 0.0 ? 0.0 : std::sqrt(ev(i));
    }
    const Matrix& v = solver.eigenvectors();
    return symmetrize(v * ev.asDiagonal() * v.transpose());
}

Matrix psdFactor(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(symmetric));
    Vector ev = solver.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -kNegativeEigenTolerance * scale) {
            throw NotPositiveSemidefiniteError("cannot factor a non-PSD covariance (eigenvalue " +
                                               std::to_string(ev(i)) + ")");
        }
        ev(i) = ev(i) < 0.0 ? 0.0 : std::sqrt(ev(i));
    }
    return solver.eigenvectors() * ev.asDiagonal();
}

double maxAbsDiff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeMismatchError("maxAbsDiff: shapes differ");
    }
    if (a.size() == 0) {
        return 0.0;
    }
    return (a - b).cwiseAbs().maxCoeff();
}

double logDetSpd(const Matrix& symmetric, const char* what) {
    Eigen::LLT<Matrix> llt(symmetric);
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError(std::string(what) + " is not positive definite");
    }
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

} // namespace ipmf::linalg
