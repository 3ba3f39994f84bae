#include "ipmf/gauss.hpp"

#include "ipmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ipmf {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kKlNegativeTolerance = 1e-12;

void requireSymmetric(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw ShapeMismatchError(std::string(what) + " is not square");
    }
    if (m.size() == 0) {
        return;
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
        throw InvalidArgumentError(std::string(what) + " is not symmetric");
    }
}

void requirePsd(const Matrix& symmetric, const char* what) {
    const double lo = linalg::minEigenvalue(symmetric);
    const double scale = std::max(1.0, symmetric.cwiseAbs().maxCoeff());
    if (lo < -linalg::kNegativeEigenTolerance * scale) {
        throw NotPositiveSemidefiniteError(std::string(what) + " is not positive semidefinite (min eigenvalue " +
                                           std::to_string(lo) + ")");
    }
}

double klMoments(const Vector& meanP, const Matrix& covP, const Vector& meanQ, const Matrix& covQ) {
    if (meanP.size() != meanQ.size() || covP.rows() != covQ.rows()) {
        throw ShapeMismatchError("klGaussian: dimensions differ");
    }
    if (linalg::isNumericallySingular(covQ)) {
        throw SingularMatrixError("klGaussian: covariance of q is numerically singular");
    }
    Eigen::LLT<Matrix> lltQ(covQ);
    Eigen::LLT<Matrix> lltP(covP);
    if (lltP.info() != Eigen::Success) {
        return std::numeric_limits<double>::infinity();
    }
    const Vector diff = meanQ - meanP;
    const double trace = lltQ.solve(covP).trace();
    const double mahalanobis = diff.dot(lltQ.solve(diff));
    const double logDetQ = 2.0 * Matrix(lltQ.matrixL()).diagonal().array().log().sum();
    const double logDetP = 2.0 * Matrix(lltP.matrixL()).diagonal().array().log().sum();
    const auto dim = static_cast<double>(meanP.size());
    const double kl = 0.5 * (trace + mahalanobis - dim + logDetQ - logDetP);
    if (kl < 0.0) {
        const double scale = 1.0 + std::abs(trace) + std::abs(logDetQ) + std::abs(logDetP);
        if (kl < -kKlNegativeTolerance * scale) {
            throw FormulaDomainError("klGaussian: closed form returned " + std::to_string(kl));
        }
        return 0.0;
    }
    return kl;
}

} // namespace

Gaussian1D::Gaussian1D(double mean_, double variance_) : mean(mean_), variance(variance_) {
    if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
        throw InvalidArgumentError("Gaussian1D: variance must be finite and strictly positive");
    }
}

double Gaussian1D::stddev() const { return std::sqrt(variance); }

GaussianND::GaussianND(Vector mean, Matrix covariance) : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    if (covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size()) {
        throw ShapeMismatchError("GaussianND: mean and covariance sizes differ");
    }
    if (mean_.size() == 0) {
        throw InvalidArgumentError("GaussianND: empty distribution");
    }
    requireSymmetric(covariance_, "GaussianND covariance");
    covariance_ = linalg::symmetrize(covariance_);
    if (linalg::minEigenvalue(covariance_) <= 0.0) {
        throw InvalidArgumentError("GaussianND: covariance must be positive definite");
    }
}

GaussianND GaussianND::standard(Index dim) { return GaussianND(Vector::Zero(dim), Matrix::Identity(dim, dim)); }

GaussianND GaussianND::fromScalar(const Gaussian1D& g) {
    return GaussianND(Vector::Constant(1, g.mean), Matrix::Constant(1, 1, g.variance));
}

JointGaussian::JointGaussian(Vector mean0, Vector mean1, Matrix cov00, Matrix cov01, Matrix cov11)
    : mean0_(std::move(mean0)), mean1_(std::move(mean1)), cov00_(std::move(cov00)), cov01_(std::move(cov01)),
      cov11_(std::move(cov11)) {
    const Index d = mean0_.size();
    if (d == 0 || mean1_.size() != d || cov00_.rows() != d || cov00_.cols() != d || cov01_.rows() != d ||
        cov01_.cols() != d || cov11_.rows() != d || cov11_.cols() != d) {
        throw ShapeMismatchError("JointGaussian: block sizes disagree");
    }
    requireSymmetric(cov00_, "JointGaussian cov00");
    requireSymmetric(cov11_, "JointGaussian cov11");
    cov00_ = linalg::symmetrize(cov00_);
    cov11_ = linalg::symmetrize(cov11_);
    requirePsd(fullCovariance(), "JointGaussian covariance");
}

JointGaussian JointGaussian::fromScalar(double mean0, double std0, double mean1, double std1, double rho) {
    if (!(std0 > 0.0) || !(std1 > 0.0)) {
        throw InvalidArgumentError("JointGaussian::fromScalar: standard deviations must be positive");
    }
    if (!(std::abs(rho) <= 1.0)) {
        throw InvalidArgumentError("JointGaussian::fromScalar: correlation outside [-1, 1]");
    }
    return JointGaussian(Vector::Constant(1, mean0), Vector::Constant(1, mean1), Matrix::Constant(1, 1, std0 * std0),
                         Matrix::Constant(1, 1, rho * std0 * std1), Matrix::Constant(1, 1, std1 * std1));
}

JointGaussian JointGaussian::independent(const GaussianND& p0, const GaussianND& p1) {
    if (p0.dim() != p1.dim()) {
        throw ShapeMismatchError("JointGaussian::independent: marginal dimensions differ");
    }
    return JointGaussian(p0.mean(), p1.mean(), p0.covariance(), Matrix::Zero(p0.dim(), p0.dim()), p1.covariance());
}

GaussianND JointGaussian::marginal0() const { return GaussianND(mean0_, cov00_); }
GaussianND JointGaussian::marginal1() const { return GaussianND(mean1_, cov11_); }

Matrix JointGaussian::fullCovariance() const {
    const Index d = dim();
    Matrix full(2 * d, 2 * d);
    full.topLeftCorner(d, d) = cov00_;
    full.topRightCorner(d, d) = cov01_;
    full.bottomLeftCorner(d, d) = cov01_.transpose();
    full.bottomRightCorner(d, d) = cov11_;
    return full;
}

Vector JointGaussian::fullMean() const {
    Vector full(2 * dim());
    full << mean0_, mean1_;
    return full;
}

double JointGaussian::correlation() const {
    if (dim() != 1) {
        throw ShapeMismatchError("JointGaussian::correlation is defined for 1D couplings only");
    }
    return cov01_(0, 0) / std::sqrt(cov00_(0, 0) * cov11_(0, 0));
}

double JointGaussian::maxAbsDiff(const JointGaussian& a, const JointGaussian& b) {
    return std::max({linalg::maxAbsDiff(a.mean0_, b.mean0_), linalg::maxAbsDiff(a.mean1_, b.mean1_),
                     linalg::maxAbsDiff(a.cov00_, b.cov00_), linalg::maxAbsDiff(a.cov01_, b.cov01_),
                     linalg::maxAbsDiff(a.cov11_, b.cov11_)});
}

bool GaussianConditional::isDegenerate() const { return linalg::isNumericallySingular(noiseCov); }

GaussianConditional condition(const JointGaussian& joint, Direction direction, double floor) {
    const bool forward = direction == Direction::Forward;
    const Matrix& givenCov = forward ? joint.cov00() : joint.cov11();
    const Matrix& targetCov = forward ? joint.cov11() : joint.cov00();
    const Vector& givenMean = forward ? joint.mean0() : joint.mean1();
    const Vector& targetMean = forward ? joint.mean1() : joint.mean0();
    // cross = Cov(target, given)
    const Matrix cross = forward ? Matrix(joint.cov01().transpose()) : joint.cov01();

    const Matrix givenInv = linalg::inverseSpd(givenCov, "conditioned-on marginal covariance", floor);
    GaussianConditional out;
    out.regression = cross * givenInv;
    out.offset = targetMean - out.regression * givenMean;
    Matrix noise = linalg::symmetrize(targetCov - out.regression * cross.transpose());
    // Rounding can leave tiny negative eigenvalues in a degenerate noise block.
    Eigen::SelfAdjointEigenSolver<Matrix> solver(noise);
    if (solver.eigenvalues().minCoeff() < 0.0) {
        const double scale = std::max(1.0, targetCov.cwiseAbs().maxCoeff());
        if (solver.eigenvalues().minCoeff() < -linalg::kNegativeEigenTolerance * scale) {
            throw NotPositiveSemidefiniteError("condition: joint covariance is not PSD");
        }
        const Vector clamped = solver.eigenvalues().cwiseMax(0.0);
        noise = linalg::symmetrize(solver.eigenvectors() * clamped.asDiagonal() * solver.eigenvectors().transpose());
    }
    out.noiseCov = std::move(noise);
    return out;
}

JointGaussian compose(const GaussianND& start, const GaussianConditional& cond) {
    const Index d = start.dim();
    if (cond.regression.rows() != d || cond.regression.cols() != d || cond.offset.size() != d ||
        cond.noiseCov.rows() != d || cond.noiseCov.cols() != d) {
        throw ShapeMismatchError("compose: start marginal and conditional have different dimensions");
    }
    const Matrix& a = cond.regression;
    Matrix cov01 = start.covariance() * a.transpose();
    Matrix cov11 = linalg::symmetrize(a * start.covariance() * a.transpose() + cond.noiseCov);
    Vector mean1 = a * start.mean() + cond.offset;
    return JointGaussian(start.mean(), std::move(mean1), start.covariance(), std::move(cov01), std::move(cov11));
}

double klGaussian(const GaussianND& p, const GaussianND& q) {
    return klMoments(p.mean(), p.covariance(), q.mean(), q.covariance());
}

double klGaussian(const JointGaussian& p, const JointGaussian& q) {
    return klMoments(p.fullMean(), p.fullCovariance(), q.fullMean(), q.fullCovariance());
}

double bw2(const GaussianND& p, const GaussianND& q) {
    if (p.dim() != q.dim()) {
        throw ShapeMismatchError("bw2: dimensions differ");
    }
    const Matrix rootQ = linalg::psdSqrt(q.covariance());
    const Matrix cross = linalg::psdSqrt(rootQ * p.covariance() * rootQ);
    const double meanTerm = (p.mean() - q.mean()).squaredNorm();
    const double covTerm = p.covariance().trace() + q.covariance().trace() - 2.0 * cross.trace();
    return std::max(0.0, meanTerm + covTerm);
}

Matrix precisionCrossBlock(const JointGaussian& joint) {
    const Index d = joint.dim();
    const Matrix precision = linalg::inverseSpd(joint.fullCovariance(), "joint covariance");
    return -precision.topRightCorner(d, d);
}

} // namespace ipmf
