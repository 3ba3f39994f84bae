#pragma once

// Exact Gaussian algebra shared by the scalar and matrix engines: marginals,
// endpoint couplings, conditioning and divergences.

#include "ipmf/linalg.hpp"

namespace ipmf {

/// Scalar normal law N(mean, variance).
struct Gaussian1D {
    double mean = 0.0;
    double variance = 1.0;

    Gaussian1D(double mean, double variance);

    double stddev() const;
};

/// Multivariate normal law with symmetric positive-definite covariance.
class GaussianND {
public:
    GaussianND(Vector mean, Matrix covariance);

    static GaussianND standard(Index dim);
    static GaussianND fromScalar(const Gaussian1D& g);

    const Vector& mean() const { return mean_; }
    const Matrix& covariance() const { return covariance_; }
    Index dim() const { return mean_.size(); }

private:
    Vector mean_;
    Matrix covariance_;
};

/// Endpoint coupling q(x0, x1) stored blockwise. cov01 = E[(x0 - m0)(x1 - m1)^T];
/// the lower-left block of the full covariance is its transpose.
class JointGaussian {
public:
    JointGaussian(Vector mean0, Vector mean1, Matrix cov00, Matrix cov01, Matrix cov11);

    /// 1D coupling from (mean, std) of each end and the correlation.
    static JointGaussian fromScalar(double mean0, double std0, double mean1, double std1, double rho);

    /// Independent coupling p0 (x) p1.
    static JointGaussian independent(const GaussianND& p0, const GaussianND& p1);

    Index dim() const { return mean0_.size(); }

    const Vector& mean0() const { return mean0_; }
    const Vector& mean1() const { return mean1_; }
    const Matrix& cov00() const { return cov00_; }
    const Matrix& cov01() const { return cov01_; }
    const Matrix& cov11() const { return cov11_; }

    GaussianND marginal0() const;
    GaussianND marginal1() const;

    Matrix fullCovariance() const;
    Vector fullMean() const;

    /// cov01 / sqrt(cov00 * cov11); only defined for dim() == 1.
    double correlation() const;

    /// Max-norm distance over all mean and covariance blocks.
    static double maxAbsDiff(const JointGaussian& a, const JointGaussian& b);

private:
    Vector mean0_;
    Vector mean1_;
    Matrix cov00_;
    Matrix cov01_;
    Matrix cov11_;
};

/// x_target | x_given ~ N(regression * x_given + offset, noiseCov).
struct GaussianConditional {
    Matrix regression;
    Vector offset;
    Matrix noiseCov;

    Index dim() const { return offset.size(); }

    /// True when the noise covariance is numerically singular (deterministic or
    /// partially deterministic map), e.g. conditioning a perfectly correlated joint.
    bool isDegenerate() const;
};

enum class Direction {
    Forward,  ///< x1 | x0 (or x_{k+1} | x_k along a chain)
    Backward, ///< x0 | x1 (or x_k | x_{k+1})
};

/// Conditional of one end given the other. Throws SingularMatrixError when the
/// conditioned-on block is numerically singular under `floor`.
GaussianConditional condition(const JointGaussian& joint, Direction direction,
                              double floor = linalg::kSingularityFloor);

/// Joint of x0 ~ start and x1 | x0 ~ cond. Inverse of condition(joint, Forward).
JointGaussian compose(const GaussianND& start, const GaussianConditional& cond);

/// Closed-form KL(p || q). Clamped at zero from below; +inf when p is singular.
double klGaussian(const GaussianND& p, const GaussianND& q);
double klGaussian(const JointGaussian& p, const JointGaussian& q);

/// Squared Bures-Wasserstein (Gaussian W2^2) distance.
double bw2(const GaussianND& p, const GaussianND& q);

/// Negated (x0, x1) block of the inverse of the full joint covariance. For a 1D
/// joint with stds (s, s') and correlation rho this is rho / (s s' (1 - rho^2)).
Matrix precisionCrossBlock(const JointGaussian& joint);

} // namespace ipmf
