#pragma once

#include "ipmf/gauss.hpp"
#include "ipmf/rng.hpp"
#include "ipmf/scalar.hpp"

namespace ipmf::fixtures {

inline Matrix randomMatrix(Rng& rng, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            m(i, j) = rng.normal();
        }
    }
    return m;
}

inline Vector randomVector(Rng& rng, Index n, double scale = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v(i) = scale * rng.normal();
    }
    return v;
}

// Well-conditioned SPD matrix: G G^T / d + floor I.
inline Matrix randomSpd(Rng& rng, Index d, double floor = 0.2) {
    const Matrix g = randomMatrix(rng, d, d);
    return linalg::symmetrize(g * g.transpose() / static_cast<double>(d) + floor * Matrix::Identity(d, d));
}

inline GaussianND randomGaussian(Rng& rng, Index d) { return GaussianND(randomVector(rng, d), randomSpd(rng, d)); }

// Generic coupling: full covariance drawn as one SPD matrix, so cov01 is not symmetric.
inline JointGaussian randomJoint(Rng& rng, Index d) {
    const Matrix full = randomSpd(rng, 2 * d, 0.1);
    const Vector mean = randomVector(rng, 2 * d);
    return JointGaussian(mean.head(d), mean.tail(d), full.topLeftCorner(d, d), full.topRightCorner(d, d),
                         full.bottomRightCorner(d, d));
}

// Instance family used by the rate properties: sigma in [0.5, 2], |mu| <= 2,
// epsilon in {0.1, 1, 10}, rho in (-0.99, 0.99).
struct ScalarCase {
    scalar::ScalarProblem problem;
    scalar::ScalarIterate start;
};

inline ScalarCase randomScalarCase(Rng& rng) {
    static constexpr double kEps[] = {0.1, 1.0, 10.0};
    ScalarCase c;
    c.problem.mu0 = rng.uniform(-2.0, 2.0);
    c.problem.sigma0 = rng.uniform(0.5, 2.0);
    c.problem.mu1 = rng.uniform(-2.0, 2.0);
    c.problem.sigma1 = rng.uniform(0.5, 2.0);
    c.problem.epsilon = kEps[rng.below(3)];
    c.start.nu = rng.uniform(-2.0, 2.0);
    c.start.s = rng.uniform(0.5, 2.0);
    c.start.rho = rng.uniform(-0.99, 0.99);
    c.start.side = scalar::Side::StartsAtP0;
    return c;
}

} // namespace ipmf::fixtures
