#include "ipmf/bridge_mc.hpp"
#include "ipmf/errors.hpp"
#include "ipmf/scalar.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ipmf;
using namespace ipmf::mc;

TEST(Rng, DeterministicAndInRange) {
    Rng a(7), b(7), c(8);
    bool differs = false;
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GT(u, 0.0);
        EXPECT_LT(u, 1.0);
        differs = differs || u != c.uniform();
    }
    EXPECT_TRUE(differs);
    EXPECT_NE(deriveSeed(1, 0), deriveSeed(1, 1));
    EXPECT_NE(deriveSeed(1, 0), deriveSeed(2, 0));
}

TEST(Rng, NormalMoments) {
    Rng rng(9);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(SampleBridge, EndpointsExactAndDeterministic) {
    const Vector x0 = Vector::LinSpaced(3, -1.0, 1.0);
    const Vector x1 = Vector::Constant(3, 0.25);
    const auto grid = TimeGrid::uniform(4);
    const auto a = sampleBridge(x0, x1, grid, 0.7, 50, 3);
    const auto b = sampleBridge(x0, x1, grid, 0.7, 50, 3);
    EXPECT_TRUE(a.samples == b.samples);
    for (Index m = 0; m < a.count(); ++m) {
        EXPECT_TRUE(a.slice(m, 0) == x0);
        EXPECT_TRUE(a.slice(m, 5) == x1);
    }
    EXPECT_THROW(sampleBridge(x0, x1, grid, 0.0, 5, 1), InvalidArgumentError);
    EXPECT_THROW(sampleBridge(x0, x1, grid, 1.0, 0, 1), InvalidArgumentError);
}

TEST(SampleBridge, TinyNoiseFollowsStraightLine) {
    const Vector x0 = Vector::Constant(2, -1.0);
    const Vector x1 = Vector::Constant(2, 3.0);
    const auto grid = TimeGrid::uniform(3);
    const auto batch = sampleBridge(x0, x1, grid, 1e-14, 10, 4);
    for (Index m = 0; m < batch.count(); ++m) {
        for (int k = 1; k <= 3; ++k) {
            EXPECT_LT((batch.slice(m, k) - ((1 - grid[k]) * x0 + grid[k] * x1)).cwiseAbs().maxCoeff(), 1e-6);
        }
    }
}

TEST(SampleBridge, MidpointVariance) {
    const int m = 100000;
    const auto batch = sampleBridge(Vector::Zero(1), Vector::Zero(1), TimeGrid::uniform(1), 1.0, m, 5);
    const auto mom = empiricalMoments(batch);
    const double v = mom.covariance(1, 1);
    EXPECT_NEAR(v, 0.25, 3.0 * 0.25 * std::sqrt(2.0 / m));
}

TEST(SampleProcess, ZeroCovarianceAndDeterminism) {
    matrix::DiscreteGaussProcess proc{TimeGrid::uniform(1), 2, Vector::LinSpaced(6, 0, 5), Matrix::Zero(6, 6),
                                      matrix::ProcessTag::General};
    const auto batch = sampleProcess(proc, 20, 1);
    for (Index i = 0; i < batch.count(); ++i) {
        EXPECT_LT((batch.samples.row(i).transpose() - proc.jointMean).cwiseAbs().maxCoeff(), 1e-15);
    }
    Rng rng(2);
    const matrix::MatrixProblem p{fixtures::randomGaussian(rng, 2), fixtures::randomGaussian(rng, 2), 0.5,
                                  TimeGrid::uniform(2)};
    const auto r = matrix::reciprocalProject(fixtures::randomJoint(rng, 2), p);
    EXPECT_TRUE(sampleProcess(r, 100, 11).samples == sampleProcess(r, 100, 11).samples);
    EXPECT_FALSE(sampleProcess(r, 100, 11).samples == sampleProcess(r, 100, 12).samples);
}

TEST(SampleProcess, EmpiricalCovarianceWithinStandardErrors) {
    Rng rng(3);
    const matrix::MatrixProblem p{fixtures::randomGaussian(rng, 2), fixtures::randomGaussian(rng, 2), 0.5,
                                  TimeGrid::uniform(1)};
    const auto proc = matrix::reciprocalProject(fixtures::randomJoint(rng, 2), p);
    const int m = 100000;
    const auto mom = empiricalMoments(sampleProcess(proc, m, 21));
    const Matrix& s = proc.jointCov;
    int outside = 0;
    for (Index i = 0; i < s.rows(); ++i) {
        EXPECT_NEAR(mom.mean(i), proc.jointMean(i), 5.0 * std::sqrt(s(i, i) / m));
        for (Index j = i; j < s.cols(); ++j) {
            const double se = std::sqrt((s(i, i) * s(j, j) + s(i, j) * s(i, j)) / m);
            outside += std::abs(mom.covariance(i, j) - s(i, j)) > 3.0 * se ? 1 : 0;
        }
    }
    // 21 entries at the 3-sigma level.
    EXPECT_LE(outside, 1);
}

TEST(EmpiricalMoments, ConstantPermutationAndMinimumCount) {
    TrajectoryBatch batch{TimeGrid::uniform(1), 1, 0, Matrix::Constant(5, 3, 2.0)};
    const auto c = empiricalMoments(batch);
    EXPECT_EQ(c.covariance.cwiseAbs().maxCoeff(), 0.0);
    const auto b = sampleBridge(Vector::Zero(2), Vector::Ones(2), TimeGrid::uniform(2), 1.0, 200, 1);
    TrajectoryBatch reversed = b;
    reversed.samples = b.samples.colwise().reverse();
    const auto m1 = empiricalMoments(b);
    const auto m2 = empiricalMoments(reversed);
    EXPECT_LT((m1.mean - m2.mean).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT(linalg::maxAbsDiff(m1.covariance, m2.covariance), 1e-13);
    batch.samples = Matrix::Zero(1, 3);
    EXPECT_THROW(empiricalMoments(batch), InvalidArgumentError);
}

TEST(Sinkhorn, ZeroChiGivesProductPlan) {
    const auto plan = sinkhornPlan(Gaussian1D(0.5, 1.0), Gaussian1D(-1.0, 2.25), 0.0);
    EXPECT_NEAR(plan.correlation(), 0.0, 1e-12);
    EXPECT_LT(linalg::maxAbsDiff(plan.plan, plan.sourceWeights * plan.targetWeights.transpose()), 1e-12);
}

TEST(Sinkhorn, RecoversPositiveAndNegativeCorrelation) {
    const double chi = scalar::xi(0.5, 1.0, 1.0);
    EXPECT_NEAR(sinkhornPlan(Gaussian1D(0, 1), Gaussian1D(0, 1), chi).correlation(), 0.5, 1e-2);
    EXPECT_NEAR(sinkhornPlan(Gaussian1D(0, 1), Gaussian1D(0, 1), -chi).correlation(), -0.5, 1e-2);
}

TEST(Sinkhorn, MarginalsMatchGridWeights) {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const double rho = rng.uniform(-0.9, 0.9);
        const double s = rng.uniform(0.5, 2.0), sp = rng.uniform(0.5, 2.0);
        const auto plan = sinkhornPlan(Gaussian1D(rng.normal(), s * s), Gaussian1D(rng.normal(), sp * sp),
                                       scalar::xi(rho, s, sp));
        const Vector rows = plan.plan.rowwise().sum();
        const Vector cols = plan.plan.colwise().sum().transpose();
        EXPECT_LT(0.5 * (rows - plan.sourceWeights).cwiseAbs().sum(), 1e-8);
        EXPECT_LT(0.5 * (cols - plan.targetWeights).cwiseAbs().sum(), 1e-8);
        EXPECT_GE(plan.plan.minCoeff(), 0.0);
        EXPECT_NEAR(plan.correlation(), rho, 1e-6);
    }
}

TEST(Sinkhorn, Preconditions) {
    EXPECT_THROW(sinkhornPlan(Gaussian1D(0, 1), Gaussian1D(0, 1), 1.0, 99), InvalidArgumentError);
    EXPECT_THROW(sinkhornPlan(Gaussian1D(0, 1), Gaussian1D(0, 1), 1.0, 400, 4.0), InvalidArgumentError);
    EXPECT_THROW(sinkhornPlan(Gaussian1D(0, 1), Gaussian1D(0, 1), 5.0, 400, 6.0, SinkhornOptions{1e-300, 3}),
                 ConvergenceError);
}
