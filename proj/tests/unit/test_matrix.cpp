#include "ipmf/errors.hpp"
#include "ipmf/matrix.hpp"
#include "ipmf/scalar.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ipmf;
using namespace ipmf::matrix;
using ipmf::fixtures::randomGaussian;
using ipmf::fixtures::randomJoint;

namespace {

MatrixProblem randomProblem(Rng& rng, Index d, double eps, int interior = 1) {
    return MatrixProblem{randomGaussian(rng, d), randomGaussian(rng, d), eps, TimeGrid::uniform(interior)};
}

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }

MatrixProblem scalarProblem(const scalar::ScalarProblem& p, int interior = 1) {
    return MatrixProblem{GaussianND(Vector::Constant(1, p.mu0), m1(p.sigma0 * p.sigma0)),
                         GaussianND(Vector::Constant(1, p.mu1), m1(p.sigma1 * p.sigma1)), p.epsilon,
                         TimeGrid::uniform(interior)};
}

} // namespace

TEST(TimeGrid, ValidatesAndBuildsUniform) {
    const auto g = TimeGrid::uniform(3);
    EXPECT_EQ(g.size(), 5);
    EXPECT_EQ(g.interiorCount(), 3);
    EXPECT_DOUBLE_EQ(g[2], 0.5);
    EXPECT_THROW(TimeGrid({0.0, 1.0}), InvalidArgumentError);
    EXPECT_THROW(TimeGrid({0.0, 0.5, 0.5, 1.0}), InvalidArgumentError);
    EXPECT_THROW(TimeGrid({0.1, 0.5, 1.0}), InvalidArgumentError);
    EXPECT_THROW(TimeGrid::uniform(0), InvalidArgumentError);
}

TEST(WienerJoint, ScalarValuesAndMarginal) {
    const MatrixProblem p{GaussianND(Vector::Zero(1), m1(1.0)), GaussianND(Vector::Zero(1), m1(2.0)), 0.3,
                          TimeGrid::uniform(1)};
    const auto j = wienerJoint(p);
    EXPECT_EQ(j.cov00()(0, 0), 1.0);
    EXPECT_EQ(j.cov01()(0, 0), 1.0);
    EXPECT_NEAR(j.cov11()(0, 0), 1.3, 1e-15);
    Rng rng(51);
    const auto q = randomProblem(rng, 4, 1e-9);
    const auto w = wienerJoint(q);
    EXPECT_EQ(linalg::maxAbsDiff(w.cov00(), q.p0.covariance()), 0.0);
    EXPECT_LT(linalg::maxAbsDiff(w.cov11(), q.p0.covariance()), 1e-8);
}

TEST(MakeStart, Kinds) {
    Rng rng(52);
    const auto p = randomProblem(rng, 3, 0.3);
    const auto imf = makeStart(p, StartCoupling::imf());
    EXPECT_EQ(imf.cov01().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(linalg::maxAbsDiff(imf.cov11(), p.p1.covariance()), 0.0);
    const auto ipf = makeStart(p, StartCoupling::ipf());
    EXPECT_GT(linalg::maxAbsDiff(ipf.cov11(), p.p1.covariance()), 1e-3);
    const auto pp = makeStart(p, StartCoupling::independentP0P0());
    EXPECT_EQ(linalg::maxAbsDiff(pp.cov11(), p.p0.covariance()), 0.0);
    EXPECT_THROW(makeStart(p, StartCoupling{StartKind::Custom, std::nullopt}), InvalidArgumentError);
    EXPECT_THROW(makeStart(p, StartCoupling::fromJoint(randomJoint(rng, 2))), ShapeMismatchError);
}

TEST(Reciprocal, HandValues) {
    const MatrixProblem p{GaussianND::standard(1), GaussianND::standard(1), 1.0, TimeGrid::uniform(1)};
    const auto proc = reciprocalProject(JointGaussian::independent(p.p0, p.p1), p);
    EXPECT_NEAR(proc.block(1, 1)(0, 0), 0.75, 1e-15);

    Rng rng(53);
    const Matrix s = ipmf::fixtures::randomSpd(rng, 3);
    const JointGaussian same(Vector::Zero(3), Vector::Zero(3), s, s, s);
    const MatrixProblem q{GaussianND(Vector::Zero(3), s), GaussianND(Vector::Zero(3), s), 0.4, TimeGrid::uniform(4)};
    const auto r = reciprocalProject(same, q);
    for (int k = 0; k < 6; ++k) {
        const double t = q.grid[k];
        EXPECT_LT(linalg::maxAbsDiff(r.block(k, k), s + t * (1 - t) * 0.4 * Matrix::Identity(3, 3)), 1e-14);
    }
}

TEST(Reciprocal, MatchesConditioningOracleAndKeepsEndpoints) {
    Rng rng(54);
    for (int trial = 0; trial < 30; ++trial) {
        const auto d = static_cast<Index>(1 + rng.below(4));
        const int interior = 1 + static_cast<int>(rng.below(5));
        const auto p = randomProblem(rng, d, rng.uniform(0.1, 3.0), interior);
        const auto j = randomJoint(rng, d);
        const auto proc = reciprocalProject(j, p);
        EXPECT_EQ(proc.tag, ProcessTag::Reciprocal);
        const Matrix oracle = ipmf::fixtures::reciprocalCovOracle(j.cov00(), j.cov01(), j.cov11(), p.epsilon, p.grid);
        EXPECT_LT(linalg::maxAbsDiff(proc.jointCov, oracle), 1e-10);
        const auto e = proc.endpoints();
        EXPECT_EQ(JointGaussian::maxAbsDiff(e, j), 0.0);
        EXPECT_NO_THROW(proc.validate());
    }
}

TEST(Markov, IdempotentOnWienerPrior) {
    Rng rng(55);
    const auto p = randomProblem(rng, 3, 0.7, 4);
    const auto prior = reciprocalProject(wienerJoint(p), p);
    for (auto dir : {Direction::Forward, Direction::Backward}) {
        const auto m = markovProject(prior, dir);
        EXPECT_LT(linalg::maxAbsDiff(m.jointCov, prior.jointCov), 1e-10);
        EXPECT_LT((m.jointMean - prior.jointMean).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Markov, PreservesMarginalsAndHasBlockTridiagonalPrecision) {
    Rng rng(56);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = static_cast<Index>(1 + rng.below(3));
        const int interior = 2 + static_cast<int>(rng.below(3));
        const auto p = randomProblem(rng, d, rng.uniform(0.2, 2.0), interior);
        const auto proc = reciprocalProject(randomJoint(rng, d), p);
        for (auto dir : {Direction::Forward, Direction::Backward}) {
            const auto m = markovProject(proc, dir);
            EXPECT_EQ(m.tag, dir == Direction::Forward ? ProcessTag::MarkovForward : ProcessTag::MarkovBackward);
            for (int k = 0; k < proc.slices(); ++k) {
                EXPECT_LT(linalg::maxAbsDiff(m.block(k, k), proc.block(k, k)), 1e-10);
                EXPECT_LT((m.sliceMean(k) - proc.sliceMean(k)).cwiseAbs().maxCoeff(), 1e-10);
            }
            for (int k = 0; k + 1 < proc.slices(); ++k) {
                EXPECT_LT(linalg::maxAbsDiff(m.block(k, k + 1), proc.block(k, k + 1)), 1e-10);
            }
            const Matrix prec = m.jointCov.inverse();
            const double scale = prec.cwiseAbs().maxCoeff();
            for (int i = 0; i < proc.slices(); ++i) {
                for (int j = i + 2; j < proc.slices(); ++j) {
                    EXPECT_LT(prec.block(i * d, j * d, d, d).cwiseAbs().maxCoeff(), 1e-8 * scale);
                }
            }
        }
    }
}

TEST(Markov, ScalarEndpointCorrelationMatchesImfStep) {
    Rng rng(57);
    for (int trial = 0; trial < 200; ++trial) {
        const double s = rng.uniform(0.5, 2.0), sp = rng.uniform(0.5, 2.0);
        const double rho = rng.uniform(-0.99, 0.99), eps = rng.uniform(0.1, 5.0);
        const double t = rng.uniform(0.05, 0.95);
        const MatrixProblem p{GaussianND(Vector::Zero(1), m1(s * s)), GaussianND(Vector::Zero(1), m1(sp * sp)), eps,
                              TimeGrid({0.0, t, 1.0})};
        const auto m = markovProject(reciprocalProject(JointGaussian::fromScalar(0, s, 0, sp, rho), p),
                                     Direction::Forward);
        EXPECT_NEAR(m.endpoints().correlation(), scalar::rhoNewDiscrete(rho, s, sp, t, eps), 1e-12);
    }
}

TEST(Markov, FineGridApproachesContinuousUpdate) {
    const double s = 1.3, sp = 0.8, rho = -0.4, eps = 0.6;
    const auto run = [&](int n) {
        const MatrixProblem p{GaussianND(Vector::Zero(1), m1(s * s)), GaussianND(Vector::Zero(1), m1(sp * sp)), eps,
                              TimeGrid::uniform(n)};
        return markovProject(reciprocalProject(JointGaussian::fromScalar(0, s, 0, sp, rho), p), Direction::Forward)
            .endpoints()
            .correlation();
    };
    const double extrapolated = 2.0 * run(511) - run(255);
    EXPECT_NEAR(extrapolated, scalar::rhoNewContinuousFormula(rho, s, sp, eps), 1e-5);
}

TEST(Ipf, PinsTargetExactlyAndKeepsTransitions) {
    Rng rng(58);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = static_cast<Index>(1 + rng.below(4));
        const auto p = randomProblem(rng, d, rng.uniform(0.2, 2.0), 1 + static_cast<int>(rng.below(3)));
        const auto proc = reciprocalProject(randomJoint(rng, d), p);
        const auto back = markovProject(proc, Direction::Backward);
        const auto pinned = ipfProject(back, Pin::P1, p);
        const int last = proc.slices() - 1;
        EXPECT_TRUE(pinned.block(last, last) == p.p1.covariance());
        EXPECT_TRUE(pinned.sliceMean(last) == p.p1.mean());
        const auto before = transitions(back, Direction::Backward);
        const auto after = transitions(pinned, Direction::Backward);
        for (std::size_t k = 0; k < before.size(); ++k) {
            EXPECT_LT(linalg::maxAbsDiff(before[k].regression, after[k].regression), 1e-12);
            EXPECT_LT(linalg::maxAbsDiff(before[k].noiseCov, after[k].noiseCov), 1e-12);
            EXPECT_LT((before[k].offset - after[k].offset).cwiseAbs().maxCoeff(), 1e-11);
        }
        const auto fwd = markovProject(proc, Direction::Forward);
        const auto pinned0 = ipfProject(fwd, Pin::P0, p);
        EXPECT_TRUE(pinned0.block(0, 0) == p.p0.covariance());
        EXPECT_TRUE(pinned0.sliceMean(0) == p.p0.mean());
    }
}

TEST(Ipf, NoOpWhenTargetAlreadyMatches) {
    Rng rng(59);
    const auto p = randomProblem(rng, 3, 0.5, 2);
    const auto proc = markovProject(reciprocalProject(makeStart(p, StartCoupling::imf()), p), Direction::Forward);
    const auto again = ipfProject(proc, Pin::P0, p);
    EXPECT_LT(linalg::maxAbsDiff(again.jointCov, proc.jointCov), 1e-12);
}

TEST(Ipf, RejectsWrongTag) {
    Rng rng(60);
    const auto p = randomProblem(rng, 2, 0.5);
    const auto proc = reciprocalProject(makeStart(p, StartCoupling::imf()), p);
    EXPECT_THROW(ipfProject(proc, Pin::P1, p), TagMismatchError);
    EXPECT_THROW(ipfProject(markovProject(proc, Direction::Forward), Pin::P1, p), TagMismatchError);
    EXPECT_THROW(ipfProject(markovProject(proc, Direction::Backward), Pin::P0, p), TagMismatchError);
}

TEST(Ipf, ScalarPipelineMatchesIpfStep) {
    Rng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
        const auto c = ipmf::fixtures::randomScalarCase(rng);
        const auto p = scalarProblem(c.problem);
        const auto proc = markovProject(reciprocalProject(scalar::toJoint(c.start, c.problem), p), Direction::Backward);
        const auto e = ipfProject(proc, Pin::P1, p).endpoints();
        const auto expected = scalar::ipfStep(scalar::imfStepDiscrete(c.start, c.problem, 0.5), c.problem);
        EXPECT_NEAR(e.correlation(), expected.rho, 1e-11);
        EXPECT_NEAR(std::sqrt(e.cov00()(0, 0)), expected.s, 1e-11);
        EXPECT_NEAR(e.mean0()(0), expected.nu, 1e-11);
        EXPECT_NEAR(optimalityCertificate(e, p.epsilon),
                    std::abs(scalar::chiOf(expected, c.problem) - 1.0 / p.epsilon), 1e-9);
    }
}

TEST(IpmfRoundMatrix, ScalarRoundsMatchScalarEngine) {
    Rng rng(62);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = ipmf::fixtures::randomScalarCase(rng);
        const auto p = scalarProblem(c.problem);
        auto it = c.start;
        auto joint = scalar::toJoint(it, c.problem);
        for (int k = 0; k < 50; ++k) {
            it = scalar::ipmfRound(it, c.problem, scalar::ImfMode::discrete(0.5));
            joint = ipmfRoundMatrix(joint, p);
            ASSERT_NEAR(joint.correlation(), it.rho, 1e-10);
            ASSERT_NEAR(std::sqrt(joint.cov11()(0, 0)), it.s, 1e-10);
            ASSERT_NEAR(joint.mean1()(0), it.nu, 1e-10);
        }
    }
}

TEST(SbOracle, ScalarMatchesRhoStar) {
    Rng rng(63);
    for (int trial = 0; trial < 10; ++trial) {
        const scalar::ScalarProblem sp{rng.uniform(-1, 1), rng.uniform(0.5, 2), rng.uniform(-1, 1),
                                       rng.uniform(0.5, 2), rng.uniform(0.2, 3)};
        const auto p = scalarProblem(sp);
        const auto res = solveSbOracle(p);
        EXPECT_NEAR(res.joint.correlation(), scalar::rhoStar(sp.sigma0, sp.sigma1, sp.epsilon), 1e-9);
        EXPECT_LT(optimalityCertificate(res.joint, sp.epsilon), 1e-9);
    }
}

TEST(SbOracle, DiagonalProblemSeparatesIntoCoordinates) {
    Vector a(3), b(3), m0(3), m1v(3);
    a << 0.6, 1.0, 1.8;
    b << 1.5, 0.7, 1.1;
    m0 << 0.1, -0.4, 0.0;
    m1v << 1.0, 0.2, -0.5;
    const MatrixProblem p{GaussianND(m0, a.asDiagonal().toDenseMatrix()), GaussianND(m1v, b.asDiagonal().toDenseMatrix()),
                          0.3, TimeGrid::uniform(1)};
    const auto q = sbOracle(p);
    for (Index i = 0; i < 3; ++i) {
        const double r = q.cov01()(i, i) / std::sqrt(q.cov00()(i, i) * q.cov11()(i, i));
        EXPECT_NEAR(r, scalar::rhoStar(std::sqrt(a(i)), std::sqrt(b(i)), 0.3), 1e-9);
        for (Index j = 0; j < 3; ++j) {
            if (i != j) {
                EXPECT_LT(std::abs(q.cov01()(i, j)), 1e-10);
            }
        }
    }
}

TEST(SbOracle, FixedPointCertificateAndMarginals) {
    Rng rng(64);
    const auto p = randomProblem(rng, 4, 0.5);
    const auto q = sbOracle(p);
    EXPECT_LT(JointGaussian::maxAbsDiff(ipmfRoundMatrix(q, p), q), 1e-10);
    EXPECT_LT(optimalityCertificate(q, p.epsilon), 1e-8);
    EXPECT_LT(linalg::maxAbsDiff(q.cov00(), p.p0.covariance()), 1e-10);
    EXPECT_LT(linalg::maxAbsDiff(q.cov11(), p.p1.covariance()), 1e-10);
    EXPECT_LT((q.mean1() - p.p1.mean()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SbOracle, RoundCapRaises) {
    Rng rng(65);
    const auto p = randomProblem(rng, 2, 0.3);
    EXPECT_THROW(solveSbOracle(p, SbOracleOptions{1e-12, 3}), ConvergenceError);
}

TEST(OptimalityCertificate, IndependentAndScalarOptimum) {
    Rng rng(66);
    const auto p = randomProblem(rng, 3, 0.25);
    EXPECT_NEAR(optimalityCertificate(makeStart(p, StartCoupling::imf()), 0.25), 4.0, 1e-14);
    const double r = scalar::rhoStar(1.2, 0.9, 0.4);
    EXPECT_LT(optimalityCertificate(JointGaussian::fromScalar(0, 1.2, 0, 0.9, r), 0.4), 1e-12);
    EXPECT_THROW(optimalityCertificate(JointGaussian::fromScalar(0, 1, 0, 1, 1.0), 1.0), SingularMatrixError);
}
