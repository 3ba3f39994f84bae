#pragma once

// D-dimensional discrete-time Gaussian IPMF. Every projection acts exactly on
// the dense covariance of all time slices.

#include "ipmf/gauss.hpp"
#include "ipmf/time_grid.hpp"

#include <optional>
#include <vector>

namespace ipmf::matrix {

enum class ProcessTag { Reciprocal, MarkovForward, MarkovBackward, General };

/// Gaussian law of (x_{t_0}, ..., x_{t_{N+1}}), stored as one dense
/// (N+2)D x (N+2)D covariance with slice k occupying rows [kD, (k+1)D).
struct DiscreteGaussProcess {
    TimeGrid grid;
    Index dim = 0;
    Vector jointMean;
    Matrix jointCov;
    ProcessTag tag = ProcessTag::General;

    int slices() const { return grid.size(); }
    Matrix block(int i, int j) const;
    Vector sliceMean(int k) const;
    GaussianND sliceMarginal(int k) const;

    /// Law of (x_0, x_1).
    JointGaussian endpoints() const;

    /// Throws NotPositiveSemidefiniteError / ShapeMismatchError when the
    /// covariance is inconsistent with the grid or not PSD.
    void validate() const;
};

struct MatrixProblem {
    GaussianND p0;
    GaussianND p1;
    double epsilon = 0.3;
    TimeGrid grid = TimeGrid::uniform(1);

    Index dim() const { return p0.dim(); }
    void validate() const;
};

enum class StartKind { Imf, Ipf, IndependentP0P0, Custom };

struct StartCoupling {
    StartKind kind = StartKind::Imf;
    std::optional<JointGaussian> custom;

    static StartCoupling imf() { return {StartKind::Imf, std::nullopt}; }
    static StartCoupling ipf() { return {StartKind::Ipf, std::nullopt}; }
    static StartCoupling independentP0P0() { return {StartKind::IndependentP0P0, std::nullopt}; }
    static StartCoupling fromJoint(JointGaussian joint) { return {StartKind::Custom, std::move(joint)}; }
};

enum class Pin { P0, P1 };

/// Endpoint law of the Wiener prior with volatility epsilon started at p0.
JointGaussian wienerJoint(const MatrixProblem& problem);

JointGaussian makeStart(const MatrixProblem& problem, const StartCoupling& start);

/// Glue the endpoint coupling to the discrete Brownian bridge on problem.grid.
DiscreteGaussProcess reciprocalProject(const JointGaussian& joint, const MatrixProblem& problem);

/// Adjacent-slice conditionals: Forward gives x_{k+1} | x_k, Backward gives
/// x_k | x_{k+1}, for k = 0..N.
std::vector<GaussianConditional> transitions(const DiscreteGaussProcess& proc, Direction direction);

/// Markov chain from an initial marginal (Forward) or a terminal marginal
/// (Backward) and the matching transitions.
DiscreteGaussProcess buildChain(const TimeGrid& grid, const GaussianND& anchor,
                                const std::vector<GaussianConditional>& steps, Direction direction);

/// Markov chain with the input's slice marginals and adjacent-slice transitions.
DiscreteGaussProcess markovProject(const DiscreteGaussProcess& proc, Direction direction);

/// Replace the marginal at the pinned end by its target and re-propagate the
/// transitions. Pin::P1 needs a MarkovBackward process, Pin::P0 a MarkovForward one.
DiscreteGaussProcess ipfProject(const DiscreteGaussProcess& proc, Pin which, const MatrixProblem& problem);

/// reciprocal -> backward Markov + pin p1 -> reciprocal -> forward Markov + pin p0.
JointGaussian ipmfRoundMatrix(const JointGaussian& joint, const MatrixProblem& problem);

struct SbOracleOptions {
    double tolerance = 1e-12;
    int maxRounds = 10000;
};

struct SbOracleResult {
    JointGaussian joint;
    int rounds = 0;
    double lastChange = 0.0;
};

/// Static bridge solution as the fixed point of ipmfRoundMatrix iterated from the
/// independent coupling p0 (x) p1. Throws ConvergenceError at the round cap.
SbOracleResult solveSbOracle(const MatrixProblem& problem, const SbOracleOptions& options = {});
JointGaussian sbOracle(const MatrixProblem& problem);

/// max |precisionCrossBlock(joint) - I / epsilon|; zero exactly at the static bridge solution.
double optimalityCertificate(const JointGaussian& joint, double epsilon);

} // namespace ipmf::matrix
