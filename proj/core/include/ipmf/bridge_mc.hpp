#pragma once

// Monte-Carlo counterparts of the matrix engine, plus a grid Sinkhorn solver
// for 1D entropic OT between Gaussians.

#include "ipmf/matrix.hpp"

#include <cstdint>

namespace ipmf::mc {

/// M sampled trajectories; row m holds slices 0..N+1 back to back, D entries each.
struct TrajectoryBatch {
    TimeGrid grid;
    Index dim = 0;
    std::uint64_t seed = 0;
    Matrix samples;

    Index count() const { return samples.rows(); }
    Vector slice(Index sample, int k) const;
};

/// Discrete Brownian bridge with volatility epsilon pinned at x0 (t=0) and x1 (t=1).
TrajectoryBatch sampleBridge(const Vector& x0, const Vector& x1, const TimeGrid& grid, double epsilon,
                             int count, std::uint64_t seed);

/// I.i.d. draws from the full joint law of the process.
TrajectoryBatch sampleProcess(const matrix::DiscreteGaussProcess& proc, int count, std::uint64_t seed);

/// Endpoint pairs drawn from `joint`, interiors filled by the Brownian bridge.
TrajectoryBatch sampleReciprocal(const JointGaussian& joint, const TimeGrid& grid, double epsilon, int count,
                                 std::uint64_t seed);

struct Moments {
    Vector mean;
    Matrix covariance;
};

/// Sample mean and unbiased covariance (divisor M - 1) over the flattened trajectories.
Moments empiricalMoments(const TrajectoryBatch& batch);

/// Discretized entropic OT plan between two 1D Gaussians.
struct GridPlan {
    Vector xGrid;
    Vector yGrid;
    Vector sourceWeights;
    Vector targetWeights;
    Matrix plan;
    int iterations = 0;
    double marginalError = 0.0;

    double correlation() const;
};

struct SinkhornOptions {
    double tolerance = 1e-10;
    int maxIterations = 100000;
};

/// Plan minimizing E[(chi/2)(x - y)^2] - H(plan) over couplings of the grid
/// discretizations of p and pPrime. Grids cover mean +- span * max(std, std').
/// For chi < 0 the equivalent cost -(chi/2)(x + y)^2 is used. Throws
/// ConvergenceError when the marginal error stays above tolerance.
GridPlan sinkhornPlan(const Gaussian1D& p, const Gaussian1D& pPrime, double chi, int gridSize = 400,
                      double span = 6.0, const SinkhornOptions& options = {});

} // namespace ipmf::mc
