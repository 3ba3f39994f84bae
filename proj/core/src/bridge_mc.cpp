#include "ipmf/bridge_mc.hpp"

#include "ipmf/errors.hpp"
#include "ipmf/rng.hpp"

#include <cmath>

namespace ipmf::mc {

namespace {

void requireCount(int count, const char* where) {
    if (count < 1) {
        throw InvalidArgumentError(std::string(where) + ": count must be at least 1");
    }
}

// Fill interior slices of row `m` given its endpoint slices, walking forward in time.
void fillBridge(Matrix& samples, Index m, Index d, const TimeGrid& grid, double epsilon, Rng& rng) {
    const int n = grid.size();
    const Index last = static_cast<Index>(n - 1) * d;
    for (int k = 1; k + 1 < n; ++k) {
        const double tPrev = grid[k - 1];
        const double t = grid[k];
        const double remaining = 1.0 - tPrev;
        const double weight = (t - tPrev) / remaining;
        const double sd = std::sqrt(epsilon * (t - tPrev) * (1.0 - t) / remaining);
        const Index prev = static_cast<Index>(k - 1) * d;
        const Index cur = static_cast<Index>(k) * d;
        for (Index i = 0; i < d; ++i) {
            const double a = samples(m, prev + i);
            const double b = samples(m, last + i);
            samples(m, cur + i) = a + weight * (b - a) + sd * rng.normal();
        }
    }
}

} // namespace

Vector TrajectoryBatch::slice(Index sample, int k) const {
    return samples.row(sample).segment(static_cast<Index>(k) * dim, dim).transpose();
}

TrajectoryBatch sampleBridge(const Vector& x0, const Vector& x1, const TimeGrid& grid, double epsilon,
                             int count, std::uint64_t seed) {
    requireCount(count, "sampleBridge");
    if (!(epsilon > 0.0)) {
        throw InvalidArgumentError("sampleBridge: epsilon must be positive");
    }
    if (x0.size() != x1.size() || x0.size() < 1) {
        throw ShapeMismatchError("sampleBridge: endpoint dimensions differ");
    }
    const Index d = x0.size();
    const Index width = static_cast<Index>(grid.size()) * d;
    TrajectoryBatch out{grid, d, seed, Matrix(count, width)};
    Rng rng(seed);
    for (Index m = 0; m < count; ++m) {
        out.samples.row(m).segment(0, d) = x0.transpose();
        out.samples.row(m).segment(width - d, d) = x1.transpose();
        fillBridge(out.samples, m, d, grid, epsilon, rng);
    }
    return out;
}

TrajectoryBatch sampleProcess(const matrix::DiscreteGaussProcess& proc, int count, std::uint64_t seed) {
    requireCount(count, "sampleProcess");
    const Matrix factor = linalg::psdFactor(proc.jointCov);
    const Index width = proc.jointCov.rows();
    TrajectoryBatch out{proc.grid, proc.dim, seed, Matrix(count, width)};
    Rng rng(seed);
    Vector z(width);
    for (Index m = 0; m < count; ++m) {
        for (Index i = 0; i < width; ++i) {
            z(i) = rng.normal();
        }
        out.samples.row(m) = (proc.jointMean + factor * z).transpose();
    }
    return out;
}

TrajectoryBatch sampleReciprocal(const JointGaussian& joint, const TimeGrid& grid, double epsilon, int count,
                                 std::uint64_t seed) {
    requireCount(count, "sampleReciprocal");
    if (!(epsilon > 0.0)) {
        throw InvalidArgumentError("sampleReciprocal: epsilon must be positive");
    }
    const Index d = joint.dim();
    const Index width = static_cast<Index>(grid.size()) * d;
    const Matrix factor = linalg::psdFactor(joint.fullCovariance());
    const Vector mean = joint.fullMean();
    TrajectoryBatch out{grid, d, seed, Matrix(count, width)};
    Rng rng(seed);
    Vector z(2 * d);
    for (Index m = 0; m < count; ++m) {
        for (Index i = 0; i < 2 * d; ++i) {
            z(i) = rng.normal();
        }
        const Vector ends = mean + factor * z;
        out.samples.row(m).segment(0, d) = ends.head(d).transpose();
        out.samples.row(m).segment(width - d, d) = ends.tail(d).transpose();
        fillBridge(out.samples, m, d, grid, epsilon, rng);
    }
    return out;
}

Moments empiricalMoments(const TrajectoryBatch& batch) {
    const Index m = batch.count();
    if (m < 2) {
        throw InvalidArgumentError("empiricalMoments: need at least two samples");
    }
    Moments out;
    out.mean = batch.samples.colwise().mean().transpose();
    const Matrix centered = batch.samples.rowwise() - out.mean.transpose();
    out.covariance = (centered.transpose() * centered) / static_cast<double>(m - 1);
    return out;
}

} // namespace ipmf::mc
