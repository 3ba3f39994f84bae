#include "ipmf/matrix.hpp"

#include "ipmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ipmf::matrix {

namespace {

Index offsetOf(int slice, Index dim) { return static_cast<Index>(slice) * dim; }

void requireSameGrid(const TimeGrid& a, const TimeGrid& b, const char* where) {
    if (!(a == b)) {
        throw ShapeMismatchError(std::string(where) + ": time grids differ");
    }
}

const char* tagName(ProcessTag tag) {
    switch (tag) {
    case ProcessTag::Reciprocal: return "reciprocal";
    case ProcessTag::MarkovForward: return "markovForward";
    case ProcessTag::MarkovBackward: return "markovBackward";
    case ProcessTag::General: return "general";
    }
    return "unknown";
}

// Pair law of two slices, exposed as a JointGaussian so gauss-core conditioning applies.
JointGaussian slicePair(const DiscreteGaussProcess& proc, int i, int j) {
    return JointGaussian(proc.sliceMean(i), proc.sliceMean(j), proc.block(i, i), proc.block(i, j), proc.block(j, j));
}

} // namespace

Matrix DiscreteGaussProcess::block(int i, int j) const {
    return jointCov.block(offsetOf(i, dim), offsetOf(j, dim), dim, dim);
}

Vector DiscreteGaussProcess::sliceMean(int k) const { return jointMean.segment(offsetOf(k, dim), dim); }

GaussianND DiscreteGaussProcess::sliceMarginal(int k) const { return GaussianND(sliceMean(k), block(k, k)); }

JointGaussian DiscreteGaussProcess::endpoints() const { return slicePair(*this, 0, slices() - 1); }

void DiscreteGaussProcess::validate() const {
    const Index total = static_cast<Index>(slices()) * dim;
    if (dim < 1 || jointMean.size() != total || jointCov.rows() != total || jointCov.cols() != total) {
        throw ShapeMismatchError("DiscreteGaussProcess: shapes do not match grid and dimension");
    }
    const double scale = std::max(1.0, jointCov.cwiseAbs().maxCoeff());
    if (linalg::maxAbsDiff(jointCov, jointCov.transpose()) > 1e-12 * scale) {
        throw InvalidArgumentError("DiscreteGaussProcess: covariance is not symmetric");
    }
    if (linalg::minEigenvalue(jointCov) < -linalg::kNegativeEigenTolerance * scale) {
        throw NotPositiveSemidefiniteError("DiscreteGaussProcess: covariance is not PSD");
    }
}

void MatrixProblem::validate() const {
    if (p0.dim() != p1.dim()) {
        throw ShapeMismatchError("MatrixProblem: p0 and p1 have different dimensions");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw InvalidArgumentError("MatrixProblem: epsilon must be positive and finite");
    }
}

JointGaussian wienerJoint(const MatrixProblem& problem) {
    problem.validate();
    const Index d = problem.dim();
    const Matrix& s0 = problem.p0.covariance();
    return JointGaussian(problem.p0.mean(), problem.p0.mean(), s0, s0,
                         s0 + problem.epsilon * Matrix::Identity(d, d));
}

JointGaussian makeStart(const MatrixProblem& problem, const StartCoupling& start) {
    problem.validate();
    switch (start.kind) {
    case StartKind::Imf:
        return JointGaussian::independent(problem.p0, problem.p1);
    case StartKind::Ipf:
        return wienerJoint(problem);
    case StartKind::IndependentP0P0:
        return JointGaussian::independent(problem.p0, problem.p0);
    case StartKind::Custom:
        if (!start.custom) {
            throw InvalidArgumentError("makeStart: custom start without a joint");
        }
        if (start.custom->dim() != problem.dim()) {
            throw ShapeMismatchError("makeStart: custom joint dimension differs from the problem");
        }
        return *start.custom;
    }
    throw InvalidArgumentError("makeStart: unknown start kind");
}

DiscreteGaussProcess reciprocalProject(const JointGaussian& joint, const MatrixProblem& problem) {
    problem.validate();
    if (joint.dim() != problem.dim()) {
        throw ShapeMismatchError("reciprocalProject: joint dimension differs from the problem");
    }
    const Index d = joint.dim();
    const TimeGrid& grid = problem.grid;
    const int n = grid.size();
    const Matrix& c00 = joint.cov00();
    const Matrix& c01 = joint.cov01();
    const Matrix c10 = c01.transpose();
    const Matrix& c11 = joint.cov11();
    const Matrix eye = Matrix::Identity(d, d);

    DiscreteGaussProcess out{grid, d, Vector(n * d), Matrix(n * d, n * d), ProcessTag::Reciprocal};
    for (int i = 0; i < n; ++i) {
        const double s = grid[i];
        out.jointMean.segment(offsetOf(i, d), d) = (1.0 - s) * joint.mean0() + s * joint.mean1();
        for (int j = i; j < n; ++j) {
            const double t = grid[j];
            // Cov(x_s, x_t) for s <= t: linear interpolation of the endpoint law plus bridge noise.
            Matrix b = (1.0 - s) * (1.0 - t) * c00 + (1.0 - s) * t * c01 + s * (1.0 - t) * c10 + s * t * c11;
            b += problem.epsilon * s * (1.0 - t) * eye;
            if (i == j) {
                b = linalg::symmetrize(b);
            }
            out.jointCov.block(offsetOf(i, d), offsetOf(j, d), d, d) = b;
            if (j != i) {
                out.jointCov.block(offsetOf(j, d), offsetOf(i, d), d, d) = b.transpose();
            }
        }
    }
    // Endpoint blocks copied verbatim.
    out.jointMean.segment(0, d) = joint.mean0();
    out.jointMean.segment(offsetOf(n - 1, d), d) = joint.mean1();
    out.jointCov.block(0, 0, d, d) = c00;
    out.jointCov.block(0, offsetOf(n - 1, d), d, d) = c01;
    out.jointCov.block(offsetOf(n - 1, d), 0, d, d) = c10;
    out.jointCov.block(offsetOf(n - 1, d), offsetOf(n - 1, d), d, d) = c11;
    return out;
}

std::vector<GaussianConditional> transitions(const DiscreteGaussProcess& proc, Direction direction) {
    std::vector<GaussianConditional> out;
    out.reserve(static_cast<std::size_t>(proc.slices() - 1));
    for (int k = 0; k + 1 < proc.slices(); ++k) {
        out.push_back(condition(slicePair(proc, k, k + 1), direction));
    }
    return out;
}

DiscreteGaussProcess buildChain(const TimeGrid& grid, const GaussianND& anchor,
                                const std::vector<GaussianConditional>& steps, Direction direction) {
    const int n = grid.size();
    const Index d = anchor.dim();
    if (static_cast<int>(steps.size()) != n - 1) {
        throw ShapeMismatchError("buildChain: need one transition per grid interval");
    }
    for (const auto& step : steps) {
        if (step.dim() != d || step.regression.rows() != d || step.regression.cols() != d) {
            throw ShapeMismatchError("buildChain: transition dimension differs from the anchor");
        }
    }
    const bool forward = direction == Direction::Forward;
    DiscreteGaussProcess out{grid, d, Vector(n * d), Matrix(n * d, n * d),
                             forward ? ProcessTag::MarkovForward : ProcessTag::MarkovBackward};

    // Walk order: slice indices visited from the anchor outward.
    auto sliceAt = [&](int step) { return forward ? step : n - 1 - step; };
    // steps[k] links slices k and k+1; walking from position p to p+1 uses:
    auto stepAt = [&](int p) -> const GaussianConditional& {
        return forward ? steps[static_cast<std::size_t>(p)] : steps[static_cast<std::size_t>(n - 2 - p)];
    };

    std::vector<Matrix> marg(static_cast<std::size_t>(n));
    Vector mean = anchor.mean();
    marg[0] = anchor.covariance();
    out.jointMean.segment(offsetOf(sliceAt(0), d), d) = mean;
    for (int p = 0; p + 1 < n; ++p) {
        const auto& st = stepAt(p);
        mean = st.regression * mean + st.offset;
        marg[static_cast<std::size_t>(p + 1)] =
            linalg::symmetrize(st.regression * marg[static_cast<std::size_t>(p)] * st.regression.transpose() + st.noiseCov);
        out.jointMean.segment(offsetOf(sliceAt(p + 1), d), d) = mean;
    }
    for (int p = 0; p < n; ++p) {
        const int a = sliceAt(p);
        Matrix cross = marg[static_cast<std::size_t>(p)];
        out.jointCov.block(offsetOf(a, d), offsetOf(a, d), d, d) = cross;
        for (int q = p + 1; q < n; ++q) {
            // Cov(x_q, x_p) = A_{q-1} Cov(x_{q-1}, x_p) in walk order.
            cross = stepAt(q - 1).regression * cross;
            const int b = sliceAt(q);
            out.jointCov.block(offsetOf(b, d), offsetOf(a, d), d, d) = cross;
            out.jointCov.block(offsetOf(a, d), offsetOf(b, d), d, d) = cross.transpose();
        }
    }
    return out;
}

DiscreteGaussProcess markovProject(const DiscreteGaussProcess& proc, Direction direction) {
    const auto steps = transitions(proc, direction);
    const int anchor = direction == Direction::Forward ? 0 : proc.slices() - 1;
    DiscreteGaussProcess out = buildChain(proc.grid, proc.sliceMarginal(anchor), steps, direction);
    // Marginals are preserved analytically; restore the diagonal blocks and means exactly.
    for (int k = 0; k < proc.slices(); ++k) {
        out.jointCov.block(offsetOf(k, proc.dim), offsetOf(k, proc.dim), proc.dim, proc.dim) = proc.block(k, k);
    }
    out.jointMean = proc.jointMean;
    return out;
}

DiscreteGaussProcess ipfProject(const DiscreteGaussProcess& proc, Pin which, const MatrixProblem& problem) {
    problem.validate();
    requireSameGrid(proc.grid, problem.grid, "ipfProject");
    if (proc.dim != problem.dim()) {
        throw ShapeMismatchError("ipfProject: process dimension differs from the problem");
    }
    const bool pin0 = which == Pin::P0;
    const ProcessTag needed = pin0 ? ProcessTag::MarkovForward : ProcessTag::MarkovBackward;
    if (proc.tag != needed) {
        throw TagMismatchError(std::string("ipfProject: expected a ") + tagName(needed) + " process, got " +
                               tagName(proc.tag));
    }
    const Direction direction = pin0 ? Direction::Forward : Direction::Backward;
    return buildChain(proc.grid, pin0 ? problem.p0 : problem.p1, transitions(proc, direction), direction);
}

JointGaussian ipmfRoundMatrix(const JointGaussian& joint, const MatrixProblem& problem) {
    DiscreteGaussProcess proc = reciprocalProject(joint, problem);
    proc = ipfProject(markovProject(proc, Direction::Backward), Pin::P1, problem);
    proc = reciprocalProject(proc.endpoints(), problem);
    proc = ipfProject(markovProject(proc, Direction::Forward), Pin::P0, problem);
    return proc.endpoints();
}

SbOracleResult solveSbOracle(const MatrixProblem& problem, const SbOracleOptions& options) {
    JointGaussian current = makeStart(problem, StartCoupling::imf());
    for (int round = 1; round <= options.maxRounds; ++round) {
        JointGaussian next = ipmfRoundMatrix(current, problem);
        const double change = JointGaussian::maxAbsDiff(next, current);
        current = std::move(next);
        if (change < options.tolerance) {
            return {std::move(current), round, change};
        }
    }
    throw ConvergenceError("sbOracle: no fixed point within " + std::to_string(options.maxRounds) + " rounds");
}

JointGaussian sbOracle(const MatrixProblem& problem) { return solveSbOracle(problem).joint; }

double optimalityCertificate(const JointGaussian& joint, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw InvalidArgumentError("optimalityCertificate: epsilon must be positive");
    }
    const Index d = joint.dim();
    return linalg::maxAbsDiff(precisionCrossBlock(joint), Matrix::Identity(d, d) / epsilon);
}

} // namespace ipmf::matrix
