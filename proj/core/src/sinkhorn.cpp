#include "ipmf/bridge_mc.hpp"

#include "ipmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ipmf::mc {

namespace {

// Scalings are folded into the potentials once they leave [e^-kAbsorb, e^kAbsorb].
constexpr double kAbsorb = 50.0;

Vector gridWeights(const Vector& centered, double variance) {
    Vector logw = (-0.5 / variance) * centered.array().square();
    const double top = logw.maxCoeff();
    Vector w = (logw.array() - top).exp();
    return w / w.sum();
}

double logSumExp(const Eigen::Ref<const Eigen::ArrayXd>& v) {
    const double top = v.maxCoeff();
    if (!std::isfinite(top)) {
        return top;
    }
    return top + std::log((v - top).exp().sum());
}

} // namespace

double GridPlan::correlation() const {
    const Vector rowMass = plan.rowwise().sum();
    const Vector colMass = plan.colwise().sum().transpose();
    const double mx = rowMass.dot(xGrid);
    const double my = colMass.dot(yGrid);
    const Vector dx = xGrid.array() - mx;
    const Vector dy = yGrid.array() - my;
    const double vx = rowMass.dot(dx.cwiseProduct(dx));
    const double vy = colMass.dot(dy.cwiseProduct(dy));
    const double cxy = dx.dot(plan * dy);
    return cxy / std::sqrt(vx * vy);
}

GridPlan sinkhornPlan(const Gaussian1D& p, const Gaussian1D& pPrime, double chi, int gridSize, double span,
                      const SinkhornOptions& options) {
    if (gridSize < 100) {
        throw InvalidArgumentError("sinkhornPlan: gridSize must be at least 100");
    }
    if (!(span >= 5.0)) {
        throw InvalidArgumentError("sinkhornPlan: span must be at least 5");
    }
    if (!std::isfinite(chi)) {
        throw InvalidArgumentError("sinkhornPlan: chi must be finite");
    }
    const Index n = gridSize;
    const double half = span * std::max(p.stddev(), pPrime.stddev());
    const Vector u = Vector::LinSpaced(n, -half, half);

    GridPlan out;
    out.xGrid = u.array() + p.mean;
    out.yGrid = u.array() + pPrime.mean;
    out.sourceWeights = gridWeights(u, p.variance);
    out.targetWeights = gridWeights(u, pPrime.variance);
    const Vector& a = out.sourceWeights;
    const Vector& b = out.targetWeights;

    // Centered coordinates; the x-only and y-only parts of the cost do not change the plan.
    Matrix cost(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            const double s = chi >= 0.0 ? u(i) - u(j) : u(i) + u(j);
            cost(i, j) = 0.5 * std::abs(chi) * s * s;
        }
    }

    Vector f = Vector::Zero(n);
    Vector g = Vector::Zero(n);
    Matrix kernel(n, n);
    auto rebuildKernel = [&] {
        kernel = ((-cost).colwise() + f).rowwise() + g.transpose();
        kernel = kernel.array().exp();
    };
    // Exact log-domain half steps, used when the scaled kernel under- or overflows.
    auto logDomainUpdate = [&] {
        for (Index i = 0; i < n; ++i) {
            f(i) = std::log(a(i)) - logSumExp(g.array() - cost.row(i).transpose().array());
        }
        for (Index j = 0; j < n; ++j) {
            g(j) = std::log(b(j)) - logSumExp(f.array() - cost.col(j).array());
        }
    };

    logDomainUpdate();
    rebuildKernel();
    Vector su = Vector::Ones(n);
    Vector sv = Vector::Ones(n);
    double err = std::numeric_limits<double>::infinity();
    int it = 0;
    while (it < options.maxIterations) {
        ++it;
        su = a.array() / (kernel * sv).array();
        sv = b.array() / (kernel.transpose() * su).array();
        const bool finite = su.allFinite() && sv.allFinite() && (su.array() > 0.0).all() && (sv.array() > 0.0).all();
        if (!finite) {
            logDomainUpdate();
            rebuildKernel();
            su.setOnes();
            sv.setOnes();
            continue;
        }
        const double spread = std::max(su.array().log().abs().maxCoeff(), sv.array().log().abs().maxCoeff());
        if (spread > kAbsorb) {
            f += su.array().log().matrix();
            g += sv.array().log().matrix();
            rebuildKernel();
            su.setOnes();
            sv.setOnes();
        }
        if (it % 10 == 0 || it == options.maxIterations) {
            // Column sums are exact after the v-update; the row sums carry the error.
            const Vector rows = su.cwiseProduct(kernel * sv);
            err = (rows - a).cwiseAbs().sum();
            if (err < options.tolerance) {
                break;
            }
        }
    }
    out.plan = su.asDiagonal() * kernel * sv.asDiagonal();
    out.iterations = it;
    out.marginalError = err;
    if (!(err < options.tolerance)) {
        throw ConvergenceError("sinkhornPlan: marginal error " + std::to_string(err) + " after " +
                               std::to_string(it) + " iterations");
    }
    return out;
}

} // namespace ipmf::mc
