#include "ipmf/scalar.hpp"

#include "ipmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ipmf::scalar {

namespace {

constexpr int kOracleInterior = 512;

void requirePositive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidArgumentError(std::string(what) + " must be finite and strictly positive");
    }
}

void requireInteriorTime(double t) {
    if (!(t > 0.0 && t < 1.0)) {
        throw InvalidArgumentError("interior time must lie strictly inside (0, 1)");
    }
}

// 1 - rho^2 without cancellation near |rho| = 1.
double oneMinusSquare(double rho) { return (1.0 - rho) * (1.0 + rho); }

// Covariance of the reciprocal 1D process between times a and b.
double reciprocalCov(double a, double b, double var0, double cross, double var1, double epsilon) {
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    return (1.0 - a) * (1.0 - b) * var0 + ((1.0 - a) * b + a * (1.0 - b)) * cross + a * b * var1 +
           epsilon * lo * (1.0 - hi);
}

ScalarIterate withRho(const ScalarIterate& iter, double rho) {
    ScalarIterate out = iter;
    out.rho = rho;
    return out;
}

} // namespace

void ScalarProblem::validate() const {
    requirePositive(sigma0, "sigma0");
    requirePositive(sigma1, "sigma1");
    requirePositive(epsilon, "epsilon");
    if (!std::isfinite(mu0) || !std::isfinite(mu1)) {
        throw InvalidArgumentError("means must be finite");
    }
}

void ScalarIterate::validate() const {
    requirePositive(s, "iterate std s");
    if (!(std::abs(rho) < 1.0)) {
        throw InvalidArgumentError("iterate correlation must satisfy |rho| < 1");
    }
    if (!std::isfinite(nu)) {
        throw InvalidArgumentError("iterate mean must be finite");
    }
}

double xi(double rho, double sigma, double sigmaP) {
    if (!(std::abs(rho) < 1.0)) {
        throw InvalidArgumentError("xi: |rho| must be < 1");
    }
    requirePositive(sigma, "sigma");
    requirePositive(sigmaP, "sigma'");
    return rho / (sigma * sigmaP * oneMinusSquare(rho));
}

double pInverse(double chi, double sigma, double sigmaP) {
    requirePositive(sigma, "sigma");
    requirePositive(sigmaP, "sigma'");
    if (chi == 0.0) {
        return 0.0;
    }
    const double x = chi * sigma * sigmaP;
    // (sqrt(x^2 + 1/4) - 1/2) / x, rationalized to avoid cancellation for small |x|.
    return x / (std::sqrt(x * x + 0.25) + 0.5);
}

double rhoStar(double sigma0, double sigma1, double epsilon) {
    requirePositive(sigma0, "sigma0");
    requirePositive(sigma1, "sigma1");
    requirePositive(epsilon, "epsilon");
    const double product = sigma0 * sigma1;
    const double half = 0.5 * epsilon;
    // (sqrt(p^2 + e^2/4) - e/2) / p == p / (sqrt(p^2 + e^2/4) + e/2)
    return product / (std::sqrt(product * product + half * half) + half);
}

double rhoNewDiscrete(double rho, double sigma, double sigmaP, double t, double epsilon) {
    requireInteriorTime(t);
    requirePositive(sigma, "sigma");
    requirePositive(sigmaP, "sigma'");
    requirePositive(epsilon, "epsilon");
    if (!(std::abs(rho) <= 1.0)) {
        throw InvalidArgumentError("rhoNewDiscrete: |rho| must be <= 1");
    }
    const double u = 1.0 - t;
    const double num = (u * sigma + t * rho * sigmaP) * (t * sigmaP + u * rho * sigma);
    const double den = u * u * sigma * sigma + 2.0 * t * u * rho * sigma * sigmaP + t * t * sigmaP * sigmaP +
                       t * u * epsilon;
    return num / den;
}

double rhoNewContinuousFormula(double rho, double sigma, double sigmaP, double epsilon) {
    requirePositive(sigma, "sigma");
    requirePositive(sigmaP, "sigma'");
    requirePositive(epsilon, "epsilon");
    if (!(std::abs(rho) <= 1.0)) {
        throw InvalidArgumentError("rhoNewContinuous: |rho| must be <= 1");
    }
    // Marginal variance of the reciprocal process is S(t) = A t^2 + B t + C and the
    // Markovian projection gives rho_new = exp(-(eps/2) * int_0^1 dt / S(t)).
    // c1 = -(2A + B), c2 = B, c3^2 = B^2 - 4AC.
    const double cross = rho * sigma * sigmaP;
    const double c1 = epsilon + 2.0 * (cross - sigmaP * sigmaP);
    const double c2 = epsilon + 2.0 * (cross - sigma * sigma);
    const double disc = (epsilon + 2.0 * (rho + 1.0) * sigma * sigmaP) * (epsilon + 2.0 * (rho - 1.0) * sigma * sigmaP);

    double exponent = 0.0;
    if (disc > 0.0) {
        // artanh(c1/c3) + artanh(c2/c3) = artanh(w), w = c3 (c1 + c2) / (c3^2 + c1 c2);
        // only the real part survives since both arguments sit on the same side of +-1.
        const double c3 = std::sqrt(disc);
        const double num = c3 * (c1 + c2);
        const double den = disc + c1 * c2;
        const double ratio = (den + num) / (den - num);
        const double logRatio = ratio > 0.0 ? std::log1p(2.0 * num / (den - num)) : std::log(std::abs(ratio));
        exponent = -epsilon * 0.5 * logRatio / c3;
    } else if (disc < 0.0) {
        // c3 = i r: artanh(c/(i r)) = -i atan(c / r).
        const double r = std::sqrt(-disc);
        exponent = epsilon * std::atan2(r * (c1 + c2), -disc - c1 * c2) / r;
    } else {
        exponent = -epsilon * (1.0 / c1 + 1.0 / c2);
    }
    const double out = std::exp(exponent);
    if (!std::isfinite(out) || !(out > 0.0) || !(out < 1.0)) {
        throw FormulaDomainError("continuous IMF update left (0, 1): " + std::to_string(out));
    }
    return out;
}

double rhoNewContinuousGrid(double rho, double sigma, double sigmaP, double epsilon, int interior) {
    requirePositive(sigma, "sigma");
    requirePositive(sigmaP, "sigma'");
    requirePositive(epsilon, "epsilon");
    if (interior < 1) {
        throw InvalidArgumentError("rhoNewContinuousGrid: need at least one interior point");
    }
    const double var0 = sigma * sigma;
    const double var1 = sigmaP * sigmaP;
    const double cross = rho * sigma * sigmaP;
    const double h = 1.0 / static_cast<double>(interior + 1);
    double logProduct = 0.0;
    for (int k = 0; k <= interior; ++k) {
        const double a = k * h;
        const double b = (k == interior) ? 1.0 : (k + 1) * h;
        logProduct += std::log(reciprocalCov(b, a, var0, cross, var1, epsilon) /
                               reciprocalCov(a, a, var0, cross, var1, epsilon));
    }
    return std::exp(logProduct) * sigma / sigmaP;
}

double rhoNewContinuous(double rho, double sigma, double sigmaP, double epsilon, ContinuousPath* path) {
    try {
        const double out = rhoNewContinuousFormula(rho, sigma, sigmaP, epsilon);
        if (path != nullptr) {
            *path = ContinuousPath::Formula;
        }
        return out;
    } catch (const FormulaDomainError&) {
        // First-order grid error removed by one Richardson step.
        const double coarse = rhoNewContinuousGrid(rho, sigma, sigmaP, epsilon, kOracleInterior);
        const double fine = rhoNewContinuousGrid(rho, sigma, sigmaP, epsilon, 2 * kOracleInterior + 1);
        if (path != nullptr) {
            *path = ContinuousPath::GridOracle;
        }
        return 2.0 * fine - coarse;
    }
}

std::pair<double, double> endpointStds(const ScalarIterate& iter, const ScalarProblem& problem) {
    return iter.side == Side::StartsAtP0 ? std::pair{problem.sigma0, iter.s} : std::pair{iter.s, problem.sigma1};
}

double chiOf(const ScalarIterate& iter, const ScalarProblem& problem) {
    const auto [a, b] = endpointStds(iter, problem);
    return xi(iter.rho, a, b);
}

JointGaussian toJoint(const ScalarIterate& iter, const ScalarProblem& problem) {
    const auto [a, b] = endpointStds(iter, problem);
    if (iter.side == Side::StartsAtP0) {
        return JointGaussian::fromScalar(problem.mu0, a, iter.nu, b, iter.rho);
    }
    return JointGaussian::fromScalar(iter.nu, a, problem.mu1, b, iter.rho);
}

ScalarIterate solutionIterate(const ScalarProblem& problem) {
    problem.validate();
    return ScalarIterate{problem.mu1, problem.sigma1, rhoStar(problem.sigma0, problem.sigma1, problem.epsilon),
                         Side::StartsAtP0};
}

ScalarIterate imfStepDiscrete(const ScalarIterate& iter, const ScalarProblem& problem, double t) {
    requireInteriorTime(t);
    problem.validate();
    iter.validate();
    const auto [a, b] = endpointStds(iter, problem);
    return withRho(iter, rhoNewDiscrete(iter.rho, a, b, t, problem.epsilon));
}

ScalarIterate imfStepContinuous(const ScalarIterate& iter, const ScalarProblem& problem, ContinuousPath* path) {
    problem.validate();
    iter.validate();
    const auto [a, b] = endpointStds(iter, problem);
    return withRho(iter, rhoNewContinuous(iter.rho, a, b, problem.epsilon, path));
}

ScalarIterate imfStep(const ScalarIterate& iter, const ScalarProblem& problem, const ImfMode& mode) {
    return mode.isContinuous() ? imfStepContinuous(iter, problem) : imfStepDiscrete(iter, problem, mode.t);
}

double gammaC(double sigma, double sigmaP, double epsilon) { return rhoStar(sigma, sigmaP, epsilon); }

double gammaD(double sigma, double sigmaP, double t, double epsilon) {
    requireInteriorTime(t);
    requirePositive(sigma, "sigma");
    requirePositive(sigmaP, "sigma'");
    requirePositive(epsilon, "epsilon");
    const double u = 1.0 - t;
    const double v0 = sigma * sigma;
    const double v1 = sigmaP * sigmaP;
    const double sd = sigma * sigmaP;
    const double tu = t * u;
    const double num = tu * tu * v0 * v1 + tu * (t * t * v1 + u * u * v0) * epsilon + tu * tu * epsilon * epsilon;
    const double left = u * v0 + t * sd;
    const double right = t * v1 + u * sd;
    const double mix = u * sigma + t * sigmaP;
    const double den = u * u * left * left + t * t * right * right + tu * mix * mix * epsilon;
    return 1.0 / (1.0 + num / den);
}

double gammaFor(const ImfMode& mode, double sigma, double sigmaP, double epsilon) {
    return mode.isContinuous() ? gammaC(sigma, sigmaP, epsilon) : gammaD(sigma, sigmaP, mode.t, epsilon);
}

double chiImprovementFactor(double rho, double rhoStar_, double gamma) {
    if (!(std::abs(rho) < 1.0)) {
        throw InvalidArgumentError("chiImprovementFactor: |rho| must be < 1");
    }
    if (!(rhoStar_ >= 0.0 && rhoStar_ < 1.0)) {
        throw InvalidArgumentError("chiImprovementFactor: rhoStar must lie in [0, 1)");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw InvalidArgumentError("chiImprovementFactor: gamma must lie in [0, 1]");
    }
    const double m = std::max(rhoStar_, std::abs(rho));
    const double m2 = m * m;
    const double shrink = oneMinusSquare(m) * oneMinusSquare(m) / (1.0 + m2);
    return 1.0 - (1.0 - gamma) * shrink;
}

ScalarIterate ipfStep(const ScalarIterate& iter, const ScalarProblem& problem) {
    problem.validate();
    iter.validate();
    const bool fromP0 = iter.side == Side::StartsAtP0;
    const double pinnedMean = fromP0 ? problem.mu0 : problem.mu1;
    const double pinnedStd = fromP0 ? problem.sigma0 : problem.sigma1;
    const double targetMean = fromP0 ? problem.mu1 : problem.mu0;
    const double targetStd = fromP0 ? problem.sigma1 : problem.sigma0;

    // Extended precision: chi depends on 1 - rho^2, which amplifies rounding in rho near +-1.
    const long double rho = iter.rho;
    const long double ratio = static_cast<long double>(targetStd) / iter.s;
    // Var(pinned) after re-marginalizing: pinnedStd^2 (1 - rho^2 (1 - targetStd^2 / s^2)).
    const long double scale = std::sqrt((1.0L - rho) * (1.0L + rho) + rho * rho * ratio * ratio);

    ScalarIterate out;
    out.s = static_cast<double>(pinnedStd * scale);
    out.rho = static_cast<double>(rho * ratio / scale);
    out.nu = pinnedMean - (pinnedStd / iter.s) * iter.rho * (iter.nu - targetMean);
    out.side = fromP0 ? Side::StartsAtP1 : Side::StartsAtP0;
    if (!(out.s > 0.0)) {
        throw InvalidArgumentError("ipfStep: degenerate marginal after projection");
    }
    return out;
}

ScalarIterate ipmfRound(const ScalarIterate& iter, const ScalarProblem& problem, const ImfMode& mode) {
    if (iter.side != Side::StartsAtP0) {
        throw InvalidArgumentError("ipmfRound: iterate must be pinned at p0");
    }
    ScalarIterate next = imfStep(iter, problem, mode);
    next = ipfStep(next, problem);
    next = imfStep(next, problem, mode);
    return ipfStep(next, problem);
}

RateCertificate certificate(const ScalarProblem& problem, const ScalarIterate& init, const ImfMode& mode) {
    problem.validate();
    if (init.side != Side::StartsAtP0) {
        throw InvalidArgumentError("certificate: initial iterate must be pinned at p0");
    }
    ScalarIterate start = init;
    if (std::abs(start.rho) == 1.0) {
        requirePositive(start.s, "iterate std s");
        const double sigma = problem.sigma0;
        start.rho = mode.isContinuous() ? rhoNewContinuous(start.rho, sigma, start.s, problem.epsilon)
                                        : rhoNewDiscrete(start.rho, sigma, start.s, mode.t, problem.epsilon);
    }
    start.validate();

    const double eps = problem.epsilon;
    const double chiTarget = 1.0 / eps;
    const double rhoAfterImf = imfStep(start, problem, mode).rho;
    const double s0Prime =
        problem.sigma0 * std::sqrt(oneMinusSquare(rhoAfterImf) +
                                   rhoAfterImf * rhoAfterImf * (problem.sigma1 * problem.sigma1) / (start.s * start.s));

    RateCertificate cert;
    cert.start = start;
    cert.chi0 = xi(start.rho, problem.sigma0, start.s);
    cert.ranges.sigma1Min = std::min(problem.sigma1, start.s);
    cert.ranges.sigma1Max = std::max(problem.sigma1, start.s);
    cert.ranges.sigma0Min = std::min(problem.sigma0, s0Prime);
    cert.ranges.sigma0Max = std::max(problem.sigma0, s0Prime);
    cert.ranges.chiMin = std::min(chiTarget, std::abs(cert.chi0));
    cert.ranges.chiMax = std::max(chiTarget, std::abs(cert.chi0));

    const double s0Max = cert.ranges.sigma0Max;
    const double s1Max = cert.ranges.sigma1Max;
    const double rhoWorst = pInverse(cert.ranges.chiMax, s0Max, s1Max);
    cert.alpha = rhoWorst;
    cert.gamma = gammaFor(mode, s0Max, s1Max, eps);
    cert.beta = chiImprovementFactor(rhoWorst, pInverse(chiTarget, s0Max, s1Max), cert.gamma);
    cert.rhoStar = rhoStar(problem.sigma0, problem.sigma1, eps);
    return cert;
}

EnvelopeCheck checkEnvelopes(const RateCertificate& cert, const ScalarProblem& problem, const ScalarIterate& current,
                             int round, double slack) {
    const ScalarIterate& s0 = cert.start;
    const double k = static_cast<double>(round);
    const double v1 = problem.sigma1 * problem.sigma1;
    const double chiTarget = 1.0 / problem.epsilon;

    EnvelopeCheck out;
    out.variance = std::abs(current.s * current.s - v1) <=
                   std::pow(cert.alpha, 2.0 * k) * std::abs(s0.s * s0.s - v1) + slack;
    out.mean = std::abs(current.nu - problem.mu1) <= std::pow(cert.alpha, k) * std::abs(s0.nu - problem.mu1) + slack;
    out.chi = std::abs(chiOf(current, problem) - chiTarget) <=
              std::pow(cert.beta, 2.0 * k) * std::abs(cert.chi0 - chiTarget) + slack;
    return out;
}

} // namespace ipmf::scalar
