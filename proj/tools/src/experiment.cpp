#include "ipmf/experiment.hpp"

#include "ipmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ipmf::experiment {

namespace {

using nlohmann::json;

constexpr double kKlThreshold = 1e-6;
constexpr double kCertificateThreshold = 1e-6;
constexpr double kMarginalThreshold = 1e-8;
constexpr double kKlMonotoneSlack = 1e-9;
constexpr double kSinkhornTolerance = 1e-2;
constexpr double kStandardErrors = 3.0;

json optionalJson(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

// Non-finite reals are not valid JSON numbers; emit them as strings.
json realJson(double v) { return std::isfinite(v) ? json(v) : json(formatReal(v)); }

scalar::ScalarProblem scalarProblem(const ExperimentConfig& c) {
    scalar::ScalarProblem p{c.mu0, c.sigma0, c.mu1, c.sigma1, c.effectiveEpsilon()};
    p.validate();
    return p;
}

scalar::ImfMode imfMode(const ExperimentConfig& c) {
    return c.continuousImf ? scalar::ImfMode::continuous() : scalar::ImfMode::discrete(c.imfTime);
}

scalar::ScalarIterate scalarStart(const ExperimentConfig& c, const scalar::ScalarProblem& p) {
    using scalar::Side;
    switch (c.start) {
    case matrix::StartKind::Imf:
        return {p.mu1, p.sigma1, 0.0, Side::StartsAtP0};
    case matrix::StartKind::Ipf: {
        const double s = std::sqrt(p.sigma0 * p.sigma0 + p.epsilon);
        return {p.mu0, s, p.sigma0 / s, Side::StartsAtP0};
    }
    case matrix::StartKind::IndependentP0P0:
        return {p.mu0, p.sigma0, 0.0, Side::StartsAtP0};
    case matrix::StartKind::Custom:
        return {p.mu1, p.sigma1, *c.customRho, Side::StartsAtP0};
    }
    throw ConfigError("unknown start");
}

TraceRow scalarRow(int round, const scalar::ScalarIterate& it, const scalar::ScalarProblem& p,
                   const JointGaussian& optimum) {
    const JointGaussian joint = scalar::toJoint(it, p);
    TraceRow r;
    r.round = round;
    r.klForward = klGaussian(joint, optimum);
    r.klReverse = klGaussian(optimum, joint);
    r.chiError = std::abs(scalar::chiOf(it, p) - 1.0 / p.epsilon);
    r.marginalErr0 = bw2(joint.marginal0(), optimum.marginal0());
    r.marginalErr1 = bw2(joint.marginal1(), optimum.marginal1());
    r.sK = it.s;
    r.nuK = it.nu;
    r.rhoK = it.rho;
    return r;
}

TraceRow matrixRow(int round, const JointGaussian& joint, const matrix::MatrixProblem& problem,
                   const JointGaussian& optimum) {
    TraceRow r;
    r.round = round;
    r.klForward = klGaussian(joint, optimum);
    r.klReverse = klGaussian(optimum, joint);
    r.chiError = matrix::optimalityCertificate(joint, problem.epsilon);
    r.marginalErr0 = bw2(joint.marginal0(), problem.p0);
    r.marginalErr1 = bw2(joint.marginal1(), problem.p1);
    if (joint.dim() == 1) {
        r.sK = std::sqrt(joint.cov11()(0, 0));
        r.nuK = joint.mean1()(0);
        r.rhoK = joint.correlation();
    }
    return r;
}

int countIncreases(const IpmfTrace& trace, double TraceRow::*field) {
    int n = 0;
    for (std::size_t k = 1; k < trace.size(); ++k) {
        if (trace[k].*field > trace[k - 1].*field + kKlMonotoneSlack) {
            ++n;
        }
    }
    return n;
}

matrix::MatrixProblem matrixProblem(const ExperimentConfig& c) {
    auto [p0, p1] = buildCovariancePair(c.effectiveDimension(), c.spectrumSpec, c.seed);
    return matrix::MatrixProblem{std::move(p0), std::move(p1), c.effectiveEpsilon(), TimeGrid::uniform(c.gridN)};
}

matrix::StartCoupling matrixStart(const ExperimentConfig& c, const matrix::MatrixProblem& problem) {
    if (c.start != matrix::StartKind::Custom) {
        return {c.start, std::nullopt};
    }
    // cov01 = rho * Sigma0^{1/2} Sigma1^{1/2} keeps the coupling PSD for |rho| <= 1.
    const Matrix r0 = linalg::psdSqrt(problem.p0.covariance());
    const Matrix r1 = linalg::psdSqrt(problem.p1.covariance());
    return matrix::StartCoupling::fromJoint(JointGaussian(problem.p0.mean(), problem.p1.mean(), problem.p0.covariance(),
                                                          *c.customRho * r0 * r1, problem.p1.covariance()));
}

IpmfTrace matrixTrace(const JointGaussian& start, const matrix::MatrixProblem& problem, const JointGaussian& optimum,
                      int rounds) {
    IpmfTrace trace;
    trace.reserve(static_cast<std::size_t>(rounds) + 1);
    JointGaussian joint = start;
    trace.push_back(matrixRow(0, joint, problem, optimum));
    for (int k = 1; k <= rounds; ++k) {
        joint = matrix::ipmfRoundMatrix(joint, problem);
        trace.push_back(matrixRow(k, joint, problem, optimum));
    }
    return trace;
}

json traceSummary(const IpmfTrace& trace) {
    const auto& last = trace.back();
    json s;
    s["finalKlForward"] = realJson(last.klForward);
    s["finalKlReverse"] = realJson(last.klReverse);
    s["certificate"] = realJson(last.chiError);
    s["finalMarginalErr0"] = realJson(last.marginalErr0);
    s["finalMarginalErr1"] = realJson(last.marginalErr1);
    s["klForwardCrossing"] = optionalJson(firstCrossing(trace, &TraceRow::klForward, kKlThreshold));
    s["klReverseCrossing"] = optionalJson(firstCrossing(trace, &TraceRow::klReverse, kKlThreshold));
    s["warnings"] = {{"klForwardIncreases", countIncreases(trace, &TraceRow::klForward)},
                     {"klReverseIncreases", countIncreases(trace, &TraceRow::klReverse)}};
    return s;
}

} // namespace

Matrix haarOrthogonal(Index dimension, Rng& rng) {
    Matrix g(dimension, dimension);
    for (Index j = 0; j < dimension; ++j) {
        for (Index i = 0; i < dimension; ++i) {
            g(i, j) = rng.normal();
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dimension, dimension);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < dimension; ++j) {
        if (r(j, j) < 0.0) {
            q.col(j) *= -1.0;
        }
    }
    return q;
}

std::pair<GaussianND, GaussianND> buildCovariancePair(int dimension, const SpectrumSpec& spectrum,
                                                      std::uint64_t seed) {
    if (dimension < 1) {
        throw InvalidArgumentError("buildCovariancePair: dimension must be at least 1");
    }
    Rng rng(deriveSeed(seed, spectrum.orthogonalSeed));
    const Index d = dimension;
    auto one = [&] {
        const Matrix q = haarOrthogonal(d, rng);
        Vector lambda(d);
        for (Index i = 0; i < d; ++i) {
            lambda(i) = std::exp(rng.uniform(spectrum.logLo, spectrum.logHi));
        }
        return GaussianND(Vector::Zero(d), linalg::symmetrize(q * lambda.asDiagonal() * q.transpose()));
    };
    GaussianND p0 = one();
    GaussianND p1 = one();
    return {std::move(p0), std::move(p1)};
}

std::pair<scalar::ScalarProblem, scalar::ScalarIterate> randomRateInstance(Rng& rng) {
    static constexpr double kEps[] = {0.1, 1.0, 10.0};
    scalar::ScalarProblem p;
    p.mu0 = rng.uniform(-2.0, 2.0);
    p.sigma0 = rng.uniform(0.5, 2.0);
    p.mu1 = rng.uniform(-2.0, 2.0);
    p.sigma1 = rng.uniform(0.5, 2.0);
    p.epsilon = kEps[rng.below(3)];
    scalar::ScalarIterate it;
    it.nu = rng.uniform(-2.0, 2.0);
    it.s = rng.uniform(0.5, 2.0);
    it.rho = rng.uniform(-0.99, 0.99);
    it.side = scalar::Side::StartsAtP0;
    return {p, it};
}

JointGaussian randomCoupling(Index dimension, Rng& rng) {
    const Index n = 2 * dimension;
    Matrix g(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            g(i, j) = rng.normal();
        }
    }
    const Matrix full = linalg::symmetrize(g * g.transpose() / static_cast<double>(n) + 0.1 * Matrix::Identity(n, n));
    Vector mean(n);
    for (Index i = 0; i < n; ++i) {
        mean(i) = rng.normal();
    }
    return JointGaussian(mean.head(dimension), mean.tail(dimension), full.topLeftCorner(dimension, dimension),
                         full.topRightCorner(dimension, dimension), full.bottomRightCorner(dimension, dimension));
}

ExperimentResult runScalar(const ExperimentConfig& config) {
    const auto problem = scalarProblem(config);
    const auto mode = imfMode(config);
    const auto cert = scalar::certificate(problem, scalarStart(config, problem), mode);
    const JointGaussian optimum = scalar::toJoint(scalar::solutionIterate(problem), problem);

    ExperimentResult res;
    int violations = 0;
    auto it = cert.start;
    res.trace.push_back(scalarRow(0, it, problem, optimum));
    for (int k = 1; k <= config.rounds; ++k) {
        it = scalar::ipmfRound(it, problem, mode);
        res.trace.push_back(scalarRow(k, it, problem, optimum));
        violations += scalar::checkEnvelopes(cert, problem, it, k).ok() ? 0 : 1;
    }
    res.summary = traceSummary(res.trace);
    res.summary["rhoStar"] = cert.rhoStar;
    res.summary["alpha"] = cert.alpha;
    res.summary["beta"] = cert.beta;
    res.summary["gamma"] = cert.gamma;
    res.summary["envelopeViolations"] = violations;
    res.summary["flags"] = {{"rateEnvelopes", violations == 0}};
    res.passed = violations == 0;
    return res;
}

ExperimentResult runMatrix(const ExperimentConfig& config) {
    const auto problem = matrixProblem(config);
    const auto oracle = matrix::solveSbOracle(problem);
    const JointGaussian start = matrix::makeStart(problem, matrixStart(config, problem));

    ExperimentResult res;
    res.trace = matrixTrace(start, problem, oracle.joint, config.rounds);
    const auto& last = res.trace.back();
    const bool klOk = last.klForward < kKlThreshold && last.klReverse < kKlThreshold;
    const bool optimal = last.chiError < kCertificateThreshold && last.marginalErr0 < kMarginalThreshold &&
                         last.marginalErr1 < kMarginalThreshold;
    res.summary = traceSummary(res.trace);
    res.summary["oracleRounds"] = oracle.rounds;
    res.summary["oracleCertificate"] = matrix::optimalityCertificate(oracle.joint, problem.epsilon);
    res.summary["flags"] = {{"klBelowThreshold", klOk}, {"optimalityAtLimit", optimal}};
    res.summary["notes"] = {{"klThreshold", "1e-6 after the configured rounds; property-based substitute for "
                                            "unreadable reference curves"}};
    res.passed = klOk && optimal;
    return res;
}

ExperimentResult runRates(const ExperimentConfig& config) {
    const auto mode = imfMode(config);
    const int n = config.effectiveInstances();
    const auto rounds = static_cast<std::size_t>(config.rounds);
    ExperimentResult res;
    res.trace.resize(rounds + 1);
    for (std::size_t k = 0; k <= rounds; ++k) {
        res.trace[k].round = static_cast<int>(k);
    }
    int violations = 0;
    int violatingInstances = 0;
    double maxRhoError = 0.0;
    for (int i = 0; i < n; ++i) {
        Rng rng(deriveSeed(config.seed, static_cast<std::uint64_t>(i)));
        const auto [problem, start] = randomRateInstance(rng);
        const auto cert = scalar::certificate(problem, start, mode);
        const JointGaussian optimum = scalar::toJoint(scalar::solutionIterate(problem), problem);
        auto it = cert.start;
        int mine = 0;
        for (std::size_t k = 0; k <= rounds; ++k) {
            if (k > 0) {
                it = scalar::ipmfRound(it, problem, mode);
                mine += scalar::checkEnvelopes(cert, problem, it, static_cast<int>(k)).ok() ? 0 : 1;
            }
            const TraceRow r = scalarRow(static_cast<int>(k), it, problem, optimum);
            auto& agg = res.trace[k];
            agg.klForward = std::max(agg.klForward, r.klForward);
            agg.klReverse = std::max(agg.klReverse, r.klReverse);
            agg.chiError = std::max(agg.chiError, r.chiError);
            agg.marginalErr0 = std::max(agg.marginalErr0, r.marginalErr0);
            agg.marginalErr1 = std::max(agg.marginalErr1, r.marginalErr1);
        }
        maxRhoError = std::max(maxRhoError, std::abs(it.rho - cert.rhoStar));
        violations += mine;
        violatingInstances += mine > 0 ? 1 : 0;
    }
    res.summary = traceSummary(res.trace);
    res.summary["aggregation"] = "per-round maximum over instances";
    res.summary["instances"] = n;
    res.summary["envelopeViolations"] = violations;
    res.summary["violatingInstances"] = violatingInstances;
    res.summary["finalMaxRhoError"] = maxRhoError;
    res.summary["flags"] = {{"rateEnvelopes", violations == 0}};
    res.passed = violations == 0;
    return res;
}

ExperimentResult runSinkhornOracle(const ExperimentConfig& config) {
    const int n = config.effectiveInstances();
    std::ostringstream table;
    table << "instance,rho,sigma,sigmaPrime,chi,gridSize,planCorrelation,absError,iterations\n";
    bool agreement = true;
    bool improving = true;
    double worstBase = 0.0;
    for (int i = 0; i < n; ++i) {
        Rng rng(deriveSeed(config.seed, static_cast<std::uint64_t>(i)));
        const double magnitude = rng.uniform(0.0, 0.9);
        const double rho = i < (n + 1) / 2 ? -magnitude : magnitude;
        const double s = rng.uniform(0.5, 2.0);
        const double sp = rng.uniform(0.5, 2.0);
        const double m = rng.uniform(-2.0, 2.0);
        const double mp = rng.uniform(-2.0, 2.0);
        const double chi = scalar::xi(rho, s, sp);
        double previous = std::numeric_limits<double>::infinity();
        for (int level = 0; level < 3; ++level) {
            const int size = config.gridSize << level;
            const auto plan = mc::sinkhornPlan(Gaussian1D(m, s * s), Gaussian1D(mp, sp * sp), chi, size, config.span);
            const double corr = plan.correlation();
            const double err = std::abs(corr - rho);
            if (level == 0) {
                agreement = agreement && err <= kSinkhornTolerance;
                worstBase = std::max(worstBase, err);
            } else {
                improving = improving && err <= previous;
            }
            previous = err;
            table << i << ',' << formatReal(rho) << ',' << formatReal(s) << ',' << formatReal(sp) << ','
                  << formatReal(chi) << ',' << size << ',' << formatReal(corr) << ',' << formatReal(err) << ','
                  << plan.iterations << '\n';
        }
    }
    ExperimentResult res;
    res.table = table.str();
    res.summary["instances"] = n;
    res.summary["gridSizes"] = {config.gridSize, config.gridSize * 2, config.gridSize * 4};
    res.summary["worstBaseGridError"] = worstBase;
    res.summary["flags"] = {{"agreementAtBaseGrid", agreement}, {"improvesWithRefinement", improving}};
    res.passed = agreement && improving;
    return res;
}

ExperimentResult runMcCheck(const ExperimentConfig& config) {
    const int n = config.effectiveInstances();
    const int maxDim = config.effectiveDimension();
    const double eps = config.effectiveEpsilon();
    const TimeGrid grid = TimeGrid::uniform(config.gridN);
    std::ostringstream table;
    table << "instance,dim,entries,outside,maxAbsZ\n";
    int totalOutside = 0;
    int totalEntries = 0;
    for (int i = 0; i < n; ++i) {
        Rng rng(deriveSeed(config.seed, static_cast<std::uint64_t>(i)));
        const auto d = static_cast<Index>(1 + rng.below(static_cast<std::uint64_t>(maxDim)));
        const JointGaussian joint = randomCoupling(d, rng);
        const matrix::MatrixProblem problem{joint.marginal0(), joint.marginal1(), eps, grid};
        const auto proc = matrix::reciprocalProject(joint, problem);
        const auto batch = mc::sampleReciprocal(joint, grid, eps, config.samples, rng.nextU64());
        const auto mom = mc::empiricalMoments(batch);
        const Index lo = d;
        const Index width = static_cast<Index>(grid.interiorCount()) * d;
        int outside = 0;
        int entries = 0;
        double maxZ = 0.0;
        for (Index a = lo; a < lo + width; ++a) {
            for (Index b = a; b < lo + width; ++b) {
                const double sab = proc.jointCov(a, b);
                const double se = std::sqrt((proc.jointCov(a, a) * proc.jointCov(b, b) + sab * sab) /
                                            static_cast<double>(config.samples));
                const double z = std::abs(mom.covariance(a, b) - sab) / se;
                maxZ = std::max(maxZ, z);
                outside += z > kStandardErrors ? 1 : 0;
                ++entries;
            }
        }
        totalOutside += outside;
        totalEntries += entries;
        table << i << ',' << d << ',' << entries << ',' << outside << ',' << formatReal(maxZ) << '\n';
    }
    ExperimentResult res;
    res.table = table.str();
    res.summary["instances"] = n;
    res.summary["samples"] = config.samples;
    res.summary["entries"] = totalEntries;
    res.summary["outside"] = totalOutside;
    res.summary["flags"] = {{"within3StandardErrors", totalOutside == 0}};
    res.passed = totalOutside == 0;
    return res;
}

ExperimentResult runExperiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult res;
    switch (config.mode) {
    case Mode::Scalar1d: res = runScalar(config); break;
    case Mode::MatrixNd: res = runMatrix(config); break;
    case Mode::Rates: res = runRates(config); break;
    case Mode::SinkhornOracle: res = runSinkhornOracle(config); break;
    case Mode::McCheck: res = runMcCheck(config); break;
    }
    res.summary["config"] = configToJson(config);
    res.summary["passed"] = res.passed;
    if (!config.outputPath.empty()) {
        writeText(config.outputPath + ".csv", res.table ? *res.table : traceToCsv(res.trace));
        writeText(config.outputPath + ".json", res.summary.dump(2) + "\n");
    }
    return res;
}

CompareReport compareStarts(const ExperimentConfig& config) {
    config.validate();
    if (config.mode != Mode::MatrixNd) {
        throw ConfigError("compare-starts needs matrixNd mode");
    }
    const auto problem = matrixProblem(config);
    const auto oracle = matrix::solveSbOracle(problem);
    CompareReport report;
    report.oracleRounds = oracle.rounds;
    bool allConverged = true;
    json perStart = json::object();
    for (auto kind : {matrix::StartKind::Imf, matrix::StartKind::Ipf, matrix::StartKind::IndependentP0P0}) {
        StartReport sr{kind, {}, std::nullopt, std::nullopt};
        sr.trace = matrixTrace(matrix::makeStart(problem, {kind, std::nullopt}), problem, oracle.joint, config.rounds);
        sr.klForwardCrossing = firstCrossing(sr.trace, &TraceRow::klForward, kKlThreshold);
        sr.klReverseCrossing = firstCrossing(sr.trace, &TraceRow::klReverse, kKlThreshold);
        const auto& last = sr.trace.back();
        const bool converged = last.klForward < kKlThreshold && last.klReverse < kKlThreshold;
        allConverged = allConverged && converged;
        json s = traceSummary(sr.trace);
        s["converged"] = converged;
        perStart[startName(kind)] = s;
        if (!config.outputPath.empty()) {
            writeText(config.outputPath + "_" + startName(kind) + ".csv", traceToCsv(sr.trace));
        }
        report.starts.push_back(std::move(sr));
    }
    const auto& imf = report.starts[0].klForwardCrossing;
    const auto& ipf = report.starts[1].klForwardCrossing;
    json ordering;
    ordering["imfCrossing"] = optionalJson(imf);
    ordering["ipfCrossing"] = optionalJson(ipf);
    ordering["imfNotSlowerThanIpf"] = imf && (!ipf || *imf <= *ipf);
    ordering["note"] = "reported, not asserted";
    report.summary["starts"] = perStart;
    report.summary["oracleRounds"] = oracle.rounds;
    report.summary["ordering"] = ordering;
    report.summary["flags"] = {{"allStartsConverged", allConverged}};
    report.summary["config"] = configToJson(config);
    report.passed = allConverged;
    report.summary["passed"] = report.passed;
    if (!config.outputPath.empty()) {
        writeText(config.outputPath + ".json", report.summary.dump(2) + "\n");
    }
    return report;
}

} // namespace ipmf::experiment
