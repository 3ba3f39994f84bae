#pragma once

// Experiment runners behind the ipmf command-line tool.

#include "ipmf/bridge_mc.hpp"
#include "ipmf/matrix.hpp"
#include "ipmf/rng.hpp"
#include "ipmf/scalar.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ipmf::experiment {

/// Invalid configuration (maps to the usage exit code).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Mode { Scalar1d, MatrixNd, Rates, SinkhornOracle, McCheck };

struct SpectrumSpec {
    double logLo = -0.69314718055994531;
    double logHi = 0.69314718055994531;
    std::uint64_t orthogonalSeed = 0;
};

struct ExperimentConfig {
    Mode mode = Mode::MatrixNd;
    std::optional<int> dimension;
    std::optional<double> epsilon;
    int rounds = 100;
    matrix::StartKind start = matrix::StartKind::Imf;
    std::optional<double> customRho;
    std::uint64_t seed = 0;
    int gridN = 1;
    SpectrumSpec spectrumSpec;
    std::string outputPath;

    // scalar1d problem and IMF flavour
    double mu0 = 0.0;
    double sigma0 = 1.0;
    double mu1 = 0.0;
    double sigma1 = 1.0;
    bool continuousImf = false;
    double imfTime = 0.5;

    // rates, sinkhornOracle, mcCheck
    int instances = 0; ///< 0 selects the mode default (200, 20, 10)
    int gridSize = 400;
    double span = 6.0;
    int samples = 100000;

    int effectiveDimension() const;
    double effectiveEpsilon() const;
    int effectiveInstances() const;

    /// Throws ConfigError when a field is out of range.
    void validate() const;
};

Mode parseMode(const std::string& name);
std::string modeName(Mode mode);
matrix::StartKind parseStart(const std::string& name);
std::string startName(matrix::StartKind kind);

/// Keys are the ExperimentConfig field names; unknown keys are rejected.
ExperimentConfig configFromJson(const nlohmann::json& j);
ExperimentConfig loadConfig(const std::string& path);
nlohmann::json configToJson(const ExperimentConfig& config);

/// Two centered Gaussians with covariances Q diag(exp(u)) Q^T, Q Haar-distributed,
/// u uniform on [logLo, logHi].
std::pair<GaussianND, GaussianND> buildCovariancePair(int dimension, const SpectrumSpec& spectrum,
                                                      std::uint64_t seed);

/// Haar orthogonal matrix: QR of a Gaussian matrix with the signs of diag(R) folded into Q.
Matrix haarOrthogonal(Index dimension, Rng& rng);

/// Instance of the rate family: sigma in [0.5, 2], |mu| <= 2, epsilon in {0.1, 1, 10},
/// rho in (-0.99, 0.99), start pinned at p0.
std::pair<scalar::ScalarProblem, scalar::ScalarIterate> randomRateInstance(Rng& rng);

/// Random coupling used by mc-check: full covariance G G^T / (2D) + 0.1 I, means N(0, I).
JointGaussian randomCoupling(Index dimension, Rng& rng);

struct TraceRow {
    int round = 0;
    double klForward = 0.0;
    double klReverse = 0.0;
    double chiError = 0.0;
    double marginalErr0 = 0.0;
    double marginalErr1 = 0.0;
    std::optional<double> sK;
    std::optional<double> nuK;
    std::optional<double> rhoK;
};

using IpmfTrace = std::vector<TraceRow>;

/// Fixed CSV header shared by every trace.
inline constexpr const char* kTraceHeader = "round,klForward,klReverse,chiError,marginalErr0,marginalErr1,sK,nuK,rhoK";

std::string formatReal(double value);
std::string traceToCsv(const IpmfTrace& trace);

struct ExperimentResult {
    IpmfTrace trace;
    /// Mode-specific table for modes without a per-round trace (header + rows).
    std::optional<std::string> table;
    nlohmann::json summary;
    bool passed = false;
};

ExperimentResult runScalar(const ExperimentConfig& config);
ExperimentResult runMatrix(const ExperimentConfig& config);
ExperimentResult runRates(const ExperimentConfig& config);
ExperimentResult runSinkhornOracle(const ExperimentConfig& config);
ExperimentResult runMcCheck(const ExperimentConfig& config);

/// Dispatch on config.mode; writes <outputPath>.csv and <outputPath>.json when outputPath is set.
ExperimentResult runExperiment(const ExperimentConfig& config);

struct StartReport {
    matrix::StartKind kind;
    IpmfTrace trace;
    std::optional<int> klForwardCrossing; ///< first round with klForward < 1e-6
    std::optional<int> klReverseCrossing;
};

struct CompareReport {
    std::vector<StartReport> starts;
    int oracleRounds = 0;
    nlohmann::json summary;
    bool passed = false;
};

/// imf, ipf and ind-p0 starts on one matrixNd problem. Writes <out>_<start>.csv and <out>.json.
CompareReport compareStarts(const ExperimentConfig& config);

/// First round at which value < threshold, if any.
std::optional<int> firstCrossing(const IpmfTrace& trace, double TraceRow::*field, double threshold);

void writeText(const std::string& path, const std::string& text);

} // namespace ipmf::experiment
