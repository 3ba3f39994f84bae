#include "ipmf/errors.hpp"
#include "ipmf/experiment.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace ipmf::experiment;

constexpr int kExitPass = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Overrides {
    std::string configPath;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> rounds;
    std::optional<double> epsilon;
    std::optional<int> dim;
    std::optional<std::string> start;
};

void addCommonFlags(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.configPath, "JSON experiment config");
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--out", o.out, "Output prefix for <out>.csv and <out>.json");
    sub->add_option("--rounds", o.rounds, "Number of IPMF rounds");
    sub->add_option("--epsilon", o.epsilon, "Bridge volatility");
    sub->add_option("--dim", o.dim, "Dimension");
    sub->add_option("--start", o.start, "Starting coupling")
        ->check(CLI::IsMember({"imf", "ipf", "ind-p0", "custom"}));
}

ExperimentConfig resolve(const Overrides& o, Mode mode) {
    ExperimentConfig c = o.configPath.empty() ? ExperimentConfig{} : loadConfig(o.configPath);
    c.mode = mode;
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.outputPath = *o.out;
    if (o.rounds) c.rounds = *o.rounds;
    if (o.epsilon) c.epsilon = *o.epsilon;
    if (o.dim) c.dimension = *o.dim;
    if (o.start) c.start = parseStart(*o.start);
    c.validate();
    return c;
}

void emitSummary(const ExperimentConfig& c, const nlohmann::json& summary) {
    if (c.outputPath.empty()) {
        std::cout << summary.dump(2) << '\n';
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian IPMF experiments"};
    app.require_subcommand(1);

    Overrides o;
    struct Entry {
        const char* name;
        const char* help;
        Mode mode;
        bool compare;
    };
    const Entry entries[] = {
        {"run-1d", "Scalar IPMF trace", Mode::Scalar1d, false},
        {"run-nd", "Matrix IPMF trace against the fixed-point oracle", Mode::MatrixNd, false},
        {"verify-rates", "Check rate envelopes on random scalar instances", Mode::Rates, false},
        {"compare-starts", "Compare imf, ipf and ind-p0 starts on one matrix problem", Mode::MatrixNd, true},
        {"sinkhorn-oracle", "Compare closed-form correlations with discrete entropic plans", Mode::SinkhornOracle, false},
        {"mc-check", "Monte Carlo check of reciprocal covariances", Mode::McCheck, false},
    };
    const Entry* chosen = nullptr;
    for (const auto& e : entries) {
        auto* sub = app.add_subcommand(e.name, e.help);
        addCommonFlags(sub, o);
        sub->callback([&chosen, &e] { chosen = &e; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        const ExperimentConfig config = resolve(o, chosen->mode);
        if (chosen->compare) {
            const CompareReport report = compareStarts(config);
            emitSummary(config, report.summary);
            return report.passed ? kExitPass : kExitFailure;
        }
        const ExperimentResult result = runExperiment(config);
        if (config.outputPath.empty()) {
            std::cout << (result.table ? *result.table : traceToCsv(result.trace));
        }
        emitSummary(config, result.summary);
        return result.passed ? kExitPass : kExitFailure;
    } catch (const ConfigError& e) {
        std::cerr << "ipmf: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ipmf::Error& e) {
        std::cerr << "ipmf: numerical failure: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "ipmf: " << e.what() << '\n';
        return kExitFailure;
    }
}
