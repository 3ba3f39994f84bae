#include "ipmf/experiment.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ipmf::experiment {

namespace {

using nlohmann::json;

template <typename T>
T fetch(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

} // namespace

int ExperimentConfig::effectiveDimension() const {
    if (dimension) {
        return *dimension;
    }
    switch (mode) {
    case Mode::MatrixNd: return 16;
    case Mode::McCheck: return 4;
    default: return 1;
    }
}

double ExperimentConfig::effectiveEpsilon() const {
    if (epsilon) {
        return *epsilon;
    }
    return mode == Mode::MatrixNd ? 0.3 : 1.0;
}

int ExperimentConfig::effectiveInstances() const {
    if (instances > 0) {
        return instances;
    }
    switch (mode) {
    case Mode::Rates: return 200;
    case Mode::SinkhornOracle: return 20;
    case Mode::McCheck: return 10;
    default: return 1;
    }
}

void ExperimentConfig::validate() const {
    if (effectiveDimension() < 1) {
        throw ConfigError("dimension must be at least 1");
    }
    if (mode == Mode::Scalar1d && effectiveDimension() != 1) {
        throw ConfigError("scalar1d runs in dimension 1");
    }
    const double eps = effectiveEpsilon();
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw ConfigError("epsilon must be positive and finite");
    }
    if (rounds < 1) {
        throw ConfigError("rounds must be at least 1");
    }
    if (gridN < 1) {
        throw ConfigError("gridN must be at least 1");
    }
    if (!(spectrumSpec.logLo <= spectrumSpec.logHi) || !std::isfinite(spectrumSpec.logLo) ||
        !std::isfinite(spectrumSpec.logHi)) {
        throw ConfigError("spectrumSpec.logUniformRange must be an ordered pair of finite reals");
    }
    if (!(sigma0 > 0.0) || !(sigma1 > 0.0)) {
        throw ConfigError("sigma0 and sigma1 must be positive");
    }
    if (!(imfTime > 0.0 && imfTime < 1.0)) {
        throw ConfigError("imfTime must lie in (0, 1)");
    }
    if (start == matrix::StartKind::Custom) {
        if (!customRho) {
            throw ConfigError("start 'custom' needs customRho");
        }
        if (!(std::abs(*customRho) <= 1.0)) {
            throw ConfigError("customRho must lie in [-1, 1]");
        }
    }
    if (instances < 0) {
        throw ConfigError("instances must be nonnegative");
    }
    if (gridSize < 100) {
        throw ConfigError("gridSize must be at least 100");
    }
    if (!(span >= 5.0)) {
        throw ConfigError("span must be at least 5");
    }
    if (samples < 2) {
        throw ConfigError("samples must be at least 2");
    }
}

Mode parseMode(const std::string& name) {
    if (name == "scalar1d") return Mode::Scalar1d;
    if (name == "matrixNd") return Mode::MatrixNd;
    if (name == "rates") return Mode::Rates;
    if (name == "sinkhornOracle") return Mode::SinkhornOracle;
    if (name == "mcCheck") return Mode::McCheck;
    throw ConfigError("unknown mode '" + name + "'");
}

std::string modeName(Mode mode) {
    switch (mode) {
    case Mode::Scalar1d: return "scalar1d";
    case Mode::MatrixNd: return "matrixNd";
    case Mode::Rates: return "rates";
    case Mode::SinkhornOracle: return "sinkhornOracle";
    case Mode::McCheck: return "mcCheck";
    }
    return "unknown";
}

matrix::StartKind parseStart(const std::string& name) {
    if (name == "imf") return matrix::StartKind::Imf;
    if (name == "ipf") return matrix::StartKind::Ipf;
    if (name == "ind-p0") return matrix::StartKind::IndependentP0P0;
    if (name == "custom") return matrix::StartKind::Custom;
    throw ConfigError("unknown start '" + name + "' (expected imf, ipf, ind-p0 or custom)");
}

std::string startName(matrix::StartKind kind) {
    switch (kind) {
    case matrix::StartKind::Imf: return "imf";
    case matrix::StartKind::Ipf: return "ipf";
    case matrix::StartKind::IndependentP0P0: return "ind-p0";
    case matrix::StartKind::Custom: return "custom";
    }
    return "unknown";
}

ExperimentConfig configFromJson(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    static const std::set<std::string> known = {
        "mode",  "dimension", "epsilon",       "rounds",   "start",     "customRho", "seed",
        "gridN", "spectrumSpec", "outputPath", "mu0",      "sigma0",    "mu1",       "sigma1",
        "continuousImf", "imfTime",   "instances",     "gridSize", "span",      "samples"};
    for (const auto& item : j.items()) {
        if (known.count(item.key()) == 0) {
            throw ConfigError("unknown config key '" + item.key() + "'");
        }
    }
    ExperimentConfig c;
    if (j.contains("mode")) c.mode = parseMode(fetch<std::string>(j, "mode"));
    if (j.contains("dimension")) c.dimension = fetch<int>(j, "dimension");
    if (j.contains("epsilon")) c.epsilon = fetch<double>(j, "epsilon");
    if (j.contains("rounds")) c.rounds = fetch<int>(j, "rounds");
    if (j.contains("start")) c.start = parseStart(fetch<std::string>(j, "start"));
    if (j.contains("customRho")) c.customRho = fetch<double>(j, "customRho");
    if (j.contains("seed")) c.seed = fetch<std::uint64_t>(j, "seed");
    if (j.contains("gridN")) c.gridN = fetch<int>(j, "gridN");
    if (j.contains("spectrumSpec")) {
        const json& s = j.at("spectrumSpec");
        if (!s.is_object()) {
            throw ConfigError("spectrumSpec must be an object");
        }
        for (const auto& item : s.items()) {
            if (item.key() != "logUniformRange" && item.key() != "orthogonalSeed") {
                throw ConfigError("unknown spectrumSpec key '" + item.key() + "'");
            }
        }
        if (s.contains("logUniformRange")) {
            const auto range = fetch<std::vector<double>>(s, "logUniformRange");
            if (range.size() != 2) {
                throw ConfigError("spectrumSpec.logUniformRange must have two entries");
            }
            c.spectrumSpec.logLo = range[0];
            c.spectrumSpec.logHi = range[1];
        }
        if (s.contains("orthogonalSeed")) c.spectrumSpec.orthogonalSeed = fetch<std::uint64_t>(s, "orthogonalSeed");
    }
    if (j.contains("outputPath")) c.outputPath = fetch<std::string>(j, "outputPath");
    if (j.contains("mu0")) c.mu0 = fetch<double>(j, "mu0");
    if (j.contains("sigma0")) c.sigma0 = fetch<double>(j, "sigma0");
    if (j.contains("mu1")) c.mu1 = fetch<double>(j, "mu1");
    if (j.contains("sigma1")) c.sigma1 = fetch<double>(j, "sigma1");
    if (j.contains("continuousImf")) c.continuousImf = fetch<bool>(j, "continuousImf");
    if (j.contains("imfTime")) c.imfTime = fetch<double>(j, "imfTime");
    if (j.contains("instances")) c.instances = fetch<int>(j, "instances");
    if (j.contains("gridSize")) c.gridSize = fetch<int>(j, "gridSize");
    if (j.contains("span")) c.span = fetch<double>(j, "span");
    if (j.contains("samples")) c.samples = fetch<int>(j, "samples");
    return c;
}

ExperimentConfig loadConfig(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return configFromJson(j);
}

json configToJson(const ExperimentConfig& c) {
    json j;
    j["mode"] = modeName(c.mode);
    j["dimension"] = c.effectiveDimension();
    j["epsilon"] = c.effectiveEpsilon();
    j["rounds"] = c.rounds;
    j["start"] = startName(c.start);
    if (c.customRho) j["customRho"] = *c.customRho;
    j["seed"] = c.seed;
    j["gridN"] = c.gridN;
    j["spectrumSpec"] = {{"logUniformRange", {c.spectrumSpec.logLo, c.spectrumSpec.logHi}},
                         {"orthogonalSeed", c.spectrumSpec.orthogonalSeed}};
    j["outputPath"] = c.outputPath;
    j["mu0"] = c.mu0;
    j["sigma0"] = c.sigma0;
    j["mu1"] = c.mu1;
    j["sigma1"] = c.sigma1;
    j["continuousImf"] = c.continuousImf;
    j["imfTime"] = c.imfTime;
    j["instances"] = c.effectiveInstances();
    j["gridSize"] = c.gridSize;
    j["span"] = c.span;
    j["samples"] = c.samples;
    return j;
}

} // namespace ipmf::experiment
