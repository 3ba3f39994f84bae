#include "ipmf/experiment.hpp"

#include <cstdio>
#include <fstream>

namespace ipmf::experiment {

std::string formatReal(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

std::string optionalReal(const std::optional<double>& v) { return v ? formatReal(*v) : std::string(); }

} // namespace

std::string traceToCsv(const IpmfTrace& trace) {
    std::string out = kTraceHeader;
    out += '\n';
    for (const auto& r : trace) {
        out += std::to_string(r.round);
        for (double v : {r.klForward, r.klReverse, r.chiError, r.marginalErr0, r.marginalErr1}) {
            out += ',';
            out += formatReal(v);
        }
        for (const auto* v : {&r.sK, &r.nuK, &r.rhoK}) {
            out += ',';
            out += optionalReal(*v);
        }
        out += '\n';
    }
    return out;
}

std::optional<int> firstCrossing(const IpmfTrace& trace, double TraceRow::*field, double threshold) {
    for (const auto& r : trace) {
        if (r.*field < threshold) {
            return r.round;
        }
    }
    return std::nullopt;
}

void writeText(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << text;
}

} // namespace ipmf::experiment
