#include "ipmf/time_grid.hpp"

#include "ipmf/errors.hpp"

namespace ipmf {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 3) {
        throw InvalidArgumentError("TimeGrid: need at least one interior time");
    }
    if (times_.front() != 0.0 || times_.back() != 1.0) {
        throw InvalidArgumentError("TimeGrid: times must start at 0 and end at 1");
    }
    for (std::size_t k = 1; k < times_.size(); ++k) {
        if (!(times_[k] > times_[k - 1])) {
            throw InvalidArgumentError("TimeGrid: times must be strictly increasing");
        }
    }
}

TimeGrid TimeGrid::uniform(int interior) {
    if (interior < 1) {
        throw InvalidArgumentError("TimeGrid::uniform: need at least one interior time");
    }
    std::vector<double> times(static_cast<std::size_t>(interior) + 2);
    const double n = static_cast<double>(interior + 1);
    for (int k = 0; k <= interior + 1; ++k) {
        times[static_cast<std::size_t>(k)] = static_cast<double>(k) / n;
    }
    times.back() = 1.0;
    return TimeGrid(std::move(times));
}

} // namespace ipmf
