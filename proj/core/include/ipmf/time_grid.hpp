#pragma once

#include <vector>

namespace ipmf {

/// Discretization 0 = t_0 < t_1 < ... < t_N < t_{N+1} = 1.
class TimeGrid {
public:
    /// Throws InvalidArgumentError unless the times start at 0, end at 1, are
    /// strictly increasing and include at least one interior point.
    explicit TimeGrid(std::vector<double> times);

    /// N interior points at k / (N + 1).
    static TimeGrid uniform(int interior);

    int size() const { return static_cast<int>(times_.size()); }
    int interiorCount() const { return size() - 2; }
    double operator[](int k) const { return times_[static_cast<std::size_t>(k)]; }
    const std::vector<double>& times() const { return times_; }

    bool operator==(const TimeGrid&) const = default;

private:
    std::vector<double> times_;
};

} // namespace ipmf
