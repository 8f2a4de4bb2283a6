#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace cpi {

/// A voltage waveform on the dense internal simulation grid.
struct Signal {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> samples;
    /// Highest nominal frequency present (Hz); fixes the grid resolution.
    double f_max_nominal = 0.0;
    /// Nominal alignment period in seconds (0 when unknown). The grid spans
    /// a whole number of these.
    double align_period = 0.0;

    std::size_t size() const { return samples.size(); }
    double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    double duration() const { return static_cast<double>(samples.size()) * dt; }
    double mean() const {
        return samples.empty() ? 0.0
                               : std::accumulate(samples.begin(), samples.end(), 0.0) /
                                     static_cast<double>(samples.size());
    }
    /// Signal of the same grid with every sample set to value.
    Signal like(double value = 0.0) const {
        Signal s = *this;
        std::fill(s.samples.begin(), s.samples.end(), value);
        return s;
    }
};

inline bool same_grid(const Signal& a, const Signal& b) {
    return a.samples.size() == b.samples.size() && a.t0 == b.t0 && a.dt == b.dt;
}

}  // namespace cpi
