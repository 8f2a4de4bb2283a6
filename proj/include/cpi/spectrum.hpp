#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>

namespace cpi {

enum class FrequencyUnit { Instance, Hertz };

inline const char* to_string(FrequencyUnit u) { return u == FrequencyUnit::Hertz ? "Hz" : "instance"; }

/// Two-sided line spectrum. Amplitudes use the time-average convention: a
/// signal c + A cos(w t) has lines c at 0 and A/2 at +-w. The DC line keeps
/// its sign; every other line is a magnitude.
struct Spectrum {
    std::map<double, double> lines;
    /// Bin width of a measured spectrum; 0 for analytic spectra.
    double resolution = 0.0;
    FrequencyUnit unit = FrequencyUnit::Instance;

    double dc() const {
        auto it = lines.find(0.0);
        return it == lines.end() ? 0.0 : it->second;
    }

    /// Largest |amplitude| among lines within tol of f.
    double amplitude_near(double f, double tol) const {
        double best = 0.0;
        for (auto it = lines.lower_bound(f - tol); it != lines.end() && it->first <= f + tol; ++it)
            best = std::max(best, std::abs(it->second));
        return best;
    }

    double total_power() const {
        double p = 0.0;
        for (const auto& [f, a] : lines) p += a * a;
        return p;
    }
};

/// Amplitude of a line in the unitary continuous Fourier convention divided
/// by the same line in the time-average convention: cos(a t) has weight
/// sqrt(pi/2) on each delta versus 1/2 here.
inline const double kUnitaryFourierScale = std::sqrt(2.0 * M_PI);

/// CSV with columns frequency, amplitude, sorted by frequency. A comment line
/// records the frequency unit.
inline std::string spectrum_to_csv(const Spectrum& s, const std::string& provenance = {}) {
    std::ostringstream out;
    out.precision(17);
    if (!provenance.empty()) out << provenance;
    out << "# units: " << to_string(s.unit) << "\n";
    if (s.resolution > 0) out << "# resolution: " << s.resolution << "\n";
    out << "frequency,amplitude\n";
    for (const auto& [f, a] : s.lines) out << f << ',' << a << '\n';
    return out.str();
}

}  // namespace cpi
