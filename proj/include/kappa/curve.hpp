#pragma once

#include <string>
#include <vector>

namespace kappa {

/// A normalized interference-deficit curve sampled along a detector line.
struct KappaCurve {
    std::vector<double> positions_m;
    std::vector<double> angles_deg;
    std::vector<double> kappa;
    double normalization = 0.0; // the background power used as denominator
    std::string engine;         // "pathintegral", "fdtd", "array", ...
    std::string params_hash;    // hash of the producing configuration

    size_t size() const { return positions_m.size(); }
    /// Value at the position closest to x = 0.
    double central_value() const;
    /// Largest |kappa| over the curve.
    double max_abs() const;
};

} // namespace kappa
