#include "kappa/curve.hpp"

#include <cmath>
#include <stdexcept>

namespace kappa {

double KappaCurve::central_value() const {
    if (positions_m.empty()) throw std::out_of_range("empty kappa curve");
    size_t best = 0;
    for (size_t i = 1; i < positions_m.size(); ++i)
        if (std::abs(positions_m[i]) < std::abs(positions_m[best])) best = i;
    return kappa[best];
}

double KappaCurve::max_abs() const {
    if (kappa.empty()) throw std::out_of_range("empty kappa curve");
    double m = 0.0;
    for (double k : kappa) m = std::max(m, std::abs(k));
    return m;
}

} // namespace kappa
