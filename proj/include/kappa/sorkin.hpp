#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include "kappa/curve.hpp"
#include "kappa/geometry.hpp"

namespace kappa::sorkin {

using geometry::Combination;

// ---------------------------------------------------------------------------
// Power bookkeeping
// ---------------------------------------------------------------------------

/// Detected powers for all 8 slot combinations at one detector position,
/// stored in canonical combination order, plus the background normalization
/// (the largest background power along the detector line).
struct PowerSet {
    std::array<double, 8> p{};
    double max_background = 0.0;

    double& at(Combination c) { return p[static_cast<size_t>(geometry::combination_index(c))]; }
    double at(Combination c) const { return p[static_cast<size_t>(geometry::combination_index(c))]; }
    double background() const { return p[0]; }
};

/// Third-order interference deficit normalized by the peak background:
///   kappa = (p_BG - (p_ABC - p_AB - p_BC - p_CA + p_A + p_B + p_C)) / max_bg
double kappa_pointwise(const PowerSet& ps);

/// Background-referenced form. P[i] holds
///   P_alpha = (p_BG_alpha - p_alpha) / p_BG_alpha
/// for the 7 slot combinations in canonical order (A..ABC) with each
/// combination referenced to its own background measurement, and gamma is
/// the local-to-peak background ratio p_BG(x) / max p_BG.
struct NormalizedContributionSet {
    std::array<double, 7> P{};
    double gamma = 1.0;
    std::array<double, 7> background{}; // the per-combination p_BG_alpha
};

/// Builds the contribution set from per-combination powers and backgrounds.
NormalizedContributionSet make_contributions(const std::array<double, 7>& powers,
                                             const std::array<double, 7>& backgrounds,
                                             double gamma);

///   kappa = gamma * (P_ABC - P_AB - P_BC - P_CA + P_A + P_B + P_C)
double kappa_background_referenced(const NormalizedContributionSet& ncs);

// ---------------------------------------------------------------------------
// Seven-region superposition identity
// ---------------------------------------------------------------------------

/// Combination powers built from seven per-region field sums. Regions 2, 4
/// and 6 are the bar locations for slots A, B and C; placing a bar absorbs
/// its region, so the power of a combination is
///   p = Re[(sum of kept E regions) * conj(sum of kept H regions)]
/// over the regions not covered by a placed bar (all 7 for the background).
/// Returns p_BG - (p_A + p_B + p_C - p_AB - p_BC - p_CA + p_ABC), which
/// cancels identically for any region values.
double slot_identity_residual(const std::array<std::complex<double>, 7>& e_regions,
                              const std::array<std::complex<double>, 7>& h_regions);
double slot_identity_residual(const std::array<std::complex<double>, 7>& e_regions);

/// Scale used to express the residual relative to the power magnitudes.
double slot_identity_scale(const std::array<std::complex<double>, 7>& e_regions,
                           const std::array<std::complex<double>, 7>& h_regions);

// ---------------------------------------------------------------------------
// First-order error propagation
// ---------------------------------------------------------------------------

struct PowerReading {
    double value = 0.0;
    double sigma = 0.0;
};

struct ErrorBudget {
    std::array<double, 7> delta_P{}; // per-combination uncertainty of P_alpha
    double sigma_kappa = 0.0;        // sqrt(sum delta_P^2)
};

/// delta_P_alpha = sqrt( (p_alpha / p_BG_alpha^2 * dp_BG_alpha)^2
///                     + (dp_alpha / p_BG_alpha)^2 )
/// Independence of the readings is assumed; gamma's uncertainty is ignored.
ErrorBudget propagate_errors(const std::array<PowerReading, 7>& combination_powers,
                             const std::array<PowerReading, 7>& backgrounds);

/// Single-combination helper (the formula above for one alpha).
double propagate_single(const PowerReading& power, const PowerReading& background);

// ---------------------------------------------------------------------------
// Detector nonlinearity
// ---------------------------------------------------------------------------

enum class FitKind { spline, polynomial };

/// Monotone calibration map fitted to (input power, measured power) pairs in
/// watts: a natural cubic spline interpolant or a least-squares polynomial.
class NonlinearityModel {
public:
    /// Requires >= 4 strictly increasing calibration points (in both columns
    /// for the spline). Throws std::invalid_argument if the data or fitted
    /// model is non-monotone, or if the polynomial degree is not below the
    /// number of points.
    static NonlinearityModel fit(const std::vector<double>& input_w,
                                 const std::vector<double>& measured_w,
                                 FitKind kind, int degree = 3);

    double operator()(double input_w) const;
    bool in_range(double input_w) const {
        return input_w >= range_lo_ && input_w <= range_hi_;
    }
    std::pair<double, double> range() const { return {range_lo_, range_hi_}; }
    FitKind kind() const { return kind_; }
    /// Polynomial coefficients in the unscaled basis, constant term first.
    /// Empty for spline fits.
    const std::vector<double>& coefficients() const { return poly_; }

    /// Input power whose mapped value equals measured_w (bisection; the map
    /// is monotone over the calibration range). Brackets expand along the
    /// model's own extrapolation outside the range and throw
    /// std::invalid_argument if no bracket exists there.
    double invert(double measured_w) const;

private:
    FitKind kind_ = FitKind::spline;
    double range_lo_ = 0.0, range_hi_ = 0.0;
    // spline data
    std::vector<double> x_, y_, m_; // knots, values, second derivatives
    // polynomial data (unscaled basis)
    std::vector<double> poly_;
};

NonlinearityModel fit_nonlinearity(const std::vector<double>& input_w,
                                   const std::vector<double>& measured_w,
                                   FitKind kind, int degree = 3);

/// Passes ideal per-position powers through the calibration map and
/// recomputes the pointwise kappa curve from the distorted powers. Counts
/// how many power values fell outside the calibration range (evaluated by
/// extrapolation).
struct ErrorKappaResult {
    KappaCurve curve;
    size_t extrapolated = 0;
};

ErrorKappaResult error_kappa(const NonlinearityModel& model,
                             const std::vector<double>& positions_m,
                             const std::vector<PowerSet>& ideal,
                             double plane_to_detector_m);

// ---------------------------------------------------------------------------
// Unit helpers
// ---------------------------------------------------------------------------

double watts_from_dbm(double dbm); // 10^((dBm - 30)/10)
double dbm_from_watts(double watts);

} // namespace kappa::sorkin
