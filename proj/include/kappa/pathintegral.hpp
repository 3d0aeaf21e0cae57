#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include "kappa/curve.hpp"
#include "kappa/geometry.hpp"
#include "kappa/sorkin.hpp"

namespace kappa::pathintegral {

using geometry::Combination;
using geometry::DetectorLine;
using geometry::PlaneLayout;

struct Point {
    double x = 0.0;
    double z = 0.0;
};

enum class KernelForm { two_d, three_d };
enum class BaffleModel { reroute, block };

/// Ordered aperture pair (slot indices 0..2) contributing plane-hugging hops.
struct HopPair {
    int from = 0;
    int to = 0;
    bool operator==(const HopPair&) const = default;
};

struct PropagationParams {
    double wavelength = 0.05;
    /// Bars are narrowed to this width in the propagation integrals to
    /// account for field penetration at the absorber edges.
    double effective_slot_width = 0.07;
    int quadrature_points_per_wavelength = 16;
    /// Half-extent of the truncated plane integral, measured from the axis.
    /// Defaults to the outermost slot edge + 25 wavelengths.
    std::optional<double> integration_window;
    /// Ordered aperture pairs carrying hop terms; empty means all pairs.
    std::vector<HopPair> hop_pairs;
    KernelForm kernel_form = KernelForm::two_d;
    BaffleModel baffle_model = BaffleModel::reroute;
    /// Amplitude attenuation scale (meters) applied to the extra detour a
    /// hop takes over a baffle tip: exp(-(detour - direct)/scale). Infinity
    /// disables the attenuation, leaving only the geometric spreading of the
    /// longer tip path. Rerouting acts on the amplitude alone; the phase
    /// keeps the direct chord value so the suppression stays monotone.
    double baffle_absorption_length = 0.05;

    double wavenumber() const;
    double window_half_extent(const PlaneLayout& layout) const;
    void validate(const PlaneLayout& layout) const;
    /// Stable hash of every parameter that affects computed numbers.
    std::string params_hash(const PlaneLayout& layout) const;
};

/// Free propagation factor between two points: exp(ikr)/sqrt(r) in the
/// planar form, exp(ikr)/r in the 3D form. Throws on coincident points.
std::complex<double> kernel(Point a, Point b, double k,
                            KernelForm form = KernelForm::two_d);

/// Single plane-crossing amplitude: the open-plane integral minus one
/// aperture integral per placed bar, with the Fresnel crossing measure
/// sqrt(k/(2*pi))*exp(-i*pi/4) applied, so that the background amplitude
/// reproduces kernel(source -> detector) up to window truncation ripple.
std::complex<double> classical_amplitude(Point source, Point detector,
                                         const PlaneLayout& layout,
                                         const PropagationParams& params);

/// Double-crossing correction: ordered hop pairs between the apertures of
/// distinct placed bars, kernel(source->y1)*kernel(y1->y2)*kernel(y2->det)
/// integrated over both apertures. Hop chords that pass a baffle are
/// rerouted over its tip (or blocked, per the baffle model). Returned with
/// the complementarity sign, so total = classical + nonclassical.
std::complex<double> nonclassical_amplitude(Point source, Point detector,
                                            const PlaneLayout& layout,
                                            const PropagationParams& params);

/// Classical and hop amplitudes for all 8 combinations of a layout family,
/// sharing one quadrature so superposition bookkeeping is exact.
struct AmplitudeBreakdown {
    std::array<std::complex<double>, 8> classical{};
    std::array<std::complex<double>, 8> nonclassical{};
    std::complex<double> total(int i) const { return classical[i] + nonclassical[i]; }
};

AmplitudeBreakdown amplitude_breakdown(Point source, Point detector,
                                       const PlaneLayout& layout,
                                       const PropagationParams& params,
                                       bool include_nonclassical);

/// |classical (+ nonclassical)|^2 for the layout's active combination.
double combination_power(Point source, Point detector, const PlaneLayout& layout,
                         const PropagationParams& params, bool include_nonclassical);

/// Kappa along the detector line, normalized by the largest background
/// power on the line. The layout's combination field is ignored; all 8 are
/// evaluated.
KappaCurve kappa_curve_pathintegral(const PlaneLayout& layout,
                                    const DetectorLine& detectors,
                                    const PropagationParams& params,
                                    bool include_nonclassical = true);

/// |kappa| at the central detector position for each baffle length.
/// Lengths must be non-negative and increasing; +infinity is accepted as a
/// fully blocking final entry.
std::vector<std::pair<double, double>> baffle_sweep(const PlaneLayout& layout,
                                                    const PropagationParams& params,
                                                    const std::vector<double>& baffle_lengths,
                                                    bool include_nonclassical = true);

// ---------------------------------------------------------------------------
// Antenna-array mode
// ---------------------------------------------------------------------------

/// Uniform linear array factor sum_{m=0}^{n-1} exp(i m k d sin(theta)).
std::complex<double> array_factor(int n_elements, double spacing, double k,
                                  double theta_rad);

struct DipoleArrayParams {
    int n_elements = 3;
    double wavelength = 1.0;            // works in wavelength units by default
    double spacing = 10.0;              // element pitch, same units
    double observation_distance = 1e3;  // axis distance to the observation line
    double half_span = 300.0;           // observation line half extent
    int n_positions = 61;
    double wire_radius = 0.01;          // element wire radius (thinness check)
    double element_length = 0.5;        // half-wave elements assumed resonant
    bool include_coupling = true;       // element-to-element single scattering
    bool elements_as_receivers = false; // swap roles of drive and observation

    void validate() const;
    std::string params_hash() const;
};

/// Element-to-element scattering length of a resonant half-wave thin-wire
/// element (induced-EMF model), in the spherical-kernel units used by
/// kappa_dipole_array.
std::complex<double> thin_wire_coupling(double k, double wire_radius);

/// Sorkin deficit of a three-element array over element on/off subsets,
/// normalized by the peak all-elements power (the no-element background is
/// dark, so the full-array pattern provides the reference). Coupling off
/// reduces every subset to a plain phasor sum and the deficit cancels.
KappaCurve kappa_dipole_array(const DipoleArrayParams& params);

} // namespace kappa::pathintegral
