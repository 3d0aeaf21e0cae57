#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace kappa::geometry {

// ---------------------------------------------------------------------------
// Slot combinations
// ---------------------------------------------------------------------------

enum class Slot : unsigned { A = 0, B = 1, C = 2 };

/// Subset of the three slots {A,B,C}. The empty set is the open background.
class Combination {
public:
    Combination() = default;

    static Combination empty() { return {}; }
    static Combination of(std::initializer_list<Slot> slots);
    /// Accepts "BG" or "" for the background plus "A".."ABC" (letters in
    /// canonical order). Throws std::invalid_argument on anything else.
    static Combination from_label(std::string_view label);

    bool contains(Slot s) const { return bits_ & (1u << static_cast<unsigned>(s)); }
    int count() const;
    unsigned bits() const { return bits_; }

    /// "BG", "A", "B", "C", "AB", "BC", "CA" or "ABC".
    std::string label() const;

    /// Mirror about the central slot: A and C swap, B stays.
    Combination mirrored() const;

    bool operator==(const Combination&) const = default;

private:
    explicit Combination(unsigned bits) : bits_(bits) {}
    unsigned bits_ = 0;
};

/// The 8 combinations in canonical order: BG, A, B, C, AB, BC, CA, ABC.
const std::array<Combination, 8>& enumerate_combinations();

/// Index of a combination in the canonical order above.
int combination_index(Combination c);

// ---------------------------------------------------------------------------
// Slot plane layout
// ---------------------------------------------------------------------------

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
    double center() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

enum class BaffleSide { source, detector, both };

/// Absorber-slot plane: slots are absorbing bars on an otherwise open plane,
/// lying along x at a fixed distance from the source. Distances are along the
/// propagation axis z. All lengths in meters.
struct PlaneLayout {
    double slot_width = 0.10;
    std::array<double, 3> slot_centers{-0.13, 0.0, 0.13};
    double slot_height = 0.30;  // recorded for bookkeeping; 2D engines ignore it
    Combination combination;    // which bars are actually placed
    double baffle_length = 0.0; // 0 disables baffles
    std::vector<double> baffle_positions; // x of baffles (midway between slots)
    BaffleSide baffle_side = BaffleSide::detector;
    double source_to_plane = 1.25;
    double plane_to_detector = 1.25;

    /// Bars present under the active combination, in ascending x.
    std::vector<Interval> absorber_intervals() const;
    /// Same bars shrunk to the given width about their centers.
    std::vector<Interval> absorber_intervals(double effective_width) const;
    /// Outermost |edge| over the slot geometry (combination-independent).
    double outermost_slot_edge() const;

    PlaneLayout with_combination(Combination c) const;
    PlaneLayout mirrored() const;
};

/// Builds the standard three-slot plane with pitch d between slot centers.
/// Baffle positions default to the two midpoints between adjacent slots.
/// Throws std::invalid_argument if w <= 0, d <= 0, baffle_length < 0 or the
/// bars would overlap (d <= w).
PlaneLayout build_plane(double slot_width, double slot_pitch, Combination c,
                        double baffle_length = 0.0);

// ---------------------------------------------------------------------------
// Region decomposition of the slot plane
// ---------------------------------------------------------------------------

struct Region {
    int index = 0;      // 1-based, ascending x
    bool absorber = false;
    double lo = 0.0;    // -inf for the first region
    double hi = 0.0;    // +inf for the last region
};

/// Splits the plane line into alternating open/absorber regions for the bars
/// present under the layout's combination: 2n+1 regions for n bars (7 for the
/// full three-slot combination, where regions 2, 4 and 6 are the bars).
/// Throws std::invalid_argument if no bars are present.
std::vector<Region> region_decomposition(const PlaneLayout& layout);

// ---------------------------------------------------------------------------
// Detector line
// ---------------------------------------------------------------------------

struct DetectorLine {
    std::vector<double> positions; // x along the line, strictly increasing
    double plane_to_detector = 1.25;

    /// angle_i = arctan(position_i / plane_to_detector), in degrees.
    std::vector<double> angles_deg() const;

    /// n equally spaced positions spanning [-half_span, +half_span].
    static DetectorLine symmetric(double half_span, int n, double plane_to_det);
};

// ---------------------------------------------------------------------------
// Ground-reflection budget
// ---------------------------------------------------------------------------

struct GroundReflection {
    double bounce_angle_deg = 0.0;
    double relative_power_change = 0.0; // reflected-path power / direct power
};

/// Single-bounce budget for antennas at the given height above ground and a
/// source-detector separation of 2*half_separation. gain_pattern maps an
/// off-boresight angle in degrees to a relative power gain in [0,1]; it is
/// applied at both ends of the bounce path. reflection_coeff is the power
/// fraction returned by the ground.
GroundReflection ground_reflection_budget(double antenna_height,
                                          double half_separation,
                                          const std::function<double(double)>& gain_pattern,
                                          double reflection_coeff);

/// Reference horn pattern used by the budget demos: a Gaussian beam in dB
/// with -15 dB relative power at 54.46 degrees off boresight.
double reference_horn_gain(double angle_deg);

// ---------------------------------------------------------------------------
// Flat key=value serialization (layout plus the operating wavelength)
// ---------------------------------------------------------------------------

std::string layout_to_kv(const PlaneLayout& layout, double wavelength_m);

struct LayoutConfig {
    PlaneLayout layout;
    double wavelength_m = 0.05;
};

/// Parses the output of layout_to_kv. Unknown keys are a hard error.
LayoutConfig layout_from_kv(std::istream& in);
LayoutConfig layout_from_kv(const std::string& text);

} // namespace kappa::geometry
