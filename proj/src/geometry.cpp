#include "kappa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace kappa::geometry {

// ---------------------------------------------------------------------------
// Combination
// ---------------------------------------------------------------------------

Combination Combination::of(std::initializer_list<Slot> slots) {
    unsigned bits = 0;
    for (Slot s : slots) bits |= 1u << static_cast<unsigned>(s);
    return Combination(bits);
}

Combination Combination::from_label(std::string_view label) {
    if (label.empty() || label == "BG") return {};
    unsigned bits = 0;
    for (char ch : label) {
        switch (ch) {
        case 'A': bits |= 1u; break;
        case 'B': bits |= 2u; break;
        case 'C': bits |= 4u; break;
        default:
            throw std::invalid_argument("bad combination label: " + std::string(label));
        }
    }
    Combination c(bits);
    if (c.label() != label)
        throw std::invalid_argument("bad combination label: " + std::string(label));
    return c;
}

int Combination::count() const {
    return (bits_ & 1u ? 1 : 0) + (bits_ & 2u ? 1 : 0) + (bits_ & 4u ? 1 : 0);
}

std::string Combination::label() const {
    if (bits_ == 0) return "BG";
    // Letters in canonical pair order: the cyclic pair {C,A} reads "CA".
    if (bits_ == 5u) return "CA";
    std::string out;
    if (bits_ & 1u) out += 'A';
    if (bits_ & 2u) out += 'B';
    if (bits_ & 4u) out += 'C';
    return out;
}

Combination Combination::mirrored() const {
    unsigned bits = bits_ & 2u;           // B is self-mirrored
    if (bits_ & 1u) bits |= 4u;           // A -> C
    if (bits_ & 4u) bits |= 1u;           // C -> A
    return Combination(bits);
}

const std::array<Combination, 8>& enumerate_combinations() {
    static const std::array<Combination, 8> all = {
        Combination::from_label("BG"), Combination::from_label("A"),
        Combination::from_label("B"),  Combination::from_label("C"),
        Combination::from_label("AB"), Combination::from_label("BC"),
        Combination::from_label("CA"), Combination::from_label("ABC"),
    };
    return all;
}

int combination_index(Combination c) {
    const auto& all = enumerate_combinations();
    for (int i = 0; i < 8; ++i)
        if (all[static_cast<size_t>(i)] == c) return i;
    throw std::logic_error("combination_index: unreachable");
}

// ---------------------------------------------------------------------------
// PlaneLayout
// ---------------------------------------------------------------------------

std::vector<Interval> PlaneLayout::absorber_intervals() const {
    return absorber_intervals(slot_width);
}

std::vector<Interval> PlaneLayout::absorber_intervals(double effective_width) const {
    static const Slot slots[3] = {Slot::A, Slot::B, Slot::C};
    std::vector<Interval> bars;
    for (int i = 0; i < 3; ++i) {
        if (!combination.contains(slots[i])) continue;
        double c = slot_centers[static_cast<size_t>(i)];
        bars.push_back({c - 0.5 * effective_width, c + 0.5 * effective_width});
    }
    std::sort(bars.begin(), bars.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    return bars;
}

double PlaneLayout::outermost_slot_edge() const {
    double edge = 0.0;
    for (double c : slot_centers)
        edge = std::max(edge, std::abs(c) + 0.5 * slot_width);
    return edge;
}

PlaneLayout PlaneLayout::with_combination(Combination c) const {
    PlaneLayout out = *this;
    out.combination = c;
    return out;
}

PlaneLayout PlaneLayout::mirrored() const {
    PlaneLayout out = *this;
    out.combination = combination.mirrored();
    for (size_t i = 0; i < 3; ++i) out.slot_centers[i] = -slot_centers[2 - i];
    for (double& b : out.baffle_positions) b = -b;
    std::sort(out.baffle_positions.begin(), out.baffle_positions.end());
    return out;
}

PlaneLayout build_plane(double slot_width, double slot_pitch, Combination c,
                        double baffle_length) {
    if (slot_width <= 0.0) throw std::invalid_argument("slot width must be positive");
    if (slot_pitch <= 0.0) throw std::invalid_argument("slot pitch must be positive");
    if (slot_pitch <= slot_width)
        throw std::invalid_argument("slot pitch must exceed slot width (bars overlap)");
    if (baffle_length < 0.0) throw std::invalid_argument("baffle length must be >= 0");

    PlaneLayout layout;
    layout.slot_width = slot_width;
    layout.slot_centers = {-slot_pitch, 0.0, slot_pitch};
    layout.combination = c;
    layout.baffle_length = baffle_length;
    layout.baffle_positions = {-0.5 * slot_pitch, 0.5 * slot_pitch};
    return layout;
}

// ---------------------------------------------------------------------------
// Region decomposition
// ---------------------------------------------------------------------------

std::vector<Region> region_decomposition(const PlaneLayout& layout) {
    const auto bars = layout.absorber_intervals();
    if (bars.empty())
        throw std::invalid_argument("region decomposition needs at least one bar");
    for (size_t i = 1; i < bars.size(); ++i)
        if (bars[i].lo <= bars[i - 1].hi)
            throw std::invalid_argument("absorber bars overlap");

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<Region> regions;
    int index = 1;
    double lo = -inf;
    for (const Interval& bar : bars) {
        regions.push_back({index++, false, lo, bar.lo});
        regions.push_back({index++, true, bar.lo, bar.hi});
        lo = bar.hi;
    }
    regions.push_back({index, false, lo, inf});
    return regions;
}

// ---------------------------------------------------------------------------
// DetectorLine
// ---------------------------------------------------------------------------

std::vector<double> DetectorLine::angles_deg() const {
    std::vector<double> out;
    out.reserve(positions.size());
    for (double x : positions)
        out.push_back(std::atan2(x, plane_to_detector) * 180.0 / std::numbers::pi);
    return out;
}

DetectorLine DetectorLine::symmetric(double half_span, int n, double plane_to_det) {
    if (half_span <= 0.0) throw std::invalid_argument("detector half span must be positive");
    if (n < 1) throw std::invalid_argument("detector line needs at least one point");
    if (plane_to_det <= 0.0) throw std::invalid_argument("plane-detector distance must be positive");
    DetectorLine line;
    line.plane_to_detector = plane_to_det;
    if (n == 1) {
        line.positions = {0.0};
        return line;
    }
    line.positions.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        line.positions.push_back(-half_span + 2.0 * half_span * i / (n - 1));
    return line;
}

// ---------------------------------------------------------------------------
// Ground reflection
// ---------------------------------------------------------------------------

GroundReflection ground_reflection_budget(double antenna_height,
                                          double half_separation,
                                          const std::function<double(double)>& gain_pattern,
                                          double reflection_coeff) {
    if (antenna_height <= 0.0) throw std::invalid_argument("antenna height must be positive");
    if (half_separation <= 0.0) throw std::invalid_argument("half separation must be positive");
    if (reflection_coeff < 0.0 || reflection_coeff > 1.0)
        throw std::invalid_argument("reflection coefficient must lie in [0,1]");

    GroundReflection out;
    out.bounce_angle_deg =
        std::atan2(antenna_height, half_separation) * 180.0 / std::numbers::pi;
    const double g = gain_pattern(out.bounce_angle_deg);
    out.relative_power_change = g * g * reflection_coeff;
    return out;
}

double reference_horn_gain(double angle_deg) {
    // -15 dB relative power at the canonical 1.75 m / 1.25 m bounce angle.
    static const double ref_angle = std::atan2(1.75, 1.25) * 180.0 / std::numbers::pi;
    const double u = angle_deg / ref_angle;
    return std::pow(10.0, -1.5 * u * u);
}

// ---------------------------------------------------------------------------
// Flat key=value serialization
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double slot_pitch_of(const PlaneLayout& layout) {
    const double d1 = layout.slot_centers[1] - layout.slot_centers[0];
    const double d2 = layout.slot_centers[2] - layout.slot_centers[1];
    if (std::abs(d1 - d2) > 1e-12 * std::max(std::abs(d1), 1.0))
        throw std::invalid_argument("layout serialization requires a uniform slot pitch");
    return d1;
}

} // namespace

std::string layout_to_kv(const PlaneLayout& layout, double wavelength_m) {
    std::ostringstream out;
    out << "wavelength_m = " << fmt_double(wavelength_m) << "\n"
        << "slot_width_m = " << fmt_double(layout.slot_width) << "\n"
        << "slot_pitch_m = " << fmt_double(slot_pitch_of(layout)) << "\n"
        << "src_to_plane_m = " << fmt_double(layout.source_to_plane) << "\n"
        << "plane_to_det_m = " << fmt_double(layout.plane_to_detector) << "\n"
        << "baffle_len_m = " << fmt_double(layout.baffle_length) << "\n"
        << "combination = " << layout.combination.label() << "\n";
    return out.str();
}

LayoutConfig layout_from_kv(std::istream& in) {
    LayoutConfig cfg;
    double slot_width = 0.10, slot_pitch = 0.13, baffle_len = 0.0;
    double src_to_plane = 1.25, plane_to_det = 1.25;
    Combination combo;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        if (strip(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        const auto as_double = [&](const std::string& v) {
            size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos != v.size())
                throw std::invalid_argument("bad numeric value for " + key + ": " + v);
            return d;
        };
        if (key == "wavelength_m") cfg.wavelength_m = as_double(value);
        else if (key == "slot_width_m") slot_width = as_double(value);
        else if (key == "slot_pitch_m") slot_pitch = as_double(value);
        else if (key == "src_to_plane_m") src_to_plane = as_double(value);
        else if (key == "plane_to_det_m") plane_to_det = as_double(value);
        else if (key == "baffle_len_m") baffle_len = as_double(value);
        else if (key == "combination") combo = Combination::from_label(value);
        else throw std::invalid_argument("unknown layout key: " + key);
    }
    if (cfg.wavelength_m <= 0.0)
        throw std::invalid_argument("wavelength_m must be positive");
    if (src_to_plane <= 0.0 || plane_to_det <= 0.0)
        throw std::invalid_argument("propagation distances must be positive");

    cfg.layout = build_plane(slot_width, slot_pitch, combo, baffle_len);
    cfg.layout.source_to_plane = src_to_plane;
    cfg.layout.plane_to_detector = plane_to_det;
    return cfg;
}

LayoutConfig layout_from_kv(const std::string& text) {
    std::istringstream in(text);
    return layout_from_kv(in);
}

} // namespace kappa::geometry
