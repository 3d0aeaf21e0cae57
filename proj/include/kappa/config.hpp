#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "kappa/geometry.hpp"

namespace kappa::config {

/// Malformed or out-of-range configuration input. The command-line front
/// end maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Engine { pathintegral, fdtd, both };

std::string engine_name(Engine e);
/// Throws ConfigError on anything but "pathintegral", "fdtd", "both".
Engine engine_from_name(const std::string& name);

/// One simulation/analysis campaign. Defaults reproduce the main setup:
/// 5 cm wavelength, 10 cm slots on a 13 cm pitch, 1.25 m on either side of
/// the slot plane.
struct CampaignConfig {
    Engine engine = Engine::pathintegral;

    // slot plane geometry
    double wavelength_m = 0.05;
    double slot_width_m = 0.10;
    double slot_pitch_m = 0.13;
    double slot_height_m = 0.30;
    double source_to_plane_m = 1.25;
    double plane_to_detector_m = 1.25;
    double baffle_length_m = 0.0;

    // detector line
    double detector_half_span_m = 0.5;
    int detector_points = 41;

    // path-integral engine
    double effective_slot_width_m = 0.07;
    int points_per_wavelength = 16;
    bool classical_only = false;

    // grid engine
    int cells_per_wavelength = 20;
    int run_periods = 80;

    // synthetic measurement campaign
    int repeats = 24;
    int readings_per_series = 600;
    double relative_fluctuation = 0.003;

    // run control
    std::string outdir = "out";
    std::uint64_t seed = 12345;

    /// Range checks; throws ConfigError naming the offending key.
    void validate() const;

    geometry::PlaneLayout layout() const;
    geometry::DetectorLine detector_line() const;

    /// Every key that affects computed numbers, one `key=value` per line,
    /// fixed order, full precision. outdir is plumbing and excluded, so the
    /// same campaign hashes identically wherever it is written.
    std::string canonical_text() const;
    /// Fingerprint of canonical_text(); recorded in output manifests.
    std::string config_hash() const;
};

/// Parses `key = value` lines ('#' comments, blank lines allowed) and
/// validates. Unknown, duplicate, or malformed keys are hard errors naming
/// the key; `engine` is required.
CampaignConfig parse_config_text(const std::string& text);

/// parse_config_text on the contents of `path`.
CampaignConfig parse_config(const std::string& path);

} // namespace kappa::config
