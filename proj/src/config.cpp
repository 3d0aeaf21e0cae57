#include "kappa/config.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "kappa/util.hpp"

namespace kappa::config {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double_value(const std::string& key, const std::string& s) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": " + s);
    }
}

int parse_int_value(const std::string& key, const std::string& s) {
    try {
        size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
            throw std::out_of_range(s);
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": " + s);
    }
}

std::uint64_t parse_u64_value(const std::string& key, const std::string& s) {
    try {
        size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size() || s.empty() || s[0] == '-')
            throw std::invalid_argument(s);
        return static_cast<std::uint64_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("bad unsigned value for " + key + ": " + s);
    }
}

bool parse_bool_value(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("bad boolean value for " + key + ": " + s);
}

void require_positive(const std::string& key, double v) {
    if (!(v > 0.0)) throw ConfigError("out of range: " + key + " must be positive");
}

} // namespace

std::string engine_name(Engine e) {
    switch (e) {
    case Engine::pathintegral: return "pathintegral";
    case Engine::fdtd: return "fdtd";
    case Engine::both: return "both";
    }
    return "?";
}

Engine engine_from_name(const std::string& name) {
    if (name == "pathintegral") return Engine::pathintegral;
    if (name == "fdtd") return Engine::fdtd;
    if (name == "both") return Engine::both;
    throw ConfigError("unknown engine: " + name +
                      " (expected pathintegral, fdtd, or both)");
}

void CampaignConfig::validate() const {
    require_positive("wavelength_m", wavelength_m);
    require_positive("slot_width_m", slot_width_m);
    require_positive("slot_pitch_m", slot_pitch_m);
    require_positive("slot_height_m", slot_height_m);
    require_positive("source_to_plane_m", source_to_plane_m);
    require_positive("plane_to_detector_m", plane_to_detector_m);
    if (slot_pitch_m <= slot_width_m)
        throw ConfigError("out of range: slot_pitch_m must exceed slot_width_m");
    if (baffle_length_m < 0.0)
        throw ConfigError("out of range: baffle_length_m must be non-negative");
    require_positive("detector_half_span_m", detector_half_span_m);
    if (detector_points < 2)
        throw ConfigError("out of range: detector_points must be at least 2");
    if (!(effective_slot_width_m > 0.0) || effective_slot_width_m > slot_width_m)
        throw ConfigError(
            "out of range: effective_slot_width_m must be in (0, slot_width_m]");
    if (points_per_wavelength < 2)
        throw ConfigError("out of range: points_per_wavelength must be at least 2");
    if (cells_per_wavelength < 20)
        throw ConfigError("out of range: cells_per_wavelength must be at least 20");
    if (run_periods < 20)
        throw ConfigError("out of range: run_periods must be at least 20");
    if (repeats < 2)
        throw ConfigError("out of range: repeats must be at least 2");
    if (readings_per_series < 4)
        throw ConfigError("out of range: readings_per_series must be at least 4");
    if (relative_fluctuation < 0.0 || relative_fluctuation >= 0.5)
        throw ConfigError("out of range: relative_fluctuation must be in [0, 0.5)");
    if (outdir.empty()) throw ConfigError("out of range: outdir must be non-empty");
}

geometry::PlaneLayout CampaignConfig::layout() const {
    geometry::PlaneLayout l = geometry::build_plane(
        slot_width_m, slot_pitch_m, geometry::Combination{}, baffle_length_m);
    l.slot_height = slot_height_m;
    l.source_to_plane = source_to_plane_m;
    l.plane_to_detector = plane_to_detector_m;
    return l;
}

geometry::DetectorLine CampaignConfig::detector_line() const {
    return geometry::DetectorLine::symmetric(detector_half_span_m, detector_points,
                                             plane_to_detector_m);
}

std::string CampaignConfig::canonical_text() const {
    std::ostringstream os;
    const auto d = [](double v) { return fmt_g(v, 17); };
    os << "baffle_length_m=" << d(baffle_length_m) << '\n'
       << "cells_per_wavelength=" << cells_per_wavelength << '\n'
       << "classical_only=" << (classical_only ? "true" : "false") << '\n'
       << "detector_half_span_m=" << d(detector_half_span_m) << '\n'
       << "detector_points=" << detector_points << '\n'
       << "effective_slot_width_m=" << d(effective_slot_width_m) << '\n'
       << "engine=" << engine_name(engine) << '\n'
       << "plane_to_detector_m=" << d(plane_to_detector_m) << '\n'
       << "points_per_wavelength=" << points_per_wavelength << '\n'
       << "readings_per_series=" << readings_per_series << '\n'
       << "relative_fluctuation=" << d(relative_fluctuation) << '\n'
       << "repeats=" << repeats << '\n'
       << "run_periods=" << run_periods << '\n'
       << "seed=" << seed << '\n'
       << "slot_height_m=" << d(slot_height_m) << '\n'
       << "slot_pitch_m=" << d(slot_pitch_m) << '\n'
       << "slot_width_m=" << d(slot_width_m) << '\n'
       << "source_to_plane_m=" << d(source_to_plane_m) << '\n'
       << "wavelength_m=" << d(wavelength_m) << '\n';
    return os.str();
}

std::string CampaignConfig::config_hash() const { return fnv1a_hex(canonical_text()); }

CampaignConfig parse_config_text(const std::string& text) {
    CampaignConfig cfg;
    std::vector<std::string> seen;
    bool engine_set = false;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const size_t hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected key = value, got: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (value.empty())
            throw ConfigError("empty value for " + key);
        for (const auto& s : seen)
            if (s == key) throw ConfigError("duplicate config key: " + key);
        seen.push_back(key);

        if (key == "engine") {
            cfg.engine = engine_from_name(value);
            engine_set = true;
        } else if (key == "wavelength_m") {
            cfg.wavelength_m = parse_double_value(key, value);
        } else if (key == "slot_width_m") {
            cfg.slot_width_m = parse_double_value(key, value);
        } else if (key == "slot_pitch_m") {
            cfg.slot_pitch_m = parse_double_value(key, value);
        } else if (key == "slot_height_m") {
            cfg.slot_height_m = parse_double_value(key, value);
        } else if (key == "source_to_plane_m") {
            cfg.source_to_plane_m = parse_double_value(key, value);
        } else if (key == "plane_to_detector_m") {
            cfg.plane_to_detector_m = parse_double_value(key, value);
        } else if (key == "baffle_length_m") {
            cfg.baffle_length_m = parse_double_value(key, value);
        } else if (key == "detector_half_span_m") {
            cfg.detector_half_span_m = parse_double_value(key, value);
        } else if (key == "detector_points") {
            cfg.detector_points = parse_int_value(key, value);
        } else if (key == "effective_slot_width_m") {
            cfg.effective_slot_width_m = parse_double_value(key, value);
        } else if (key == "points_per_wavelength") {
            cfg.points_per_wavelength = parse_int_value(key, value);
        } else if (key == "classical_only") {
            cfg.classical_only = parse_bool_value(key, value);
        } else if (key == "cells_per_wavelength") {
            cfg.cells_per_wavelength = parse_int_value(key, value);
        } else if (key == "run_periods") {
            cfg.run_periods = parse_int_value(key, value);
        } else if (key == "repeats") {
            cfg.repeats = parse_int_value(key, value);
        } else if (key == "readings_per_series") {
            cfg.readings_per_series = parse_int_value(key, value);
        } else if (key == "relative_fluctuation") {
            cfg.relative_fluctuation = parse_double_value(key, value);
        } else if (key == "outdir") {
            cfg.outdir = value;
        } else if (key == "seed") {
            cfg.seed = parse_u64_value(key, value);
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
    if (!engine_set) throw ConfigError("missing required key: engine");
    cfg.validate();
    return cfg;
}

CampaignConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace kappa::config
