#include "kappa/figures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "kappa/fdtd.hpp"
#include "kappa/pathintegral.hpp"
#include "kappa/sorkin.hpp"
#include "kappa/stats.hpp"
#include "kappa/util.hpp"

namespace kappa::figures {

namespace fs = std::filesystem;
using config::CampaignConfig;
using config::ConfigError;
using config::Engine;
using nlohmann::json;

namespace {

// --------------------------------------------------------------- plumbing

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw EngineError("cannot create output directory " + dir + ": " +
                          ec.message());
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw EngineError("cannot write " + path);
}

/// Collects output files in memory so the manifest can record a content
/// hash for every one of them before anything touches the disk.
struct Emitter {
    std::vector<std::pair<std::string, std::string>> files;
    json engines = json::object();
    json extra = json::object();

    void add(const std::string& name, std::string content) {
        files.emplace_back(name, std::move(content));
    }
};

json config_json(const CampaignConfig& cfg) {
    json j;
    j["baffle_length_m"] = cfg.baffle_length_m;
    j["cells_per_wavelength"] = cfg.cells_per_wavelength;
    j["classical_only"] = cfg.classical_only;
    j["detector_half_span_m"] = cfg.detector_half_span_m;
    j["detector_points"] = cfg.detector_points;
    j["effective_slot_width_m"] = cfg.effective_slot_width_m;
    j["engine"] = config::engine_name(cfg.engine);
    j["plane_to_detector_m"] = cfg.plane_to_detector_m;
    j["points_per_wavelength"] = cfg.points_per_wavelength;
    j["readings_per_series"] = cfg.readings_per_series;
    j["relative_fluctuation"] = cfg.relative_fluctuation;
    j["repeats"] = cfg.repeats;
    j["run_periods"] = cfg.run_periods;
    j["seed"] = cfg.seed;
    j["slot_height_m"] = cfg.slot_height_m;
    j["slot_pitch_m"] = cfg.slot_pitch_m;
    j["slot_width_m"] = cfg.slot_width_m;
    j["source_to_plane_m"] = cfg.source_to_plane_m;
    j["wavelength_m"] = cfg.wavelength_m;
    return j;
}

FigureOutput finalize(const std::string& command, const CampaignConfig& cfg,
                      const std::string& dir, Emitter em) {
    ensure_dir(dir);
    json outputs = json::object();
    for (const auto& [name, bytes] : em.files) {
        outputs[name] = fnv1a_hex(bytes);
        const fs::path p = fs::path(dir) / name;
        if (p.has_parent_path()) ensure_dir(p.parent_path().string());
        write_file(p.string(), bytes);
    }
    json m;
    m["command"] = command;
    m["config"] = config_json(cfg);
    m["config_hash"] = cfg.config_hash();
    m["engines"] = em.engines;
    m["outputs"] = outputs;
    m["seed"] = cfg.seed;
    m["version"] = std::string(version_string);
    for (const auto& [k, v] : em.extra.items()) m[k] = v;
    write_file((fs::path(dir) / "manifest.json").string(), m.dump(2) + "\n");

    FigureOutput out;
    out.directory = dir;
    out.files.reserve(em.files.size() + 1);
    for (const auto& [name, bytes] : em.files) out.files.push_back(name);
    out.files.push_back("manifest.json");
    return out;
}

// ------------------------------------------------------------------- CSV

std::string curve_csv(const KappaCurve& c) {
    std::ostringstream os;
    os << "position_m,angle_deg,kappa\n";
    for (size_t i = 0; i < c.size(); ++i)
        os << fmt_g(c.positions_m[i], 17) << ',' << fmt_g(c.angles_deg[i], 17)
           << ',' << fmt_g(c.kappa[i], 17) << '\n';
    return os.str();
}

// ------------------------------------------------------------------- SVG

struct Series {
    std::string name;
    std::vector<double> x, y;
};

const char* series_color(size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    return colors[i % 4];
}

/// Minimal deterministic line plot: fixed canvas, 5 ticks per axis, one
/// polyline per series, legend in the top-right corner.
std::string svg_plot(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<Series>& series) {
    const double x_lo_px = 70.0, x_hi_px = 690.0;
    const double y_lo_px = 400.0, y_hi_px = 40.0; // svg y grows downward

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!(xmin <= xmax)) { xmin = 0.0; xmax = 1.0; }
    if (!(ymin <= ymax)) { ymin = 0.0; ymax = 1.0; }
    if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
    if (ymax == ymin) {
        const double pad = std::max(std::abs(ymax) * 0.5, 1e-12);
        ymin -= pad;
        ymax += pad;
    } else {
        const double pad = (ymax - ymin) * 0.05;
        ymin -= pad;
        ymax += pad;
    }

    const auto px = [&](double x) {
        return x_lo_px + (x - xmin) / (xmax - xmin) * (x_hi_px - x_lo_px);
    };
    const auto py = [&](double y) {
        return y_lo_px + (y - ymin) / (ymax - ymin) * (y_hi_px - y_lo_px);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"450\" "
          "viewBox=\"0 0 720 450\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"720\" height=\"450\" fill=\"white\"/>\n"
       << "<text x=\"380\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" "
          "font-size=\"15\">" << title << "</text>\n";

    for (int t = 0; t < 5; ++t) {
        const double fx = xmin + (xmax - xmin) * t / 4.0;
        const double fy = ymin + (ymax - ymin) * t / 4.0;
        const std::string gx = fmt_g(px(fx), 8), gy = fmt_g(py(fy), 8);
        os << "<line x1=\"" << gx << "\" y1=\"40\" x2=\"" << gx
           << "\" y2=\"400\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
           << "<line x1=\"70\" y1=\"" << gy << "\" x2=\"690\" y2=\"" << gy
           << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
           << "<text x=\"" << gx << "\" y=\"418\" text-anchor=\"middle\" "
              "font-family=\"monospace\" font-size=\"11\">" << fmt_g(fx, 4)
           << "</text>\n"
           << "<text x=\"64\" y=\"" << fmt_g(py(fy) + 4.0, 8)
           << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
           << fmt_g(fy, 4) << "</text>\n";
    }
    os << "<rect x=\"70\" y=\"40\" width=\"620\" height=\"360\" fill=\"none\" "
          "stroke=\"black\" stroke-width=\"1\"/>\n";

    for (size_t s = 0; s < series.size(); ++s) {
        os << "<polyline fill=\"none\" stroke=\"" << series_color(s)
           << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < series[s].x.size(); ++i) {
            if (i) os << ' ';
            os << fmt_g(px(series[s].x[i]), 8) << ',' << fmt_g(py(series[s].y[i]), 8);
        }
        os << "\"/>\n";
        os << "<text x=\"684\" y=\"" << fmt_g(56.0 + 16.0 * static_cast<double>(s), 8)
           << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\" fill=\""
           << series_color(s) << "\">" << series[s].name << "</text>\n";
    }

    os << "<text x=\"380\" y=\"440\" text-anchor=\"middle\" font-family=\"monospace\" "
          "font-size=\"13\">" << xlabel << "</text>\n"
       << "<text x=\"16\" y=\"220\" text-anchor=\"middle\" font-family=\"monospace\" "
          "font-size=\"13\" transform=\"rotate(-90 16 220)\">" << ylabel
       << "</text>\n</svg>\n";
    return os.str();
}

double log10_floor(double v) { return std::log10(std::max(std::abs(v), 1e-18)); }

// ----------------------------------------------------------- engine glue

pathintegral::PropagationParams pp_from(const CampaignConfig& cfg) {
    pathintegral::PropagationParams pp;
    pp.wavelength = cfg.wavelength_m;
    pp.effective_slot_width = cfg.effective_slot_width_m;
    pp.quadrature_points_per_wavelength = cfg.points_per_wavelength;
    return pp;
}

/// Grid parameters sized for a layout and the widest probe offset: PML
/// clearance around the bars and the detector line, box tall enough for the
/// detector row, enough periods for the farthest transit plus demodulation.
fdtd::SimulationParams sp_from(const CampaignConfig& cfg,
                               const geometry::PlaneLayout& layout,
                               double max_abs_x) {
    fdtd::SimulationParams sp;
    sp.frequency = 299792458.0 / cfg.wavelength_m;
    sp.cell_size = sp.wavelength() / cfg.cells_per_wavelength;
    const double lam = sp.wavelength();
    const double clearance =
        3.0 * lam + (sp.pml_cells + 2) * sp.resolved_cell();
    const double half_x =
        std::max(layout.outermost_slot_edge(), max_abs_x) + clearance;
    sp.box_x = 2.0 * half_x;
    sp.box_y = sp.source_margin + layout.source_to_plane +
               layout.plane_to_detector + 2.0 * lam;
    const double transit = std::hypot(
        max_abs_x, layout.source_to_plane + layout.plane_to_detector);
    const int needed = static_cast<int>(std::ceil(transit / lam)) +
                       sp.ramp_periods + sp.demod_periods + 6;
    sp.run_periods = std::max(cfg.run_periods, needed);
    return sp;
}

KappaCurve run_pathintegral(const CampaignConfig& cfg,
                            const geometry::PlaneLayout& layout,
                            const geometry::DetectorLine& line) {
    return pathintegral::kappa_curve_pathintegral(layout, line, pp_from(cfg),
                                                  !cfg.classical_only);
}

KappaCurve run_fdtd(const CampaignConfig& cfg,
                    const geometry::PlaneLayout& layout,
                    const geometry::DetectorLine& line) {
    if (cfg.classical_only)
        throw EngineError(
            "classical_only applies to the pathintegral engine only");
    double max_abs_x = 0.0;
    for (double x : line.positions) max_abs_x = std::max(max_abs_x, std::abs(x));
    return fdtd::kappa_curve_fdtd(sp_from(cfg, layout, max_abs_x), layout, line);
}

// --------------------------------------------------- statistics campaign

/// Eight relative combination powers at the central detector position,
/// background normalized to 1 W, taken from the path-integral engine.
std::array<double, 8> central_true_powers(const CampaignConfig& cfg) {
    const geometry::PlaneLayout layout = cfg.layout();
    const pathintegral::PropagationParams pp = pp_from(cfg);
    const pathintegral::Point src{0.0, 0.0};
    const pathintegral::Point det{
        0.0, layout.source_to_plane + layout.plane_to_detector};
    const auto bd = pathintegral::amplitude_breakdown(src, det, layout, pp,
                                                      !cfg.classical_only);
    const double bg = std::norm(bd.total(0));
    if (!(bg > 0.0)) throw EngineError("zero background power at the detector");
    std::array<double, 8> tp{};
    for (int i = 0; i < 8; ++i) tp[i] = std::norm(bd.total(i)) / bg;
    return tp;
}

stats::SynthesisParams synthesis_from(const CampaignConfig& cfg) {
    stats::SynthesisParams sy;
    sy.position_m = 0.0;
    sy.true_powers = central_true_powers(cfg);
    sy.readings_per_series = cfg.readings_per_series;
    sy.series_duration_s = 45.0;
    sy.drift_relative = cfg.relative_fluctuation;
    return sy;
}

std::vector<int> subsample_sizes(int pool) {
    static const int candidates[] = {2,  3,  4,  5,  6,  8,  10, 12,
                                     16, 20, 24, 32, 40, 48, 64};
    std::vector<int> out;
    for (int n : candidates)
        if (n <= pool) out.push_back(n);
    if (out.empty()) out.push_back(pool);
    return out;
}

/// Shared by the convergence figure and the analyze subcommand: per-run
/// kappa table, repeat statistics, and the subsample convergence scan.
void emit_campaign_stats(Emitter& em, const std::vector<double>& kappas,
                         const std::vector<double>& sigmas, std::uint64_t seed) {
    std::ostringstream runs_csv;
    runs_csv << "run_index,kappa,sigma_kappa\n";
    for (size_t r = 0; r < kappas.size(); ++r)
        runs_csv << r << ',' << fmt_g(kappas[r], 17) << ','
                 << fmt_g(sigmas[r], 17) << '\n';
    em.add("runs-kappa.csv", runs_csv.str());

    const double sigma_ref = stats::summarize(sigmas).median;
    const stats::KappaEstimate est = stats::repeat_statistics(kappas, sigma_ref);

    const auto sizes = subsample_sizes(static_cast<int>(kappas.size()));
    const auto conv = stats::convergence_check(kappas, sizes, 400, seed);

    std::ostringstream conv_csv;
    conv_csv << "subsample_n,median_std,sigma_reference\n";
    int crossing = -1;
    for (const auto& pt : conv) {
        conv_csv << pt.n << ',' << fmt_g(pt.median_std, 17) << ','
                 << fmt_g(sigma_ref, 17) << '\n';
        if (crossing < 0 && pt.median_std < sigma_ref) crossing = pt.n;
    }
    em.add("convergence.csv", conv_csv.str());

    std::ostringstream est_csv;
    est_csv << "kappa_median,q1,q3,sigma_kappa,n_runs\n"
            << fmt_g(est.kappa_median, 17) << ',' << fmt_g(est.q1, 17) << ','
            << fmt_g(est.q3, 17) << ',' << fmt_g(est.sigma_kappa, 17) << ','
            << est.n_runs << '\n';
    em.add("estimate.csv", est_csv.str());

    Series conv_series{"subsample median std", {}, {}};
    Series sigma_series{"per-run sigma", {}, {}};
    for (const auto& pt : conv) {
        conv_series.x.push_back(pt.n);
        conv_series.y.push_back(pt.median_std);
    }
    if (!conv.empty()) {
        sigma_series.x = {static_cast<double>(conv.front().n),
                          static_cast<double>(conv.back().n)};
        sigma_series.y = {sigma_ref, sigma_ref};
    }
    em.add("convergence.svg",
           svg_plot("subsample convergence of the kappa median", "subsample size",
                    "std of subsample medians", {conv_series, sigma_series}));

    em.extra["estimate"] = {{"kappa_median", est.kappa_median},
                            {"q1", est.q1},
                            {"q3", est.q3},
                            {"sigma_kappa", est.sigma_kappa},
                            {"n_runs", est.n_runs}};
    em.extra["crossing_n"] = crossing;
}

// ---------------------------------------------------------------- figures

void fig_kappa_curve(const CampaignConfig& cfg, Emitter& em) {
    const geometry::PlaneLayout layout = cfg.layout();
    const geometry::DetectorLine line = cfg.detector_line();
    std::vector<Series> series;

    if (cfg.engine != Engine::fdtd) {
        const KappaCurve c = run_pathintegral(cfg, layout, line);
        em.add("curve-pathintegral.csv", curve_csv(c));
        em.engines["pathintegral"] = c.params_hash;
        em.extra["central_kappa"]["pathintegral"] = c.central_value();
        series.push_back({"pathintegral", c.angles_deg, c.kappa});
    }
    if (cfg.engine != Engine::pathintegral) {
        const KappaCurve c = run_fdtd(cfg, layout, line);
        em.add("curve-fdtd.csv", curve_csv(c));
        em.engines["fdtd"] = c.params_hash;
        em.extra["central_kappa"]["fdtd"] = c.central_value();
        series.push_back({"fdtd", c.angles_deg, c.kappa});
    }
    em.add("kappa-curve.svg",
           svg_plot("interference deficit along the detector line",
                    "detector angle [deg]", "kappa", series));
}

void fig_distance_sweep(const CampaignConfig& cfg, Emitter& em) {
    static const double mult[] = {1.0, 1.3, 1.6, 2.0, 2.4};
    const geometry::DetectorLine center{{0.0}, cfg.plane_to_detector_m};
    std::vector<Series> series;

    const auto sweep_engine = [&](bool grid) {
        Series s{grid ? "fdtd" : "pathintegral", {}, {}};
        std::ostringstream csv;
        csv << "source_to_plane_m,central_kappa,abs_central_kappa\n";
        for (double m : mult) {
            geometry::PlaneLayout layout = cfg.layout();
            layout.source_to_plane = cfg.source_to_plane_m * m;
            const KappaCurve c = grid ? run_fdtd(cfg, layout, center)
                                      : run_pathintegral(cfg, layout, center);
            if (em.engines.find(s.name) == em.engines.end())
                em.engines[s.name] = c.params_hash;
            csv << fmt_g(layout.source_to_plane, 17) << ','
                << fmt_g(c.kappa.front(), 17) << ','
                << fmt_g(std::abs(c.kappa.front()), 17) << '\n';
            s.x.push_back(layout.source_to_plane);
            s.y.push_back(log10_floor(c.kappa.front()));
        }
        em.add(grid ? "sweep-fdtd.csv" : "sweep-pathintegral.csv", csv.str());
        series.push_back(std::move(s));
    };

    if (cfg.engine != Engine::fdtd) sweep_engine(false);
    if (cfg.engine != Engine::pathintegral) sweep_engine(true);
    em.add("distance-sweep.svg",
           svg_plot("central deficit vs source distance", "source distance [m]",
                    "log10 |kappa|", series));
}

void fig_baffle_sweep(const CampaignConfig& cfg, Emitter& em) {
    if (cfg.engine == Engine::fdtd)
        throw EngineError("baffle-sweep requires the pathintegral engine "
                          "(the grid solver models the bare slot plane only)");
    const geometry::PlaneLayout layout = cfg.layout();
    const pathintegral::PropagationParams pp = pp_from(cfg);
    std::vector<double> lengths;
    for (double f : {0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 12.0, 24.0})
        lengths.push_back(f * cfg.wavelength_m);
    const auto rows =
        pathintegral::baffle_sweep(layout, pp, lengths, !cfg.classical_only);

    std::ostringstream csv;
    csv << "baffle_length_m,abs_central_kappa\n";
    Series s{"pathintegral", {}, {}};
    for (const auto& [L, v] : rows) {
        csv << fmt_g(L, 17) << ',' << fmt_g(v, 17) << '\n';
        s.x.push_back(L);
        s.y.push_back(log10_floor(v));
    }
    em.add("baffle-sweep.csv", csv.str());
    em.add("baffle-sweep.svg",
           svg_plot("central deficit vs baffle length", "baffle length [m]",
                    "log10 |kappa|", {s}));
    em.engines["pathintegral"] = pp.params_hash(layout);
    em.extra["final_abs_kappa"] = rows.back().second;
}

void fig_error_kappa(const CampaignConfig& cfg, Emitter& em) {
    const geometry::PlaneLayout layout = cfg.layout();
    const geometry::DetectorLine line = cfg.detector_line();
    const pathintegral::PropagationParams pp = pp_from(cfg);

    // ideal additive powers: classical propagation only, so any nonzero
    // kappa downstream is the calibration map's doing
    const pathintegral::Point src{0.0, 0.0};
    const double z_det = layout.source_to_plane + layout.plane_to_detector;
    std::vector<sorkin::PowerSet> ideal(line.positions.size());
    double max_bg = 0.0, p_max = 0.0;
    for (size_t i = 0; i < line.positions.size(); ++i) {
        const auto bd = pathintegral::amplitude_breakdown(
            src, {line.positions[i], z_det}, layout, pp, false);
        for (int c = 0; c < 8; ++c) {
            const double p = std::norm(bd.total(c));
            ideal[i].p[static_cast<size_t>(c)] = p;
            p_max = std::max(p_max, p);
        }
        max_bg = std::max(max_bg, ideal[i].background());
    }
    for (auto& ps : ideal) ps.max_background = max_bg;

    // calibration data: 3% full-scale quadratic bow plus 0.1% seeded
    // reading scatter; the spline interpolates the scatter, the cubic
    // least-squares fit smooths it
    const int n_cal = 13;
    const double x_top = 1.05 * p_max;
    std::mt19937_64 rng(cfg.seed ^ 0x5ca1ab1edeadbeefULL);
    std::normal_distribution<double> scatter(0.0, 1e-3);
    std::vector<double> cal_in, cal_out;
    for (int k = 0; k < n_cal; ++k) {
        const double x = x_top * k / (n_cal - 1);
        const double bowed = x * (1.0 + 0.03 * x / x_top);
        cal_in.push_back(x);
        cal_out.push_back(k == 0 ? 0.0 : bowed * (1.0 + scatter(rng)));
    }

    const auto spline =
        sorkin::fit_nonlinearity(cal_in, cal_out, sorkin::FitKind::spline);
    const auto poly =
        sorkin::fit_nonlinearity(cal_in, cal_out, sorkin::FitKind::polynomial, 3);
    const auto rs = sorkin::error_kappa(spline, line.positions, ideal,
                                        cfg.plane_to_detector_m);
    const auto rp = sorkin::error_kappa(poly, line.positions, ideal,
                                        cfg.plane_to_detector_m);

    std::ostringstream csv;
    csv << "position_m,angle_deg,error_kappa_spline,error_kappa_polynomial\n";
    for (size_t i = 0; i < line.positions.size(); ++i)
        csv << fmt_g(rs.curve.positions_m[i], 17) << ','
            << fmt_g(rs.curve.angles_deg[i], 17) << ','
            << fmt_g(rs.curve.kappa[i], 17) << ','
            << fmt_g(rp.curve.kappa[i], 17) << '\n';
    em.add("error-kappa.csv", csv.str());

    std::ostringstream cal_csv;
    cal_csv << "input_w,measured_w\n";
    for (int k = 0; k < n_cal; ++k)
        cal_csv << fmt_g(cal_in[static_cast<size_t>(k)], 17) << ','
                << fmt_g(cal_out[static_cast<size_t>(k)], 17) << '\n';
    em.add("calibration.csv", cal_csv.str());

    em.add("error-kappa.svg",
           svg_plot("deficit induced by detector calibration error",
                    "detector angle [deg]", "error kappa",
                    {{"spline fit", rs.curve.angles_deg, rs.curve.kappa},
                     {"polynomial fit", rp.curve.angles_deg, rp.curve.kappa}}));

    em.engines["pathintegral"] = pp.params_hash(layout);
    em.extra["max_abs_error_kappa"] = {{"spline", rs.curve.max_abs()},
                                       {"polynomial", rp.curve.max_abs()}};
    em.extra["extrapolated_points"] = {{"spline", rs.extrapolated},
                                       {"polynomial", rp.extrapolated}};
}

void fig_array(const CampaignConfig& cfg, Emitter& em) {
    pathintegral::DipoleArrayParams ap;
    ap.wavelength = cfg.wavelength_m;
    ap.spacing = 10.0 * cfg.wavelength_m;
    ap.observation_distance = 1.0e3 * cfg.wavelength_m;
    ap.half_span = 300.0 * cfg.wavelength_m;
    ap.wire_radius = 0.01 * cfg.wavelength_m;
    ap.element_length = 0.5 * cfg.wavelength_m;
    ap.n_positions = 61;
    const KappaCurve c = pathintegral::kappa_dipole_array(ap);

    em.add("array.csv", curve_csv(c));
    em.add("array.svg",
           svg_plot("three-element array deficit on the far line",
                    "observation angle [deg]", "kappa",
                    {{"array", c.angles_deg, c.kappa}}));
    em.engines["array"] = c.params_hash;
    em.extra["central_kappa"] = c.central_value();
    em.extra["max_abs_kappa"] = c.max_abs();
}

void fig_fdtd_compare(const CampaignConfig& cfg, Emitter& em) {
    const geometry::PlaneLayout layout = cfg.layout();
    const geometry::DetectorLine line = cfg.detector_line();
    const KappaCurve cpi = run_pathintegral(cfg, layout, line);
    const KappaCurve cfd = run_fdtd(cfg, layout, line);

    std::ostringstream csv;
    csv << "position_m,angle_deg,kappa_pathintegral,kappa_fdtd\n";
    for (size_t i = 0; i < line.positions.size(); ++i)
        csv << fmt_g(cpi.positions_m[i], 17) << ','
            << fmt_g(cpi.angles_deg[i], 17) << ',' << fmt_g(cpi.kappa[i], 17)
            << ',' << fmt_g(cfd.kappa[i], 17) << '\n';
    em.add("compare.csv", csv.str());
    em.add("fdtd-compare.svg",
           svg_plot("engine comparison along the detector line",
                    "detector angle [deg]", "kappa",
                    {{"pathintegral", cpi.angles_deg, cpi.kappa},
                     {"fdtd", cfd.angles_deg, cfd.kappa}}));

    em.engines["pathintegral"] = cpi.params_hash;
    em.engines["fdtd"] = cfd.params_hash;
    em.extra["central_kappa"] = {{"pathintegral", cpi.central_value()},
                                 {"fdtd", cfd.central_value()}};
    if (cpi.central_value() != 0.0)
        em.extra["central_ratio"] =
            std::abs(cfd.central_value()) / std::abs(cpi.central_value());
}

void fig_convergence(const CampaignConfig& cfg, Emitter& em) {
    const stats::SynthesisParams sy = synthesis_from(cfg);
    std::vector<double> kappas, sigmas;
    kappas.reserve(static_cast<size_t>(cfg.repeats));
    for (int r = 0; r < cfg.repeats; ++r) {
        const stats::MeasurementRun run =
            stats::synthesize_run(sy, cfg.seed + 1 + static_cast<std::uint64_t>(r));
        const stats::RunKappa rk = stats::kappa_from_run(run);
        kappas.push_back(rk.kappa);
        sigmas.push_back(rk.sigma_kappa);
    }
    emit_campaign_stats(em, kappas, sigmas, cfg.seed);
    em.engines["pathintegral"] = pp_from(cfg).params_hash(cfg.layout());
    em.extra["true_powers"] = sy.true_powers;
}

} // namespace

const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids = {
        "kappa-curve", "distance-sweep", "baffle-sweep", "error-kappa",
        "array",       "fdtd-compare",   "convergence"};
    return ids;
}

FigureOutput run_figure(const std::string& id, const CampaignConfig& cfg) {
    cfg.validate();
    const auto& ids = figure_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
        std::string known;
        for (const auto& k : ids) known += (known.empty() ? "" : ", ") + k;
        throw ConfigError("unknown figure id: " + id + " (expected one of " +
                          known + ")");
    }
    Emitter em;
    em.extra["figure"] = id;
    if (id == "kappa-curve") fig_kappa_curve(cfg, em);
    else if (id == "distance-sweep") fig_distance_sweep(cfg, em);
    else if (id == "baffle-sweep") fig_baffle_sweep(cfg, em);
    else if (id == "error-kappa") fig_error_kappa(cfg, em);
    else if (id == "array") fig_array(cfg, em);
    else if (id == "fdtd-compare") fig_fdtd_compare(cfg, em);
    else fig_convergence(cfg, em);
    return finalize("figure", cfg, cfg.outdir + "/" + id, std::move(em));
}

FigureOutput run_simulate(const CampaignConfig& cfg) {
    cfg.validate();
    Emitter em;
    fig_kappa_curve(cfg, em);

    const stats::SynthesisParams sy = synthesis_from(cfg);
    for (int r = 0; r < cfg.repeats; ++r) {
        const stats::MeasurementRun run =
            stats::synthesize_run(sy, cfg.seed + 1 + static_cast<std::uint64_t>(r));
        std::ostringstream os;
        stats::write_run(os, run);
        char name[32];
        std::snprintf(name, sizeof name, "runs/run-%03d.csv", r);
        em.add(name, os.str());
    }
    em.extra["n_runs"] = cfg.repeats;
    em.extra["true_powers"] = sy.true_powers;
    return finalize("simulate", cfg, cfg.outdir + "/simulate", std::move(em));
}

FigureOutput run_analyze(const CampaignConfig& cfg) {
    cfg.validate();
    const std::string runs_dir = cfg.outdir + "/simulate/runs";
    if (!fs::is_directory(runs_dir))
        throw EngineError("no measurement runs under " + runs_dir +
                          "; run simulate first");
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(runs_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    if (names.empty())
        throw EngineError("no measurement runs under " + runs_dir +
                          "; run simulate first");

    std::vector<double> kappas, sigmas;
    for (const auto& name : names) {
        try {
            const stats::MeasurementRun run =
                stats::ingest_run_file(runs_dir + "/" + name);
            const stats::RunKappa rk = stats::kappa_from_run(run);
            kappas.push_back(rk.kappa);
            sigmas.push_back(rk.sigma_kappa);
        } catch (const EngineError&) {
            throw;
        } catch (const std::exception& e) {
            throw EngineError("bad measurement run " + name + ": " + e.what());
        }
    }

    Emitter em;
    emit_campaign_stats(em, kappas, sigmas, cfg.seed);
    em.extra["input_runs"] = names;
    return finalize("analyze", cfg, cfg.outdir + "/analyze", std::move(em));
}

} // namespace kappa::figures
