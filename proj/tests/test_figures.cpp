#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "kappa/config.hpp"
#include "kappa/figures.hpp"
#include "kappa/util.hpp"

using namespace kappa;
using config::CampaignConfig;
using config::Engine;
using figures::FigureOutput;
namespace fs = std::filesystem;

namespace {

/// Fresh output root per test case, under the test working directory.
std::string fresh_dir(const std::string& name) {
    const std::string dir = "figtest-" + name;
    fs::remove_all(dir);
    return dir;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Small, fast campaign: few detector points, tiny synthetic runs.
CampaignConfig quick_config(const std::string& outdir) {
    CampaignConfig cfg;
    cfg.detector_points = 9;
    cfg.detector_half_span_m = 0.4;
    cfg.repeats = 6;
    cfg.readings_per_series = 60;
    cfg.outdir = outdir;
    cfg.seed = 4242;
    return cfg;
}

std::vector<std::vector<double>> csv_rows(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

TEST_CASE("figure ids are fixed and unknown ids are config errors") {
    const auto& ids = figures::figure_ids();
    REQUIRE(ids.size() == 7);
    CHECK(ids[0] == "kappa-curve");
    CHECK(ids[1] == "distance-sweep");
    CHECK(ids[2] == "baffle-sweep");
    CHECK(ids[3] == "error-kappa");
    CHECK(ids[4] == "array");
    CHECK(ids[5] == "fdtd-compare");
    CHECK(ids[6] == "convergence");

    const CampaignConfig cfg = quick_config(fresh_dir("bad-id"));
    try {
        figures::run_figure("kappa-curv", cfg);
        FAIL("expected ConfigError");
    } catch (const config::ConfigError& e) {
        CHECK(std::string(e.what()).find("kappa-curv") != std::string::npos);
    }
}

TEST_CASE("array figure writes data, plot, and a self-consistent manifest") {
    const CampaignConfig cfg = quick_config(fresh_dir("array"));
    const FigureOutput out = figures::run_figure("array", cfg);
    CHECK(out.directory == cfg.outdir + "/array");
    REQUIRE(out.files == std::vector<std::string>{"array.csv", "array.svg",
                                                  "manifest.json"});

    const std::string csv = read_file(out.directory + "/array.csv");
    const auto rows = csv_rows(csv);
    REQUIRE(rows.size() == 61);
    double max_abs = 0.0;
    for (const auto& r : rows) {
        REQUIRE(r.size() == 3);
        max_abs = std::max(max_abs, std::abs(r[2]));
    }
    CHECK(max_abs > 1e-3);
    CHECK(max_abs < 1e-1);

    const std::string svg = read_file(out.directory + "/array.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);

    const auto manifest =
        nlohmann::json::parse(read_file(out.directory + "/manifest.json"));
    CHECK(manifest.at("command") == "figure");
    CHECK(manifest.at("figure") == "array");
    CHECK(manifest.at("version") == std::string(version_string));
    CHECK(manifest.at("seed") == cfg.seed);
    CHECK(manifest.at("config_hash") == cfg.config_hash());
    CHECK(manifest.at("config").at("slot_width_m") == cfg.slot_width_m);
    CHECK_FALSE(manifest.at("config").contains("outdir"));
    CHECK(manifest.at("engines").contains("array"));
    // recorded hashes match the bytes on disk
    for (const auto& [name, hash] : manifest.at("outputs").items())
        CHECK(hash == fnv1a_hex(read_file(out.directory + "/" + name)));
    CHECK(manifest.at("outputs").size() == 2); // manifest hashes the others
}

TEST_CASE("reruns are byte-identical across output directories") {
    CampaignConfig cfg = quick_config(fresh_dir("rerun-a"));
    const FigureOutput a = figures::run_figure("convergence", cfg);
    cfg.outdir = fresh_dir("rerun-b");
    const FigureOutput b = figures::run_figure("convergence", cfg);
    REQUIRE(a.files == b.files);
    for (const auto& f : a.files)
        CHECK(read_file(a.directory + "/" + f) ==
              read_file(b.directory + "/" + f));
}

TEST_CASE("classical-only curve is a null curve") {
    CampaignConfig cfg = quick_config(fresh_dir("classical"));
    cfg.detector_points = 41;
    cfg.detector_half_span_m = 0.5;
    cfg.classical_only = true;
    const FigureOutput out = figures::run_figure("kappa-curve", cfg);
    const auto rows =
        csv_rows(read_file(out.directory + "/curve-pathintegral.csv"));
    REQUIRE(rows.size() == 41);
    double max_abs = 0.0;
    for (const auto& r : rows) max_abs = std::max(max_abs, std::abs(r[2]));
    CHECK(max_abs <= 1e-10);
}

TEST_CASE("baffle sweep emits a non-increasing deficit") {
    const CampaignConfig cfg = quick_config(fresh_dir("baffle"));
    const FigureOutput out = figures::run_figure("baffle-sweep", cfg);
    const auto rows = csv_rows(read_file(out.directory + "/baffle-sweep.csv"));
    REQUIRE(rows.size() >= 6);
    for (size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][0] > rows[i - 1][0]);
        CHECK(rows[i][1] <= rows[i - 1][1]);
    }
    CHECK(rows.front()[1] > 1e-3); // starts live, ends killed
    CHECK(rows.back()[1] < 1e-10);

    CampaignConfig grid = cfg;
    grid.engine = Engine::fdtd;
    CHECK_THROWS_AS(figures::run_figure("baffle-sweep", grid),
                    figures::EngineError);
}

TEST_CASE("distance sweep hits the comparison distances and decreases") {
    const CampaignConfig cfg = quick_config(fresh_dir("distance"));
    const FigureOutput out = figures::run_figure("distance-sweep", cfg);
    const auto rows =
        csv_rows(read_file(out.directory + "/sweep-pathintegral.csv"));
    REQUIRE(rows.size() == 5);
    CHECK(rows[0][0] == doctest::Approx(1.25));
    CHECK(rows[2][0] == doctest::Approx(2.0));
    CHECK(rows[4][0] == doctest::Approx(3.0));
    for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][2] < rows[i - 1][2]);
}

TEST_CASE("error-kappa figure fits both calibration models") {
    const CampaignConfig cfg = quick_config(fresh_dir("errk"));
    const FigureOutput out = figures::run_figure("error-kappa", cfg);
    const auto rows = csv_rows(read_file(out.directory + "/error-kappa.csv"));
    REQUIRE(rows.size() == 9);
    for (const auto& r : rows) {
        REQUIRE(r.size() == 4);
        CHECK(std::isfinite(r[2]));
        CHECK(std::isfinite(r[3]));
    }
    const auto cal = csv_rows(read_file(out.directory + "/calibration.csv"));
    REQUIRE(cal.size() == 13);
    for (size_t i = 1; i < cal.size(); ++i) {
        CHECK(cal[i][0] > cal[i - 1][0]);
        CHECK(cal[i][1] > cal[i - 1][1]);
    }
    const auto manifest =
        nlohmann::json::parse(read_file(out.directory + "/manifest.json"));
    const double sp = manifest.at("max_abs_error_kappa").at("spline");
    const double po = manifest.at("max_abs_error_kappa").at("polynomial");
    CHECK(sp > 0.0);
    CHECK(po > 0.0);
}

TEST_CASE("simulate then analyze round-trips the synthetic campaign") {
    const CampaignConfig cfg = quick_config(fresh_dir("pipeline"));
    const FigureOutput sim = figures::run_simulate(cfg);
    CHECK(sim.directory == cfg.outdir + "/simulate");
    int n_runs = 0;
    for (const auto& f : sim.files)
        if (f.rfind("runs/", 0) == 0) ++n_runs;
    CHECK(n_runs == cfg.repeats);

    const FigureOutput ana = figures::run_analyze(cfg);
    const auto est = csv_rows(read_file(ana.directory + "/estimate.csv"));
    REQUIRE(est.size() == 1);
    CHECK(est[0][4] == cfg.repeats);

    // the convergence figure on the same seed sees the same campaign
    const FigureOutput conv = figures::run_figure("convergence", cfg);
    CHECK(read_file(conv.directory + "/estimate.csv") ==
          read_file(ana.directory + "/estimate.csv"));
    CHECK(read_file(conv.directory + "/runs-kappa.csv") ==
          read_file(ana.directory + "/runs-kappa.csv"));

    CampaignConfig empty = cfg;
    empty.outdir = fresh_dir("pipeline-empty");
    CHECK_THROWS_AS(figures::run_analyze(empty), figures::EngineError);
}

TEST_CASE("convergence figure reports the crossing and the run table") {
    const CampaignConfig cfg = quick_config(fresh_dir("conv"));
    const FigureOutput out = figures::run_figure("convergence", cfg);
    const auto runs = csv_rows(read_file(out.directory + "/runs-kappa.csv"));
    REQUIRE(static_cast<int>(runs.size()) == cfg.repeats);
    for (const auto& r : runs) CHECK(r[2] > 0.0);

    const auto conv = csv_rows(read_file(out.directory + "/convergence.csv"));
    REQUIRE(conv.size() >= 2);
    for (size_t i = 1; i < conv.size(); ++i) CHECK(conv[i][0] > conv[i - 1][0]);

    const auto manifest =
        nlohmann::json::parse(read_file(out.directory + "/manifest.json"));
    CHECK(manifest.at("estimate").at("n_runs") == cfg.repeats);
    const int crossing = manifest.at("crossing_n");
    CHECK((crossing == -1 || crossing >= 2));
}
