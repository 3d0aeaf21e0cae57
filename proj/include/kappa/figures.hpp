#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kappa/config.hpp"

namespace kappa::figures {

/// Engine or output failure while producing artifacts. The command-line
/// front end maps this to exit code 3.
struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The supported figure ids, in fixed order: kappa-curve, distance-sweep,
/// baffle-sweep, error-kappa, array, fdtd-compare, convergence.
const std::vector<std::string>& figure_ids();

struct FigureOutput {
    std::string directory;          // directory the files were written to
    std::vector<std::string> files; // file names inside it, fixed order
};

/// Produces one figure campaign under `<outdir>/<id>/`: CSV data, an SVG
/// plot, and a manifest.json recording the config hash, seed, software
/// version, engine parameter hashes, and a content hash per output file.
/// Reruns with the same config are byte-identical. Throws ConfigError for
/// an unknown id, EngineError (or engine exceptions) for run failures.
FigureOutput run_figure(const std::string& id, const config::CampaignConfig& cfg);

/// simulate subcommand: configured engine curve(s) plus a set of synthetic
/// measurement runs under `<outdir>/simulate/` (raw runs in `runs/`).
FigureOutput run_simulate(const config::CampaignConfig& cfg);

/// analyze subcommand: ingests `<outdir>/simulate/runs/*.csv`, computes
/// per-run kappa, repeat statistics, and the subsample convergence table
/// under `<outdir>/analyze/`.
FigureOutput run_analyze(const config::CampaignConfig& cfg);

} // namespace kappa::figures
